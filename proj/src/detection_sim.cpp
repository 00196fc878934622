#include "switchsim/detection_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "switchsim/errors.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

namespace {

void check_rate(double value, const char* field) {
    if (!(value >= 0.0))
        throw std::invalid_argument(std::string("rate field ") + field + " must be >= 0");
}

double clamp01(double p) { return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p); }

} // namespace

void SourceConfig::validate() const {
    if (!(rep_rate > 0.0)) throw std::invalid_argument("SourceConfig: rep_rate must be > 0");
    if (!(dwell_time > 0.0)) throw std::invalid_argument("SourceConfig: dwell_time must be > 0");
    if (!(rep_rate * dwell_time >= 1.0))
        throw std::invalid_argument("SourceConfig: rep_rate * dwell_time must be >= 1");
    if (!(det1_efficiency >= 0.0 && det1_efficiency <= 1.0))
        throw std::invalid_argument("SourceConfig: det1_efficiency must be in [0,1]");
    if (!(det2_efficiency >= 0.0 && det2_efficiency <= 1.0))
        throw std::invalid_argument("SourceConfig: det2_efficiency must be in [0,1]");
    check_rate(dark_rate_1, "dark_rate_1");
    check_rate(dark_rate_2, "dark_rate_2");
    check_rate(accidental_floor, "accidental_floor");
    if (dark_rate_1 > rep_rate || dark_rate_2 > rep_rate || accidental_floor > rep_rate)
        throw std::invalid_argument("SourceConfig: per-pulse rate exceeds the rep rate");
    switch_params.validate();
}

void ScanSpec::validate() const {
    if (!(delay_step_um > 0.0)) throw std::invalid_argument("ScanSpec: delay_step_um must be > 0");
    if (!(wavelength_um > 0.0)) throw std::invalid_argument("ScanSpec: wavelength_um must be > 0");
    if (n_steps < 2) throw std::invalid_argument("ScanSpec: n_steps must be >= 2");
    // Fitting needs a few full fringes.
    if (delay_step_um * (n_steps - 1) < 3.0 * wavelength_um)
        throw std::invalid_argument("ScanSpec: scan must span at least 3 fringe periods");
}

PulseProbabilities per_pulse_probabilities(const SourceConfig& config, double phi_ref) {
    const SwitchParams& sw = config.switch_params;
    sw.validate();
    double eta1 = config.det1_efficiency;
    double eta2 = config.det2_efficiency;

    double p_d2 = eta2 * std::norm(sw.beta);
    double p_d1 = eta1 * det1_singles_probability(sw.alpha, sw, phi_ref);
    // Detector-1 click probability conditioned on a control click. It must
    // itself be a probability; a value beyond 1 means the conditional
    // amplitude left the lowest-order region (tiny beta against a sizable
    // pair amplitude), not a statistics problem.
    double cond_click =
        p_d2 > 0.0
            ? eta1 * det1_singles_probability(conditional_amplitude(sw), sw, phi_ref)
            : 0.0;
    for (double p : {p_d1, p_d2, cond_click})
        if (p > 1.0 + 1e-3)
            throw ModelValidityError(
                "per_pulse_probabilities: probability " + std::to_string(p) +
                " exceeds 1; amplitudes are outside the lowest-order region");
    p_d1 = clamp01(p_d1);
    p_d2 = clamp01(p_d2);
    cond_click = clamp01(cond_click);

    // Chain rule on the control click: a proper joint distribution for any
    // amplitudes, whose detector-1 marginal picks up the (tiny) conditional
    // contribution just as the full photon-number treatment does.
    double j11 = p_d2 * cond_click;
    double j01 = p_d2 * (1.0 - cond_click);
    double j10 = (1.0 - p_d2) * p_d1;
    double j00 = (1.0 - p_d2) * (1.0 - p_d1);

    // Correlated floor: when it fires, both detectors click.
    double floor = config.accidental_floor / config.rep_rate;
    if (floor > 0.0) {
        j11 = j11 + floor * (1.0 - j11);
        j10 *= 1.0 - floor;
        j01 *= 1.0 - floor;
        j00 *= 1.0 - floor;
    }

    // Independent dark events per detector.
    double d1 = config.dark_rate_1 / config.rep_rate;
    double d2 = config.dark_rate_2 / config.rep_rate;
    PulseProbabilities out{};
    out.p_both = j11 + j10 * d2 + j01 * d1 + j00 * d1 * d2;
    out.p_d1_only = j10 * (1.0 - d2) + j00 * d1 * (1.0 - d2);
    out.p_d2_only = j01 * (1.0 - d1) + j00 * (1.0 - d1) * d2;
    out.p_none = j00 * (1.0 - d1) * (1.0 - d2);
    out.p_d1 = out.p_both + out.p_d1_only;
    out.p_d2 = out.p_both + out.p_d2_only;
    return out;
}

std::vector<ScanRecord> simulate_scan(const SourceConfig& config, const ScanSpec& spec) {
    config.validate();
    spec.validate();
    auto n_pulses = static_cast<std::int64_t>(std::llround(config.rep_rate * config.dwell_time));
    std::vector<ScanRecord> records;
    records.reserve(static_cast<std::size_t>(spec.n_steps));
    for (int step = 0; step < spec.n_steps; ++step) {
        PulseProbabilities p = per_pulse_probabilities(config, spec.phi_ref_at(step));
        Rng rng(config.rng_seed, static_cast<std::uint64_t>(step));
        auto counts = rng.multinomial4(n_pulses, {p.p_both, p.p_d1_only, p.p_d2_only, p.p_none});
        ScanRecord rec{};
        rec.delay_um = spec.delay_at(step);
        rec.phi_ref_rad = spec.phi_ref_at(step);
        rec.n_pulses = n_pulses;
        rec.coincidences = counts[0];
        rec.singles_1 = counts[0] + counts[1];
        rec.singles_2 = counts[0] + counts[2];
        records.push_back(rec);
    }
    return records;
}

SwitchParams calibrate_from_rates(const MeasuredRates& rates, double rep_rate,
                                  double det1_efficiency, double det2_efficiency,
                                  double bs2_transmissivity, double theta_p) {
    if (!(rep_rate > 0.0)) throw std::invalid_argument("calibrate_from_rates: rep_rate must be > 0");
    if (!(det1_efficiency > 0.0 && det1_efficiency <= 1.0) ||
        !(det2_efficiency > 0.0 && det2_efficiency <= 1.0))
        throw std::invalid_argument("calibrate_from_rates: efficiencies must be in (0,1]");
    if (!(bs2_transmissivity > 0.0 && bs2_transmissivity < 1.0))
        throw std::invalid_argument(
            "calibrate_from_rates: transmissivity must be in (0,1) to split the two paths");
    check_rate(rates.singles_1_signal, "singles_1_signal");
    check_rate(rates.singles_1_reference, "singles_1_reference");
    check_rate(rates.singles_2, "singles_2");
    check_rate(rates.dc_coinc, "dc_coinc");
    if (!(rates.accidental_coinc > 0.0))
        throw std::invalid_argument("calibrate_from_rates: accidental_coinc must be > 0");

    double alpha_sq = rates.singles_1_signal / (rep_rate * det1_efficiency * bs2_transmissivity);
    double beta_sq = rates.singles_2 / (rep_rate * det2_efficiency);
    double ref_sq =
        rates.singles_1_reference / (rep_rate * det1_efficiency * (1.0 - bs2_transmissivity));
    for (double p : {alpha_sq, beta_sq, ref_sq})
        if (p > 1.0)
            throw ModelValidityError(
                "calibrate_from_rates: rates imply a per-pulse probability above 1");

    SwitchParams params{};
    params.alpha = std::sqrt(alpha_sq);
    params.beta = std::sqrt(beta_sq);
    params.ref_amp = std::sqrt(ref_sq);
    params.a_dc = std::abs(params.alpha * params.beta) *
                  std::sqrt(rates.dc_coinc / rates.accidental_coinc) * std::polar(1.0, theta_p);
    params.bs2_transmissivity = bs2_transmissivity;
    params.validate();
    return params;
}

} // namespace switchsim
