#pragma once

#include <cstdint>
#include <vector>

#include "switchsim/switch_model.hpp"

namespace switchsim {

struct SourceConfig {
    double rep_rate = 8.0e7;      // pulses per second
    double dwell_time = 1.0;      // seconds per delay step
    SwitchParams switch_params{};
    double det1_efficiency = 1.0;
    double det2_efficiency = 1.0;
    double dark_rate_1 = 0.0;     // counts per second
    double dark_rate_2 = 0.0;
    double accidental_floor = 0.0; // extra correlated coincidences per second
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct ScanSpec {
    double delay_start_um = 0.0;
    double delay_step_um = 0.04;
    int n_steps = 81;
    double wavelength_um = 0.810;

    void validate() const;
    double delay_at(int step) const { return delay_start_um + delay_step_um * step; }
    double phi_ref_at(int step) const { return two_pi * delay_at(step) / wavelength_um; }
};

struct ScanRecord {
    double delay_um;
    double phi_ref_rad;
    std::int64_t n_pulses;
    std::int64_t singles_1;
    std::int64_t singles_2;
    std::int64_t coincidences;
};

/// Per-pulse joint click distribution at one reference phase.
/// p_d2 comes from the control branch, p_d1 from the unconditional mode-1
/// fringe, p_both from the control branch times the fringe evaluated at the
/// conditional amplitude; efficiencies thin each branch, dark counts enter
/// as independent per-pulse events, the accidental floor as a correlated one.
struct PulseProbabilities {
    double p_none;
    double p_d1_only;
    double p_d2_only;
    double p_both;
    double p_d1;   // marginal, darks included
    double p_d2;
};

PulseProbabilities per_pulse_probabilities(const SourceConfig& config, double phi_ref);

/// One record per delay step, counts drawn from a per-pulse multinomial over
/// the four joint outcomes with n_pulses = round(rep_rate * dwell_time).
/// Each step owns an independent RNG stream derived from (rng_seed, step),
/// so output is deterministic and steps may be evaluated in any order.
std::vector<ScanRecord> simulate_scan(const SourceConfig& config, const ScanSpec& spec);

/// Count rates measured with interference disabled, in counts per second.
struct MeasuredRates {
    double singles_1_signal;     // detector 1, signal path alone
    double singles_1_reference;  // detector 1, reference path alone
    double singles_2;            // detector 2, control beam
    double accidental_coinc;     // signal x control coincidences
    double dc_coinc;             // down-conversion pair coincidences
};

/// Solve the model amplitudes from measured rates:
///   |alpha|^2 = s1_signal/(rep * eta1 * T),  |beta|^2 = s2/(rep * eta2),
///   |ref|^2 = s1_reference/(rep * eta1 * (1-T)),
///   |a_dc| = |alpha*beta| * sqrt(dc/accidental).
/// alpha, beta, ref_amp come out real positive; arg(a_dc) = theta_p.
SwitchParams calibrate_from_rates(const MeasuredRates& rates, double rep_rate,
                                  double det1_efficiency, double det2_efficiency,
                                  double bs2_transmissivity, double theta_p);

} // namespace switchsim
