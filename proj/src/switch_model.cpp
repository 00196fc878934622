#include "switchsim/switch_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "switchsim/errors.hpp"

namespace switchsim {

namespace {

void check_magnitude(cdouble v, const char* field) {
    if (!(std::abs(v) <= 0.5))
        throw ModelValidityError(std::string("SwitchParams: |") + field +
                                 "| exceeds 0.5, outside the lowest-order validity region");
}

} // namespace

void SwitchParams::validate() const {
    check_magnitude(alpha, "alpha");
    check_magnitude(beta, "beta");
    check_magnitude(a_dc, "a_dc");
    check_magnitude(ref_amp, "ref_amp");
    if (!(bs2_transmissivity >= 0.0 && bs2_transmissivity <= 1.0))
        throw std::invalid_argument("SwitchParams: bs2_transmissivity must be in [0,1]");
}

double SwitchParams::r() const {
    double num = std::abs(a_dc);
    if (num == 0.0) return 0.0;
    double den = std::abs(alpha * beta);
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

double SwitchParams::theta_p() const { return std::arg(a_dc * std::conj(alpha * beta)); }

PolarizationPairState PolarizationPairState::normalized() const {
    double n = std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
    if (n <= 0.0)
        throw std::invalid_argument("PolarizationPairState: zero coincidence subspace");
    return {eps, a / n, b / n, c / n, d / n};
}

RegimeReport classify_regime(const SwitchParams& params) {
    double r = params.r();
    Regime regime = r < 1.0 ? Regime::small : (r > 1.0 ? Regime::large : Regime::boundary);
    return {r, regime};
}

PairAmplitudes evolved_amplitudes(const SwitchParams& params) {
    params.validate();
    return {1.0, params.alpha, params.beta, params.alpha * params.beta + params.a_dc};
}

cdouble conditional_amplitude(const SwitchParams& params) {
    if (params.beta == cdouble{0.0, 0.0})
        throw UndefinedConditionalError(
            "conditional_amplitude: beta = 0, nothing to condition on");
    return params.alpha + params.a_dc / params.beta;
}

double conditional_phase_shift(double r, double theta_p) {
    if (!(r >= 0.0)) throw std::invalid_argument("conditional_phase_shift: r must be >= 0");
    cdouble z = 1.0 + r * std::polar(1.0, theta_p);
    if (std::abs(z) < 1e-12)
        throw UndefinedPhaseError(
            "conditional_phase_shift: conditional amplitude vanishes at r=1, theta_p=pi");
    return std::arg(z);
}

double pair_rate_modulation(double r, double theta_p) {
    if (!(r >= 0.0)) throw std::invalid_argument("pair_rate_modulation: r must be >= 0");
    return std::norm(1.0 + r * std::polar(1.0, theta_p));
}

std::vector<TheoryPoint> theory_curve(double r, const std::vector<double>& theta_p_grid) {
    std::vector<TheoryPoint> curve;
    curve.reserve(theta_p_grid.size());
    for (double theta : theta_p_grid) {
        try {
            curve.push_back({theta, conditional_phase_shift(r, theta), true});
        } catch (const UndefinedPhaseError&) {
            curve.push_back({theta, 0.0, false});
        }
    }
    return curve;
}

double det1_singles_probability(cdouble mode1_amp, const SwitchParams& params, double phi_ref) {
    double t = params.bs2_transmissivity;
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("det1_singles_probability: transmissivity must be in [0,1]");
    return std::norm(std::sqrt(t) * mode1_amp +
                     std::sqrt(1.0 - t) * params.ref_amp * std::polar(1.0, phi_ref));
}

PolarizationPairState polarization_switch(const PolarizationPairState& state, cdouble a_dc) {
    if (state.eps == cdouble{0.0, 0.0})
        throw UndefinedConditionalError("polarization_switch: eps = 0");
    PolarizationPairState out = state;
    out.d = state.d + a_dc / state.eps;
    return out.normalized();
}

double concurrence(const PolarizationPairState& state) {
    PolarizationPairState s = state.normalized();
    return 2.0 * std::abs(s.a * s.d - s.b * s.c);
}

ContractCheckReport cphi_contract_check(const SwitchParams& params) {
    if (params.alpha * params.beta == cdouble{0.0, 0.0})
        throw std::invalid_argument("cphi_contract_check: alpha*beta = 0, ratio undefined");
    PairAmplitudes amps = evolved_amplitudes(params);
    ContractCheckReport report{};
    report.residual_c10 = std::abs(wrap_phase(std::arg(amps.c10 / amps.c00) - std::arg(params.alpha)));
    report.residual_c01 = std::abs(wrap_phase(std::arg(amps.c01 / amps.c00) - std::arg(params.beta)));
    report.phase_shift = std::arg(amps.c11 / (params.alpha * params.beta));
    double expected = conditional_phase_shift(params.r(), params.theta_p());
    report.phase_residual = std::abs(circular_difference(report.phase_shift, expected));
    report.pass = report.residual_c10 <= 1e-12 && report.residual_c01 <= 1e-12 &&
                  report.phase_residual <= 1e-9;
    return report;
}

} // namespace switchsim
