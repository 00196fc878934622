#pragma once

#include <vector>

#include "switchsim/angles.hpp"

namespace switchsim {

/// Inputs of the closed-form lowest-order switch model.
///
/// Phase convention: alpha and beta are taken real positive by calibration;
/// all pump-phase dependence lives in arg(a_dc). The pump phase is
/// theta_p = arg(a_dc * conj(alpha*beta)).
struct SwitchParams {
    cdouble alpha;               // signal coherent amplitude
    cdouble beta;                // control coherent amplitude
    cdouble a_dc;                // down-conversion pair amplitude
    cdouble ref_amp;             // phase-reference coherent amplitude at the recombiner
    double bs2_transmissivity = 0.9;

    /// Model validity guard: every amplitude magnitude at most 0.5, the
    /// transmissivity in [0,1]. Throws ModelValidityError naming the field.
    void validate() const;

    /// r = |a_dc / (alpha*beta)|; 0 when a_dc = 0, infinity when only the
    /// product alpha*beta vanishes.
    double r() const;
    double theta_p() const;
};

/// The four photon-number-basis amplitudes over |00>,|10>,|01>,|11>,
/// constructed unnormalized; normalization is deferred to consumers.
struct PairAmplitudes {
    cdouble c00, c10, c01, c11;
};

/// Two-photon polarization state eps(a|HH> + b|HV> + c|VH> + d|VV>).
struct PolarizationPairState {
    cdouble eps;
    cdouble a, b, c, d;

    /// Rescale (a,b,c,d) to unit norm on the coincidence subspace.
    PolarizationPairState normalized() const;
};

enum class Regime { small, boundary, large };

struct RegimeReport {
    double r;
    Regime regime;
};

RegimeReport classify_regime(const SwitchParams& params);

/// (1, alpha, beta, alpha*beta + a_dc).
PairAmplitudes evolved_amplitudes(const SwitchParams& params);

/// alpha + a_dc/beta: the mode-1 amplitude conditioned on a control-photon
/// detection. Throws UndefinedConditionalError when beta = 0.
cdouble conditional_amplitude(const SwitchParams& params);

/// arg(1 + r e^{i theta_p}) in (-pi, pi]: the phase of the conditional
/// amplitude relative to the unconditional one (alpha real positive).
/// Throws UndefinedPhaseError where the amplitude vanishes (r=1, theta_p=pi).
double conditional_phase_shift(double r, double theta_p);

/// |1 + r e^{i theta_p}|^2: pair-production modulation, normalized to the
/// accidental rate.
double pair_rate_modulation(double r, double theta_p);

struct TheoryPoint {
    double theta_p;
    double phase_shift;
    bool defined;   // false where the conditional amplitude vanishes
};

/// Pointwise conditional_phase_shift over a grid; undefined points are
/// flagged, never interpolated.
std::vector<TheoryPoint> theory_curve(double r, const std::vector<double>& theta_p_grid);

/// Lowest-order click probability at detector 1 behind the recombining
/// splitter: |sqrt(T) mode1_amp + sqrt(1-T) ref_amp e^{i phi_ref}|^2.
double det1_singles_probability(cdouble mode1_amp, const SwitchParams& params, double phi_ref);

/// Apply the switch action on the polarization variant: only the VV
/// amplitude moves, d -> d + a_dc/eps, then the coincidence subspace is
/// renormalized. Throws UndefinedConditionalError when eps = 0.
PolarizationPairState polarization_switch(const PolarizationPairState& state, cdouble a_dc);

/// Concurrence 2|ad - bc| of the pure two-qubit coincidence-subspace state.
/// Amplitudes are normalized before evaluation.
double concurrence(const PolarizationPairState& state);

/// First-order contract of the conditional-phase gate: only the |11>
/// amplitude's phase moves.
struct ContractCheckReport {
    double residual_c10;   // |arg(c10/c00) - arg(alpha)|
    double residual_c01;   // |arg(c01/c00) - arg(beta)|
    double phase_shift;    // arg(c11/(alpha*beta))
    double phase_residual; // circular distance to conditional_phase_shift(r, theta_p)
    bool pass;
};

ContractCheckReport cphi_contract_check(const SwitchParams& params);

} // namespace switchsim
