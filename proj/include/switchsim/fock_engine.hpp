#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "switchsim/angles.hpp"

namespace switchsim {

/// Truncated multimode Fock basis. Basis states are enumerated with mode 0
/// as the fastest-varying digit:
///     index = sum_k n_k * (cutoff+1)^k,  0 <= n_k <= cutoff.
/// The enumeration is fixed and stable across runs.
struct FockBasis {
    int n_modes;
    int cutoff;

    FockBasis(int n_modes, int cutoff);

    std::size_t dimension() const;
    std::size_t index(const std::vector<int>& occupations) const;
    std::vector<int> occupations(std::size_t index) const;
    /// True if any mode of this basis state sits at the cutoff boundary.
    bool touches_cutoff(std::size_t index) const;

    bool operator==(const FockBasis&) const = default;
};

/// Immutable state over a FockBasis. Operations return new values.
struct StateVector {
    FockBasis basis;
    Eigen::VectorXcd amplitudes;

    double squared_norm() const;
    StateVector normalized() const;
    /// Probability carried by basis states with any mode at the cutoff.
    /// Sentinel for amplitude that would have escaped the truncated space;
    /// always reported to callers, never silently dropped.
    double truncation_leakage() const;
};

struct ModeOperator {
    FockBasis basis;
    Eigen::MatrixXcd matrix;
    bool unitary;

    StateVector apply(const StateVector& state) const;
};

/// Matrix of the annihilation operator for one mode on the truncated basis.
Eigen::MatrixXcd annihilation_matrix(const FockBasis& basis, int mode);

/// Coherent amplitude `amp` in one mode, vacuum elsewhere, renormalized
/// after truncation. Warns on stderr if the truncation leakage exceeds 1e-6.
StateVector coherent_state(int mode, cdouble amp, const FockBasis& basis);

/// Product of single-mode coherent states, one amplitude per mode,
/// renormalized after truncation. Same leakage warning as coherent_state.
StateVector product_coherent_state(const std::vector<cdouble>& amps, const FockBasis& basis);

/// Two-mode mixer exp(theta(e^{i phase} a†b − e^{−i phase} ab†)) with
/// theta = arccos(sqrt(transmissivity)). Acting on a single photon in
/// mode_a, the photon stays with probability `transmissivity`. The truncated
/// generator is exactly skew-Hermitian, so the operator is exactly unitary;
/// its action is physically faithful only off the cutoff boundary.
ModeOperator beamsplitter(const FockBasis& basis, int mode_a, int mode_b,
                          double transmissivity, double phase);

/// Two-mode squeeze exp(kappa a₁†a₂† − kappa* a₁a₂) applied to `state`.
/// The pump is a classical amplitude absorbed into kappa. Throws
/// TruncationError if the output truncation leakage exceeds leakage_bound.
StateVector spdc_evolve(const StateVector& state, int mode_1, int mode_2,
                        cdouble kappa, double leakage_bound = 1e-5);

/// Multiply each basis amplitude by e^{i n theta}, n the photon number in
/// `mode`.
StateVector phase_shift(const StateVector& state, int mode, double theta);

/// Joint outcome distribution of two threshold (non-number-resolving)
/// detectors. A detector clicks if at least one photon in its mode set
/// survives binomial thinning at its efficiency.
struct JointClickDistribution {
    double p_none;
    double p_d1_only;
    double p_d2_only;
    double p_both;
};

JointClickDistribution click_probabilities(const StateVector& state,
                                           const std::vector<int>& det1_modes,
                                           const std::vector<int>& det2_modes,
                                           double det1_efficiency,
                                           double det2_efficiency);

struct ProjectionResult {
    StateVector state;
    double probability;
};

/// Condition on a threshold detector clicking (or not) on `detector_modes`.
/// Post-measurement amplitudes follow the square root of the diagonal
/// POVM element; the returned state is renormalized. Throws
/// ZeroProbabilityError when the requested outcome has no support.
ProjectionResult project_on_click(const StateVector& state,
                                  const std::vector<int>& detector_modes,
                                  double efficiency, bool clicked);

/// Expectation of the total photon number.
double mean_total_photons(const StateVector& state);

} // namespace switchsim
