#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchsim/descriptor.hpp"
#include "switchsim/fringe_fit.hpp"

namespace switchsim {

struct RunResult {
    int exit_code = 0;                 // 0: all outputs produced and unflagged
    std::vector<std::string> files;    // paths written
    std::vector<std::string> flags;    // human-readable problem notes
};

/// One reference-delay scan at the descriptor's pump phase, plus singles and
/// coincidence fits, their phase lag, and densely sampled fitted curves.
/// Requires the large regime (rate ratio > 1); throws DescriptorError
/// otherwise.
RunResult run_fig3(const ExperimentDescriptor& desc);

/// Pump-phase sweep: per grid point simulate a scan, fit both fringes, and
/// extract the phase lag; overlay the closed-form theory curve computed only
/// from the descriptor's rate ratio. Points are simulated and analyzed by a
/// bounded worker pool; output is assembled in grid order, so files are
/// byte-identical for any worker count.
RunResult run_fig4(const ExperimentDescriptor& desc);

/// Machine-checkable validation: brute-force oracle agreement, regime
/// properties, the fringe-shift identity, and fit-uncertainty coverage.
RunResult run_validate(const ExperimentDescriptor& desc);

/// Emit the calibration derived from the descriptor's rates: raw amplitudes,
/// the singles harmonization factor, effective amplitudes, and the rates the
/// simulation will reproduce.
RunResult run_calibrate(const ExperimentDescriptor& desc);

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

/// Exactly evolved states vs the lowest-order amplitudes on a 27-point grid
/// of amplitude magnitudes {0.02, 0.05, 0.1} with seeded random phases:
/// amplitude agreement after global-phase alignment (bound 10 max^3) and
/// conditional-projection phase agreement (bound 10 max^2).
std::vector<CheckResult> oracle_equivalence_checks(int cutoff, std::uint64_t seed);

/// Phase-shift law properties: the small-regime bound |shift| <= arcsin(r)
/// with equality at cos(theta) = -r, strict monotonicity of the unwrapped
/// shift for r > 1, the extreme-regime limit |shift - theta| <= arcsin(1/r),
/// modulus/argument consistency, and the undefined point at r=1, theta=pi.
std::vector<CheckResult> regime_property_checks(std::uint64_t seed);

/// The conditional fringe equals the unconditional fringe displaced by the
/// conditional phase shift (amplitudes rescaled; phases compared exactly).
CheckResult fringe_shift_identity_check(std::uint64_t seed);

/// Poisson-resampled fringes at roughly 208 expected counts per bin: the
/// true phase must land inside the reported 1 sigma in 60-76% of runs.
CheckResult fit_coverage_check(int n_seeds, std::uint64_t seed);

} // namespace switchsim
