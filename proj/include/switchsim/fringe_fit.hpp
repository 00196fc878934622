#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "switchsim/detection_sim.hpp"

namespace switchsim {

/// Cosine fringe A + B cos(2 pi delay / L + phi).
struct FringeModel {
    double offset;      // A
    double amplitude;   // B >= 0
    double phase;       // phi in (-pi, pi]
    double period;      // L > 0, delay units

    double value(double delay) const;
};

/// Parameter order in `covariance`: (offset, amplitude, phase) for a
/// fixed-period fit, (offset, amplitude, phase, period) otherwise.
struct FitResult {
    FringeModel model;
    Eigen::MatrixXd covariance;
    double chi2;
    int dof;
    bool period_fixed;
    bool low_visibility;   // amplitude consistent with 0 at 1 sigma

    double offset_sigma() const;
    double amplitude_sigma() const;
    double phase_sigma() const;
    double period_sigma() const;   // throws if the period was fixed
};

/// Weighted least-squares cosine fit with Poisson weights 1/max(count, 1).
///
/// With `fixed_period` set, the problem is linear in (A, B cos phi, B sin phi)
/// and solved in closed form. Otherwise the period is searched over
/// [0.5, 2.0] * period_hint (grid in frequency, then golden-section refined
/// to relative 1e-6) with the linear solve inside.
///
/// A fit whose amplitude is consistent with zero at 1 sigma is flagged
/// low_visibility; its phase is still reported, with the phase uncertainty
/// inflated to pi. Throws FitError on a degenerate design matrix.
FitResult fit_fringe(std::span<const double> delays, std::span<const double> counts,
                     std::optional<double> fixed_period, double period_hint = 0.0);

struct PhaseDifference {
    double delta_phi;   // radians, (-pi, pi]
    double sigma;       // quadrature sum of the two phase uncertainties
};

/// delta_phi = wrap(phi_coinc - phi_singles). The coincidence fit must have
/// been run with its period fixed to the singles period; anything else
/// throws PeriodMismatchError.
PhaseDifference phase_difference(const FitResult& singles_fit, const FitResult& coinc_fit);

struct SweepScan {
    double theta_p_deg;
    std::vector<ScanRecord> records;
};

struct SweepPoint {
    double theta_p_deg;
    double delta_phi_deg;   // lag of the coincidence fringe behind the singles fringe
    double sigma_deg;
    double chi2;            // of the coincidence fit
    int dof;
    std::vector<std::string> flags;   // empty on success

    bool ok() const { return flags.empty(); }
};

/// Per scan: fit the singles fringe with a free period (hint recovered from
/// the recorded reference phases), fit the coincidence fringe with the
/// period fixed to the singles result, and report the phase lag.
///
/// Sign convention: the reported delta_phi is positive when the coincidence
/// fringe lags the singles fringe, i.e. peaks at larger delay. Under this
/// convention the reported value equals the model's conditional phase shift;
/// the raw fitted difference phi_coinc - phi_singles is its negative.
/// Values stay wrapped to (-180, 180]; nothing is unwrapped.
///
/// Per-scan failures are returned as flagged points; the sweep never aborts.
std::vector<SweepPoint> sweep_analysis(const std::vector<SweepScan>& scans);

} // namespace switchsim
