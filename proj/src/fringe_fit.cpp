#include "switchsim/fringe_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "switchsim/errors.hpp"

namespace switchsim {

namespace {

struct LinearSolution {
    double a = 0.0;   // offset
    double p = 0.0;   // B cos phi
    double q = 0.0;   // B sin phi
    double chi2 = std::numeric_limits<double>::infinity();
    Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
    bool ok = false;
};

// Invert a normal matrix after Jacobi equilibration: the columns carry mixed
// units (counts, trig, counts * delay), so rank decisions on the raw matrix
// are scale artifacts. Returns false only if the scaled matrix is singular.
template <int N>
bool invert_normal(const Eigen::Matrix<double, N, N>& m, Eigen::Matrix<double, N, N>& inv) {
    Eigen::Matrix<double, N, 1> scale;
    for (int i = 0; i < N; ++i) scale[i] = m(i, i) > 0.0 ? 1.0 / std::sqrt(m(i, i)) : 1.0;
    Eigen::Matrix<double, N, N> ms = scale.asDiagonal() * m * scale.asDiagonal();
    Eigen::FullPivLU<Eigen::Matrix<double, N, N>> lu(ms);
    if (!lu.isInvertible()) return false;
    inv = scale.asDiagonal() * lu.inverse() * scale.asDiagonal();
    return true;
}

// Model written as a + p cos(x) - q sin(x) with x = 2 pi delay * freq:
// linear in (a, p, q) at fixed frequency.
LinearSolution solve_at_frequency(std::span<const double> delays,
                                  std::span<const double> counts,
                                  std::span<const double> weights, double freq) {
    LinearSolution sol;
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < delays.size(); ++i) {
        double x = two_pi * delays[i] * freq;
        Eigen::Vector3d basis(1.0, std::cos(x), -std::sin(x));
        m.noalias() += weights[i] * basis * basis.transpose();
        rhs.noalias() += weights[i] * counts[i] * basis;
    }
    Eigen::Matrix3d inv;
    if (!invert_normal<3>(m, inv)) return sol;
    Eigen::Vector3d coef = inv * rhs;
    sol.a = coef[0];
    sol.p = coef[1];
    sol.q = coef[2];
    sol.normal = m;
    sol.chi2 = 0.0;
    for (std::size_t i = 0; i < delays.size(); ++i) {
        double x = two_pi * delays[i] * freq;
        double r = counts[i] - (sol.a + sol.p * std::cos(x) - sol.q * std::sin(x));
        sol.chi2 += weights[i] * r * r;
    }
    sol.ok = true;
    return sol;
}

double chi2_at(std::span<const double> delays, std::span<const double> counts,
               std::span<const double> weights, double freq) {
    return solve_at_frequency(delays, counts, weights, freq).chi2;
}

// Golden-section minimum of chi2(freq) on [lo, hi].
double refine_frequency(std::span<const double> delays, std::span<const double> counts,
                        std::span<const double> weights, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = chi2_at(delays, counts, weights, x1);
    double f2 = chi2_at(delays, counts, weights, x2);
    while (hi - lo > 1e-6 * lo) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = chi2_at(delays, counts, weights, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = chi2_at(delays, counts, weights, x2);
        }
    }
    return 0.5 * (lo + hi);
}

// Propagate an (a, p, q[, f]) covariance into (offset, amplitude, phase
// [, period]) via the delta method. Rows of `jac` are d(out)/d(in).
Eigen::MatrixXd transform_covariance(const Eigen::MatrixXd& cov_in, double p, double q,
                                     double b, std::optional<double> freq) {
    Eigen::Index n = cov_in.rows();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    jac(0, 0) = 1.0;
    if (b > 0.0) {
        jac(1, 1) = p / b;
        jac(1, 2) = q / b;
        jac(2, 1) = -q / (b * b);
        jac(2, 2) = p / (b * b);
    } else {
        // Amplitude exactly zero: direction undefined; keep a conservative
        // identity block so the amplitude variance survives.
        jac(1, 1) = 1.0;
        jac(2, 2) = 1.0;
    }
    if (freq) jac(3, 3) = -1.0 / (*freq * *freq);   // dL/df for L = 1/f
    return jac * cov_in * jac.transpose();
}

void validate_series(std::span<const double> delays, std::span<const double> counts,
                     double required_span) {
    if (delays.size() != counts.size())
        throw std::invalid_argument("fit_fringe: delay/count size mismatch");
    if (delays.size() < 5) throw std::invalid_argument("fit_fringe: need at least 5 points");
    for (double c : counts)
        if (!(c >= 0.0)) throw std::invalid_argument("fit_fringe: counts must be >= 0");
    auto [lo, hi] = std::minmax_element(delays.begin(), delays.end());
    if (*hi - *lo < required_span)
        throw std::invalid_argument("fit_fringe: delays must span at least one period");
}

FitResult finalize(double a, double p, double q, double freq, bool period_fixed,
                   const Eigen::MatrixXd& cov_apqf, double chi2, int dof) {
    double b = std::hypot(p, q);
    double phase = b > 0.0 ? wrap_phase(std::atan2(q, p)) : 0.0;
    Eigen::MatrixXd cov = transform_covariance(
        cov_apqf, p, q, b, period_fixed ? std::nullopt : std::optional<double>(freq));

    FitResult res;
    res.model = {a, b, phase, 1.0 / freq};
    res.chi2 = chi2;
    res.dof = dof;
    res.period_fixed = period_fixed;
    double sigma_b = std::sqrt(std::max(cov(1, 1), 0.0));
    res.low_visibility = !(b > sigma_b);
    if (res.low_visibility) cov(2, 2) = pi * pi;   // phase unconstrained by the data
    res.covariance = cov;
    return res;
}

} // namespace

double FringeModel::value(double delay) const {
    return offset + amplitude * std::cos(two_pi * delay / period + phase);
}

double FitResult::offset_sigma() const { return std::sqrt(std::max(covariance(0, 0), 0.0)); }
double FitResult::amplitude_sigma() const { return std::sqrt(std::max(covariance(1, 1), 0.0)); }
double FitResult::phase_sigma() const { return std::sqrt(std::max(covariance(2, 2), 0.0)); }

double FitResult::period_sigma() const {
    if (period_fixed) throw std::logic_error("period_sigma: period was fixed");
    return std::sqrt(std::max(covariance(3, 3), 0.0));
}

FitResult fit_fringe(std::span<const double> delays, std::span<const double> counts,
                     std::optional<double> fixed_period, double period_hint) {
    std::vector<double> weights(delays.size());
    if (fixed_period) {
        if (!(*fixed_period > 0.0))
            throw std::invalid_argument("fit_fringe: fixed period must be > 0");
        validate_series(delays, counts, *fixed_period);
    } else {
        if (!(period_hint > 0.0))
            throw std::invalid_argument("fit_fringe: period_hint required for a free-period fit");
        validate_series(delays, counts, period_hint);
    }
    for (std::size_t i = 0; i < counts.size(); ++i) weights[i] = 1.0 / std::max(counts[i], 1.0);

    if (fixed_period) {
        double freq = 1.0 / *fixed_period;
        LinearSolution sol = solve_at_frequency(delays, counts, weights, freq);
        if (!sol.ok) throw FitError("fit_fringe: degenerate design matrix");
        Eigen::Matrix3d inv;
        if (!invert_normal<3>(sol.normal, inv))
            throw FitError("fit_fringe: degenerate design matrix");
        return finalize(sol.a, sol.p, sol.q, freq, true, Eigen::MatrixXd(inv), sol.chi2,
                        static_cast<int>(delays.size()) - 3);
    }

    // Outer search over frequency: uniform grid over [0.5, 2] / hint, one
    // linear solve per point, then golden-section refinement of the best cell.
    double f_lo = 0.5 / period_hint;
    double f_hi = 2.0 / period_hint;
    constexpr int n_grid = 512;
    double best_f = 0.0;
    double best_chi2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_grid; ++k) {
        double f = f_lo + (f_hi - f_lo) * (double(k) + 0.5) / n_grid;
        double c = chi2_at(delays, counts, weights, f);
        if (c < best_chi2) {
            best_chi2 = c;
            best_f = f;
        }
    }
    if (!std::isfinite(best_chi2)) throw FitError("fit_fringe: degenerate design matrix");
    double cell = (f_hi - f_lo) / n_grid;
    double freq = refine_frequency(delays, counts, weights,
                                   std::max(f_lo, best_f - cell), std::min(f_hi, best_f + cell));
    LinearSolution sol = solve_at_frequency(delays, counts, weights, freq);
    if (!sol.ok) throw FitError("fit_fringe: degenerate design matrix");

    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    for (std::size_t i = 0; i < delays.size(); ++i) {
        double x = two_pi * delays[i] * freq;
        double dmodel_df = -two_pi * delays[i] * (sol.p * std::sin(x) + sol.q * std::cos(x));
        Eigen::Vector4d basis(1.0, std::cos(x), -std::sin(x), dmodel_df);
        m.noalias() += weights[i] * basis * basis.transpose();
    }
    Eigen::Matrix4d inv;
    if (!invert_normal<4>(m, inv)) throw FitError("fit_fringe: degenerate design matrix");
    return finalize(sol.a, sol.p, sol.q, freq, false, Eigen::MatrixXd(inv), sol.chi2,
                    static_cast<int>(delays.size()) - 4);
}

PhaseDifference phase_difference(const FitResult& singles_fit, const FitResult& coinc_fit) {
    if (!coinc_fit.period_fixed)
        throw PeriodMismatchError(
            "phase_difference: the coincidence fit must use a fixed period");
    double ls = singles_fit.model.period;
    double lc = coinc_fit.model.period;
    if (std::abs(lc - ls) > 1e-9 * ls)
        throw PeriodMismatchError(
            "phase_difference: coincidence period was not tied to the singles period");
    double delta = wrap_phase(coinc_fit.model.phase - singles_fit.model.phase);
    double sigma = std::hypot(singles_fit.phase_sigma(), coinc_fit.phase_sigma());
    return {delta, sigma};
}

std::vector<SweepPoint> sweep_analysis(const std::vector<SweepScan>& scans) {
    std::vector<SweepPoint> points;
    points.reserve(scans.size());
    for (const SweepScan& scan : scans) {
        SweepPoint pt{};
        pt.theta_p_deg = scan.theta_p_deg;
        try {
            const auto& recs = scan.records;
            if (recs.size() < 5) throw FitError("sweep_analysis: too few scan records");
            std::vector<double> delays, singles, coinc;
            delays.reserve(recs.size());
            for (const ScanRecord& r : recs) {
                delays.push_back(r.delay_um);
                singles.push_back(double(r.singles_1));
                coinc.push_back(double(r.coincidences));
            }
            double phi_span = recs.back().phi_ref_rad - recs.front().phi_ref_rad;
            if (!(std::abs(phi_span) > 0.0))
                throw FitError("sweep_analysis: reference phase does not move across the scan");
            double hint = two_pi * (recs.back().delay_um - recs.front().delay_um) / phi_span;

            FitResult singles_fit = fit_fringe(delays, singles, std::nullopt, hint);
            FitResult coinc_fit =
                fit_fringe(delays, coinc, singles_fit.model.period, 0.0);
            PhaseDifference diff = phase_difference(singles_fit, coinc_fit);

            // Lag convention: positive when the coincidence fringe trails the
            // singles fringe, matching the model's conditional phase shift.
            pt.delta_phi_deg = rad_to_deg(wrap_phase(-diff.delta_phi));
            pt.sigma_deg = rad_to_deg(diff.sigma);
            pt.chi2 = coinc_fit.chi2;
            pt.dof = coinc_fit.dof;
            if (singles_fit.low_visibility) pt.flags.push_back("low_visibility_singles");
            if (coinc_fit.low_visibility) pt.flags.push_back("low_visibility_coincidence");
        } catch (const std::exception& e) {
            pt.delta_phi_deg = 0.0;
            pt.sigma_deg = 0.0;
            pt.chi2 = 0.0;
            pt.dof = 0;
            pt.flags.push_back(std::string("fit_error: ") + e.what());
        }
        points.push_back(std::move(pt));
    }
    return points;
}

} // namespace switchsim
