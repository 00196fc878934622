#include "switchsim/fock_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "switchsim/errors.hpp"

namespace switchsim {

namespace {

void check_mode(const FockBasis& basis, int mode, const char* who) {
    if (mode < 0 || mode >= basis.n_modes)
        throw std::out_of_range(std::string(who) + ": mode index " + std::to_string(mode) +
                                " out of range for " + std::to_string(basis.n_modes) + " modes");
}

void check_efficiency(double eta, const char* who) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument(std::string(who) + ": efficiency must be in [0,1]");
}

// Total photon count a detector sees in a basis state.
int photons_in_modes(const FockBasis& basis, std::size_t idx, const std::vector<int>& modes) {
    std::size_t rem = idx;
    std::size_t radix = static_cast<std::size_t>(basis.cutoff) + 1;
    int total = 0;
    for (int m = 0; m < basis.n_modes; ++m) {
        int n = static_cast<int>(rem % radix);
        rem /= radix;
        if (std::find(modes.begin(), modes.end(), m) != modes.end()) total += n;
    }
    return total;
}

} // namespace

FockBasis::FockBasis(int n_modes_, int cutoff_) : n_modes(n_modes_), cutoff(cutoff_) {
    if (n_modes < 1) throw std::invalid_argument("FockBasis: n_modes must be >= 1");
    if (cutoff < 1) throw std::invalid_argument("FockBasis: cutoff must be >= 1");
    std::size_t dim = 1;
    for (int m = 0; m < n_modes; ++m) {
        dim *= static_cast<std::size_t>(cutoff) + 1;
        if (dim > (std::size_t{1} << 24))
            throw std::invalid_argument("FockBasis: dimension exceeds 2^24");
    }
}

std::size_t FockBasis::dimension() const {
    std::size_t dim = 1;
    for (int m = 0; m < n_modes; ++m) dim *= static_cast<std::size_t>(cutoff) + 1;
    return dim;
}

std::size_t FockBasis::index(const std::vector<int>& occ) const {
    if (static_cast<int>(occ.size()) != n_modes)
        throw std::invalid_argument("FockBasis::index: wrong occupation count");
    std::size_t radix = static_cast<std::size_t>(cutoff) + 1;
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int m = 0; m < n_modes; ++m) {
        if (occ[m] < 0 || occ[m] > cutoff)
            throw std::out_of_range("FockBasis::index: occupation outside [0, cutoff]");
        idx += static_cast<std::size_t>(occ[m]) * stride;
        stride *= radix;
    }
    return idx;
}

std::vector<int> FockBasis::occupations(std::size_t idx) const {
    if (idx >= dimension()) throw std::out_of_range("FockBasis::occupations: index out of range");
    std::size_t radix = static_cast<std::size_t>(cutoff) + 1;
    std::vector<int> occ(static_cast<std::size_t>(n_modes));
    for (int m = 0; m < n_modes; ++m) {
        occ[static_cast<std::size_t>(m)] = static_cast<int>(idx % radix);
        idx /= radix;
    }
    return occ;
}

bool FockBasis::touches_cutoff(std::size_t idx) const {
    std::size_t radix = static_cast<std::size_t>(cutoff) + 1;
    for (int m = 0; m < n_modes; ++m) {
        if (static_cast<int>(idx % radix) == cutoff) return true;
        idx /= radix;
    }
    return false;
}

double StateVector::squared_norm() const { return amplitudes.squaredNorm(); }

StateVector StateVector::normalized() const {
    double n = std::sqrt(squared_norm());
    if (n <= 0.0) throw std::invalid_argument("StateVector::normalized: zero state");
    return {basis, amplitudes / n};
}

double StateVector::truncation_leakage() const {
    double leak = 0.0;
    for (Eigen::Index i = 0; i < amplitudes.size(); ++i)
        if (basis.touches_cutoff(static_cast<std::size_t>(i))) leak += std::norm(amplitudes[i]);
    return leak;
}

StateVector ModeOperator::apply(const StateVector& state) const {
    if (!(state.basis == basis)) throw std::invalid_argument("ModeOperator::apply: basis mismatch");
    return {basis, matrix * state.amplitudes};
}

Eigen::MatrixXcd annihilation_matrix(const FockBasis& basis, int mode) {
    check_mode(basis, mode, "annihilation_matrix");
    std::size_t dim = basis.dimension();
    std::size_t radix = static_cast<std::size_t>(basis.cutoff) + 1;
    std::size_t stride = 1;
    for (int m = 0; m < mode; ++m) stride *= radix;
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t idx = 0; idx < dim; ++idx) {
        int n = static_cast<int>((idx / stride) % radix);
        if (n >= 1)
            a(static_cast<Eigen::Index>(idx - stride), static_cast<Eigen::Index>(idx)) = std::sqrt(double(n));
    }
    return a;
}

StateVector coherent_state(int mode, cdouble amp, const FockBasis& basis) {
    check_mode(basis, mode, "coherent_state");
    std::size_t dim = basis.dimension();
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim));
    // Series c_n = amp^n / sqrt(n!); the e^{-|amp|^2/2} prefactor cancels in
    // the post-truncation normalization.
    std::vector<int> occ(static_cast<std::size_t>(basis.n_modes), 0);
    cdouble c = 1.0;
    for (int n = 0; n <= basis.cutoff; ++n) {
        occ[static_cast<std::size_t>(mode)] = n;
        v[static_cast<Eigen::Index>(basis.index(occ))] = c;
        c *= amp / std::sqrt(double(n + 1));
    }
    StateVector state = StateVector{basis, v}.normalized();
    double leak = state.truncation_leakage();
    if (leak > 1e-6)
        std::cerr << "coherent_state: truncation leakage " << leak << " exceeds 1e-6; |amp|^2="
                  << std::norm(amp) << " is large for cutoff " << basis.cutoff << "\n";
    return state;
}

StateVector product_coherent_state(const std::vector<cdouble>& amps, const FockBasis& basis) {
    if (amps.size() != static_cast<std::size_t>(basis.n_modes))
        throw std::invalid_argument("product_coherent_state: need one amplitude per mode");
    std::size_t dim = basis.dimension();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(dim));
    // Per-mode series c_n = amp^n / sqrt(n!); prefactors cancel in the
    // post-truncation normalization.
    std::vector<std::vector<cdouble>> coeff(amps.size());
    for (std::size_t m = 0; m < amps.size(); ++m) {
        coeff[m].resize(static_cast<std::size_t>(basis.cutoff) + 1);
        cdouble c = 1.0;
        for (int n = 0; n <= basis.cutoff; ++n) {
            coeff[m][static_cast<std::size_t>(n)] = c;
            c *= amps[m] / std::sqrt(double(n + 1));
        }
    }
    for (std::size_t idx = 0; idx < dim; ++idx) {
        std::vector<int> occ = basis.occupations(idx);
        cdouble c = 1.0;
        for (std::size_t m = 0; m < amps.size(); ++m)
            c *= coeff[m][static_cast<std::size_t>(occ[m])];
        v[static_cast<Eigen::Index>(idx)] = c;
    }
    StateVector state = StateVector{basis, v}.normalized();
    double leak = state.truncation_leakage();
    if (leak > 1e-6)
        std::cerr << "product_coherent_state: truncation leakage " << leak
                  << " exceeds 1e-6 for cutoff " << basis.cutoff << "\n";
    return state;
}

ModeOperator beamsplitter(const FockBasis& basis, int mode_a, int mode_b,
                          double transmissivity, double phase) {
    check_mode(basis, mode_a, "beamsplitter");
    check_mode(basis, mode_b, "beamsplitter");
    if (mode_a == mode_b) throw std::invalid_argument("beamsplitter: modes must differ");
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
        throw std::invalid_argument("beamsplitter: transmissivity must be in [0,1]");
    double theta = std::acos(std::sqrt(transmissivity));
    Eigen::MatrixXcd a = annihilation_matrix(basis, mode_a);
    Eigen::MatrixXcd b = annihilation_matrix(basis, mode_b);
    cdouble phase_factor = std::polar(1.0, phase);
    Eigen::MatrixXcd gen =
        theta * (phase_factor * a.adjoint() * b - std::conj(phase_factor) * a * b.adjoint());
    return {basis, gen.exp(), true};
}

StateVector spdc_evolve(const StateVector& state, int mode_1, int mode_2,
                        cdouble kappa, double leakage_bound) {
    const FockBasis& basis = state.basis;
    check_mode(basis, mode_1, "spdc_evolve");
    check_mode(basis, mode_2, "spdc_evolve");
    if (mode_1 == mode_2) throw std::invalid_argument("spdc_evolve: modes must differ");
    if (kappa == cdouble{0.0, 0.0}) return state;
    Eigen::MatrixXcd a1 = annihilation_matrix(basis, mode_1);
    Eigen::MatrixXcd a2 = annihilation_matrix(basis, mode_2);
    Eigen::MatrixXcd gen = kappa * a1.adjoint() * a2.adjoint() - std::conj(kappa) * a1 * a2;
    StateVector out{basis, gen.exp() * state.amplitudes};
    double leak = out.truncation_leakage();
    if (leak > leakage_bound) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "spdc_evolve: truncation leakage %.3g exceeds bound %.3g at cutoff %d; "
                      "raise the cutoff or reduce the amplitudes",
                      leak, leakage_bound, basis.cutoff);
        throw TruncationError(msg);
    }
    return out;
}

StateVector phase_shift(const StateVector& state, int mode, double theta) {
    const FockBasis& basis = state.basis;
    check_mode(basis, mode, "phase_shift");
    std::size_t radix = static_cast<std::size_t>(basis.cutoff) + 1;
    std::size_t stride = 1;
    for (int m = 0; m < mode; ++m) stride *= radix;
    Eigen::VectorXcd v = state.amplitudes;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        int n = static_cast<int>((static_cast<std::size_t>(i) / stride) % radix);
        v[i] *= std::polar(1.0, double(n) * theta);
    }
    return {basis, v};
}

JointClickDistribution click_probabilities(const StateVector& state,
                                           const std::vector<int>& det1_modes,
                                           const std::vector<int>& det2_modes,
                                           double det1_efficiency,
                                           double det2_efficiency) {
    const FockBasis& basis = state.basis;
    check_efficiency(det1_efficiency, "click_probabilities");
    check_efficiency(det2_efficiency, "click_probabilities");
    for (int m : det1_modes) {
        check_mode(basis, m, "click_probabilities");
        if (std::find(det2_modes.begin(), det2_modes.end(), m) != det2_modes.end())
            throw std::invalid_argument("click_probabilities: detectors share a mode");
    }
    for (int m : det2_modes) check_mode(basis, m, "click_probabilities");

    JointClickDistribution d{0.0, 0.0, 0.0, 0.0};
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        double p = std::norm(state.amplitudes[i]);
        if (p == 0.0) continue;
        int n1 = photons_in_modes(basis, static_cast<std::size_t>(i), det1_modes);
        int n2 = photons_in_modes(basis, static_cast<std::size_t>(i), det2_modes);
        double no1 = std::pow(1.0 - det1_efficiency, n1);
        double no2 = std::pow(1.0 - det2_efficiency, n2);
        d.p_none += p * no1 * no2;
        d.p_d1_only += p * (1.0 - no1) * no2;
        d.p_d2_only += p * no1 * (1.0 - no2);
        d.p_both += p * (1.0 - no1) * (1.0 - no2);
    }
    return d;
}

ProjectionResult project_on_click(const StateVector& state,
                                  const std::vector<int>& detector_modes,
                                  double efficiency, bool clicked) {
    const FockBasis& basis = state.basis;
    check_efficiency(efficiency, "project_on_click");
    for (int m : detector_modes) check_mode(basis, m, "project_on_click");

    Eigen::VectorXcd v = state.amplitudes;
    double prob = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        int n = photons_in_modes(basis, static_cast<std::size_t>(i), detector_modes);
        double no_click = std::pow(1.0 - efficiency, n);
        double e = clicked ? 1.0 - no_click : no_click;
        prob += std::norm(v[i]) * e;
        v[i] *= std::sqrt(e);
    }
    if (prob < 1e-14)
        throw ZeroProbabilityError("project_on_click: conditioning outcome has zero probability");
    return {StateVector{basis, v}.normalized(), prob};
}

double mean_total_photons(const StateVector& state) {
    const FockBasis& basis = state.basis;
    std::size_t radix = static_cast<std::size_t>(basis.cutoff) + 1;
    double mean = 0.0;
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i) {
        double p = std::norm(state.amplitudes[i]);
        if (p == 0.0) continue;
        std::size_t rem = static_cast<std::size_t>(i);
        int total = 0;
        for (int m = 0; m < basis.n_modes; ++m) {
            total += static_cast<int>(rem % radix);
            rem /= radix;
        }
        mean += p * double(total);
    }
    return mean;
}

} // namespace switchsim
