#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace switchsim {

using cdouble = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

/// Wrap an angle into the canonical interval (-pi, pi].
inline double wrap_phase(double rad) {
    double y = std::fmod(rad + pi, two_pi);
    if (y <= 0.0) y += two_pi;
    return y - pi;
}

/// Wrap an angle into [0, 2*pi). Presentation transform for mod-360 plots.
inline double wrap_phase_positive(double rad) {
    double y = std::fmod(rad, two_pi);
    if (y < 0.0) y += two_pi;
    return y;
}

/// Signed circular difference a - b, wrapped into (-pi, pi].
inline double circular_difference(double a, double b) { return wrap_phase(a - b); }

} // namespace switchsim
