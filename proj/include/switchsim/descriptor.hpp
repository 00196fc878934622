#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "switchsim/detection_sim.hpp"

namespace switchsim {

enum class Preset { small, large, custom };
enum class OutputFormat { csv, json };

std::string to_string(Preset preset);
std::string to_string(OutputFormat format);

/// Uniform pump-phase grid: start + i * span/count for i in [0, count).
struct ThetaGrid {
    double start_deg = 0.0;
    double span_deg = 360.0;
    int count = 24;

    std::vector<double> points_deg() const;
};

/// Everything one run needs, read from a line-oriented sectioned key/value
/// file ([experiment], [scan], [sweep], [source], [rates]; `#` comments).
/// The `small` and `large` presets carry fixed rate tables; `custom`
/// requires an explicit [rates] section and presets must not have one.
struct ExperimentDescriptor {
    // [experiment]
    Preset preset = Preset::large;
    double theta_p_deg = 95.0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::csv;
    int workers = 1;
    int cutoff = 3;                 // oracle checks only

    // [scan]
    ScanSpec scan{};
    double dwell_s = -1.0;          // < 0: preset default (large 40 s, else 1 s)

    // [sweep]
    ThetaGrid sweep{};

    // [source]
    double rep_rate = 8.0e7;
    double det1_efficiency = 1.0;
    double det2_efficiency = 1.0;
    double dark_rate_1 = 0.0;
    double dark_rate_2 = 0.0;
    double accidental_floor = 0.0;
    double bs2_transmissivity = 0.9;

    // [rates] (custom preset only)
    MeasuredRates rates{};
    bool rates_given = false;

    double resolved_dwell() const;
    MeasuredRates resolved_rates() const;
    /// Rate ratio the theory curve is drawn from: sqrt(dc/accidental).
    double rate_ratio() const;

    /// Calibration used by every simulation path: the raw per-rate formulas,
    /// after jointly rescaling the three singles rates by
    /// k = sqrt(accidental * rep_rate / (s1_signal * s2)) so that the
    /// simulated signal x control accidental coincidence rate integrates to
    /// the measured one. The rescale preserves the rate ratio r exactly.
    /// (The quoted singles and accidental rates are mutually inconsistent at
    /// lowest order; the accidental rate wins because it sets the
    /// coincidence statistics.)
    SwitchParams switch_params(double theta_p_rad) const;
    double harmonization_factor() const;

    SourceConfig source_config(double theta_p_rad) const;
};

/// Parse and validate a descriptor file. Unknown sections or keys, duplicate
/// keys, unparsable values, and range violations all throw DescriptorError
/// with file/line/field context.
ExperimentDescriptor load_descriptor(const std::string& path);

/// Apply SWITCHSIM_* environment variables (SEED, OUT, WORKERS, FORMAT,
/// CUTOFF). Precedence is flag > environment > descriptor > default; callers
/// apply command-line flags after this.
void apply_env_overrides(ExperimentDescriptor& desc);

/// Convert a pump delay in femtoseconds to pump phase in degrees, using one
/// optical period of the 405 nm pump (about 1.351 fs) = 360 degrees.
/// Published delay-to-phase figures do not always follow this convention;
/// cross-check external values before relying on them.
double pump_delay_fs_to_degrees(double delay_fs);

} // namespace switchsim
