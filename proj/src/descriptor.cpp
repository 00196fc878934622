#include "switchsim/descriptor.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string_view>

#include "switchsim/errors.hpp"
#include "switchsim/rng.hpp"

namespace switchsim {

namespace {

// Measured with interference disabled: detector 1 signal path, detector 1
// reference path, detector 2, signal x control accidentals, pair
// coincidences; all in counts per second.
constexpr MeasuredRates kSmallRates{88e3, 79e3, 282e3, 256.0, 4.7};
constexpr MeasuredRates kLargeRates{700.0, 8600.0, 129e3, 1.1, 5.2};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& message) {
    throw DescriptorError(path + ":" + std::to_string(line) + ": " + message);
}

double parse_double(std::string_view text, const std::string& path, int line,
                    const std::string& key) {
    double value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail(path, line, "key '" + key + "': cannot parse '" + std::string(text) + "' as a number");
    return value;
}

std::uint64_t parse_u64(std::string_view text, const std::string& path, int line,
                        const std::string& key) {
    std::uint64_t value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail(path, line, "key '" + key + "': cannot parse '" + std::string(text) +
                             "' as an unsigned integer");
    return value;
}

int parse_int(std::string_view text, const std::string& path, int line, const std::string& key) {
    int value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        fail(path, line, "key '" + key + "': cannot parse '" + std::string(text) + "' as an integer");
    return value;
}

void check_range(bool ok, const std::string& path, int line, const std::string& key,
                 const std::string& constraint) {
    if (!ok) fail(path, line, "key '" + key + "' violates constraint: " + constraint);
}

} // namespace

std::string to_string(Preset preset) {
    switch (preset) {
        case Preset::small: return "small";
        case Preset::large: return "large";
        case Preset::custom: return "custom";
    }
    return "?";
}

std::string to_string(OutputFormat format) {
    return format == OutputFormat::csv ? "csv" : "json";
}

std::vector<double> ThetaGrid::points_deg() const {
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) pts.push_back(start_deg + span_deg * double(i) / double(count));
    return pts;
}

double ExperimentDescriptor::resolved_dwell() const {
    if (dwell_s > 0.0) return dwell_s;
    return preset == Preset::large ? 40.0 : 1.0;
}

MeasuredRates ExperimentDescriptor::resolved_rates() const {
    switch (preset) {
        case Preset::small: return kSmallRates;
        case Preset::large: return kLargeRates;
        case Preset::custom: break;
    }
    if (!rates_given)
        throw DescriptorError("preset 'custom' requires an explicit [rates] section");
    return rates;
}

double ExperimentDescriptor::rate_ratio() const {
    MeasuredRates m = resolved_rates();
    return std::sqrt(m.dc_coinc / m.accidental_coinc);
}

double ExperimentDescriptor::harmonization_factor() const {
    MeasuredRates m = resolved_rates();
    return std::sqrt(m.accidental_coinc * rep_rate / (m.singles_1_signal * m.singles_2));
}

SwitchParams ExperimentDescriptor::switch_params(double theta_p_rad) const {
    MeasuredRates m = resolved_rates();
    double k = harmonization_factor();
    MeasuredRates eff{m.singles_1_signal * k, m.singles_1_reference * k, m.singles_2 * k,
                      m.accidental_coinc, m.dc_coinc};
    return calibrate_from_rates(eff, rep_rate, det1_efficiency, det2_efficiency,
                                bs2_transmissivity, theta_p_rad);
}

SourceConfig ExperimentDescriptor::source_config(double theta_p_rad) const {
    SourceConfig config{};
    config.rep_rate = rep_rate;
    config.dwell_time = resolved_dwell();
    config.switch_params = switch_params(theta_p_rad);
    config.det1_efficiency = det1_efficiency;
    config.det2_efficiency = det2_efficiency;
    config.dark_rate_1 = dark_rate_1;
    config.dark_rate_2 = dark_rate_2;
    config.accidental_floor = accidental_floor;
    config.rng_seed = seed;
    return config;
}

ExperimentDescriptor load_descriptor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DescriptorError("cannot open descriptor: " + path);

    ExperimentDescriptor desc{};
    bool preset_seen = false;
    double theta_p_fs = 0.0;
    bool theta_fs_seen = false;
    bool theta_deg_seen = false;
    std::string section;
    std::set<std::string> seen_keys;
    std::set<std::string> seen_sections;
    std::string line;
    int line_no = 0;
    int content_lines = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string_view text = trim(line);
        if (text.empty()) continue;
        ++content_lines;

        if (text.front() == '[') {
            if (text.back() != ']') fail(path, line_no, "unterminated section header");
            section = std::string(text.substr(1, text.size() - 2));
            if (section != "experiment" && section != "scan" && section != "sweep" &&
                section != "source" && section != "rates")
                fail(path, line_no, "unknown section [" + section + "]");
            seen_sections.insert(section);
            continue;
        }
        if (section.empty()) fail(path, line_no, "key outside any [section]");

        auto eq = text.find('=');
        if (eq == std::string_view::npos) fail(path, line_no, "expected 'key = value'");
        std::string key(trim(text.substr(0, eq)));
        std::string_view value = trim(text.substr(eq + 1));
        if (key.empty()) fail(path, line_no, "empty key");
        if (value.empty()) fail(path, line_no, "key '" + key + "' has no value");
        if (!seen_keys.insert(section + "." + key).second)
            fail(path, line_no, "duplicate key '" + key + "' in [" + section + "]");

        if (section == "experiment") {
            if (key == "preset") {
                if (value == "small") desc.preset = Preset::small;
                else if (value == "large") desc.preset = Preset::large;
                else if (value == "custom") desc.preset = Preset::custom;
                else fail(path, line_no, "preset must be small, large, or custom");
                preset_seen = true;
            } else if (key == "theta_p_deg") {
                desc.theta_p_deg = parse_double(value, path, line_no, key);
                theta_deg_seen = true;
            } else if (key == "theta_p_fs") {
                theta_p_fs = parse_double(value, path, line_no, key);
                theta_fs_seen = true;
            } else if (key == "seed") {
                desc.seed = parse_u64(value, path, line_no, key);
            } else if (key == "out_dir") {
                desc.out_dir = std::string(value);
            } else if (key == "format") {
                if (value == "csv") desc.format = OutputFormat::csv;
                else if (value == "json") desc.format = OutputFormat::json;
                else fail(path, line_no, "format must be csv or json");
            } else if (key == "workers") {
                desc.workers = parse_int(value, path, line_no, key);
                check_range(desc.workers >= 1, path, line_no, key, "must be >= 1");
            } else if (key == "cutoff") {
                desc.cutoff = parse_int(value, path, line_no, key);
                check_range(desc.cutoff >= 1, path, line_no, key, "must be >= 1");
            } else {
                fail(path, line_no, "unknown key '" + key + "' in [experiment]");
            }
        } else if (section == "scan") {
            if (key == "delay_start_um") desc.scan.delay_start_um = parse_double(value, path, line_no, key);
            else if (key == "delay_step_um") {
                desc.scan.delay_step_um = parse_double(value, path, line_no, key);
                check_range(desc.scan.delay_step_um > 0.0, path, line_no, key, "must be > 0");
            } else if (key == "n_steps") {
                desc.scan.n_steps = parse_int(value, path, line_no, key);
                check_range(desc.scan.n_steps >= 2, path, line_no, key, "must be >= 2");
            } else if (key == "wavelength_um") {
                desc.scan.wavelength_um = parse_double(value, path, line_no, key);
                check_range(desc.scan.wavelength_um > 0.0, path, line_no, key, "must be > 0");
            } else if (key == "dwell_s") {
                desc.dwell_s = parse_double(value, path, line_no, key);
                check_range(desc.dwell_s > 0.0, path, line_no, key, "must be > 0");
            } else {
                fail(path, line_no, "unknown key '" + key + "' in [scan]");
            }
        } else if (section == "sweep") {
            if (key == "theta_start_deg") desc.sweep.start_deg = parse_double(value, path, line_no, key);
            else if (key == "theta_span_deg") {
                desc.sweep.span_deg = parse_double(value, path, line_no, key);
                check_range(desc.sweep.span_deg > 0.0, path, line_no, key, "must be > 0");
            } else if (key == "theta_count") {
                desc.sweep.count = parse_int(value, path, line_no, key);
                check_range(desc.sweep.count >= 1, path, line_no, key, "must be >= 1");
            } else {
                fail(path, line_no, "unknown key '" + key + "' in [sweep]");
            }
        } else if (section == "source") {
            double v = parse_double(value, path, line_no, key);
            if (key == "rep_rate") {
                check_range(v > 0.0, path, line_no, key, "must be > 0");
                desc.rep_rate = v;
            } else if (key == "det1_efficiency") {
                check_range(v >= 0.0 && v <= 1.0, path, line_no, key, "must be in [0,1]");
                desc.det1_efficiency = v;
            } else if (key == "det2_efficiency") {
                check_range(v >= 0.0 && v <= 1.0, path, line_no, key, "must be in [0,1]");
                desc.det2_efficiency = v;
            } else if (key == "dark_rate_1") {
                check_range(v >= 0.0, path, line_no, key, "must be >= 0");
                desc.dark_rate_1 = v;
            } else if (key == "dark_rate_2") {
                check_range(v >= 0.0, path, line_no, key, "must be >= 0");
                desc.dark_rate_2 = v;
            } else if (key == "accidental_floor") {
                check_range(v >= 0.0, path, line_no, key, "must be >= 0");
                desc.accidental_floor = v;
            } else if (key == "bs2_transmissivity") {
                check_range(v >= 0.0 && v <= 1.0, path, line_no, key, "must be in [0,1]");
                desc.bs2_transmissivity = v;
            } else {
                fail(path, line_no, "unknown key '" + key + "' in [source]");
            }
        } else {   // rates
            double v = parse_double(value, path, line_no, key);
            check_range(v >= 0.0, path, line_no, key, "must be >= 0");
            if (key == "singles_1_signal") desc.rates.singles_1_signal = v;
            else if (key == "singles_1_reference") desc.rates.singles_1_reference = v;
            else if (key == "singles_2") desc.rates.singles_2 = v;
            else if (key == "accidental_coinc") desc.rates.accidental_coinc = v;
            else if (key == "dc_coinc") desc.rates.dc_coinc = v;
            else fail(path, line_no, "unknown key '" + key + "' in [rates]");
        }
    }

    if (content_lines == 0) throw DescriptorError(path + ": empty descriptor");
    if (!preset_seen)
        throw DescriptorError(path + ": missing required key 'preset' in [experiment]");
    if (theta_fs_seen && theta_deg_seen)
        throw DescriptorError(path + ": theta_p_deg and theta_p_fs are mutually exclusive");
    if (theta_fs_seen) desc.theta_p_deg = pump_delay_fs_to_degrees(theta_p_fs);

    bool rates_section = seen_sections.count("rates") > 0;
    if (desc.preset == Preset::custom) {
        const char* required[] = {"singles_1_signal", "singles_1_reference", "singles_2",
                                  "accidental_coinc", "dc_coinc"};
        for (const char* key : required)
            if (!seen_keys.count(std::string("rates.") + key))
                throw DescriptorError(path + ": preset 'custom' requires key '" +
                                      std::string(key) + "' in [rates]");
        desc.rates_given = true;
    } else if (rates_section) {
        throw DescriptorError(path + ": presets carry fixed rate tables; [rates] is only valid "
                                     "with preset = custom");
    }

    // Cross-field checks that need the finished descriptor.
    try {
        desc.scan.validate();
    } catch (const std::exception& e) {
        throw DescriptorError(path + ": [scan] invalid: " + e.what());
    }
    if (desc.preset == Preset::custom) {
        if (!(desc.rates.accidental_coinc > 0.0))
            throw DescriptorError(path + ": key 'accidental_coinc' violates constraint: must be > 0");
    }
    return desc;
}

void apply_env_overrides(ExperimentDescriptor& desc) {
    auto get = [](const char* name) -> const char* { return std::getenv(name); };
    if (const char* v = get("SWITCHSIM_SEED")) {
        desc.seed = parse_u64(v, "environment SWITCHSIM_SEED", 0, "seed");
    }
    if (const char* v = get("SWITCHSIM_OUT")) desc.out_dir = v;
    if (const char* v = get("SWITCHSIM_WORKERS")) {
        desc.workers = parse_int(v, "environment SWITCHSIM_WORKERS", 0, "workers");
        if (desc.workers < 1)
            throw DescriptorError("environment SWITCHSIM_WORKERS: must be >= 1");
    }
    if (const char* v = get("SWITCHSIM_FORMAT")) {
        std::string s = v;
        if (s == "csv") desc.format = OutputFormat::csv;
        else if (s == "json") desc.format = OutputFormat::json;
        else throw DescriptorError("environment SWITCHSIM_FORMAT: must be csv or json");
    }
    if (const char* v = get("SWITCHSIM_CUTOFF")) {
        desc.cutoff = parse_int(v, "environment SWITCHSIM_CUTOFF", 0, "cutoff");
        if (desc.cutoff < 1) throw DescriptorError("environment SWITCHSIM_CUTOFF: must be >= 1");
    }
}

double pump_delay_fs_to_degrees(double delay_fs) {
    constexpr double c_um_per_fs = 0.299792458;
    constexpr double pump_wavelength_um = 0.405;
    return 360.0 * delay_fs * c_um_per_fs / pump_wavelength_um;
}

} // namespace switchsim
