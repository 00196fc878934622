#pragma once

#include <string>
#include <vector>

#include "switchsim/detection_sim.hpp"

namespace switchsim {

/// Shortest decimal representation that parses back to the same double.
/// Locale-independent.
std::string format_double(double value);

inline constexpr const char* scan_format_id = "switchsim scan v1";

/// CSV with a version comment line, then the fixed header
/// delay_um,phi_ref_rad,n_pulses,singles1,singles2,coinc.
void write_scan_csv(const std::string& path, const std::vector<ScanRecord>& records);

/// JSON twin of the CSV: {"format": "...", "records": [...]}.
void write_scan_json(const std::string& path, const std::vector<ScanRecord>& records);

/// Parse a file written by write_scan_csv. Throws std::runtime_error with a
/// line number on malformed input.
std::vector<ScanRecord> read_scan_csv(const std::string& path);

} // namespace switchsim
