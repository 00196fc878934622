#include "switchsim/scan_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace switchsim {

namespace {

constexpr const char* kHeader = "delay_um,phi_ref_rad,n_pulses,singles1,singles2,coinc";

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::binary);   // binary: keep \n endings everywhere
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

template <typename T>
T parse_field(const std::string& text, const std::string& path, int line_no) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad field '" + text + "'");
    return value;
}

} // namespace

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

void write_scan_csv(const std::string& path, const std::vector<ScanRecord>& records) {
    std::ofstream out = open_for_write(path);
    out << "# " << scan_format_id << "\n" << kHeader << "\n";
    for (const ScanRecord& r : records) {
        out << format_double(r.delay_um) << ',' << format_double(r.phi_ref_rad) << ','
            << r.n_pulses << ',' << r.singles_1 << ',' << r.singles_2 << ','
            << r.coincidences << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_scan_json(const std::string& path, const std::vector<ScanRecord>& records) {
    nlohmann::ordered_json doc;
    doc["format"] = scan_format_id;
    doc["records"] = nlohmann::ordered_json::array();
    for (const ScanRecord& r : records) {
        nlohmann::ordered_json rec;
        rec["delay_um"] = r.delay_um;
        rec["phi_ref_rad"] = r.phi_ref_rad;
        rec["n_pulses"] = r.n_pulses;
        rec["singles1"] = r.singles_1;
        rec["singles2"] = r.singles_2;
        rec["coinc"] = r.coincidences;
        doc["records"].push_back(std::move(rec));
    }
    std::ofstream out = open_for_write(path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ScanRecord> read_scan_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    int line_no = 0;

    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++line_no;
    if (line != std::string("# ") + scan_format_id)
        throw std::runtime_error(path + ":1: missing version line '# " +
                                 std::string(scan_format_id) + "'");
    if (!std::getline(in, line) || line != kHeader)
        throw std::runtime_error(path + ":2: expected header '" + std::string(kHeader) + "'");
    ++line_no;

    std::vector<ScanRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 6 fields, got " + std::to_string(fields.size()));
        ScanRecord r{};
        r.delay_um = parse_field<double>(fields[0], path, line_no);
        r.phi_ref_rad = parse_field<double>(fields[1], path, line_no);
        r.n_pulses = parse_field<std::int64_t>(fields[2], path, line_no);
        r.singles_1 = parse_field<std::int64_t>(fields[3], path, line_no);
        r.singles_2 = parse_field<std::int64_t>(fields[4], path, line_no);
        r.coincidences = parse_field<std::int64_t>(fields[5], path, line_no);
        records.push_back(r);
    }
    return records;
}

} // namespace switchsim
