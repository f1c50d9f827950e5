#include "hcann/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hcann/error.hpp"

namespace hcann {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

void Report::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find('=') != std::string::npos || key.find('\n') != std::string::npos) {
        throw ArgumentError("report: invalid key '" + key + "'");
    }
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, format_double(value)); }

void Report::merge(const Report& other, const std::string& prefix) {
    for (const auto& [k, v] : other.entries_) set(prefix + k, v);
}

std::optional<std::string> Report::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

double Report::get_double(const std::string& key) const {
    auto v = get(key);
    if (!v) throw FormatError("report: missing key '" + key + "'");
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw FormatError("report: key '" + key + "' is not numeric: " + *v);
    }
}

Report Report::without_timing() const {
    Report out;
    for (const auto& [k, v] : entries_) {
        if (k.rfind("timing.", 0) != 0) out.entries_.emplace_back(k, v);
    }
    return out;
}

std::string Report::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

Report Report::parse(const std::string& text) {
    Report r;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("report line " + std::to_string(lineno) + " lacks '='");
        }
        r.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return r;
}

Report Report::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open report: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Report::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ArgumentError("cannot write report: " + path);
    out << to_text();
}

}  // namespace hcann
