#include "kdv/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kdv/errors.hpp"

namespace kdv {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw UsageError("config line " + std::to_string(lineno) +
                                 ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw UsageError("config line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        cfg.kv_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) != 0; }

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw UsageError("config: missing required key '" + key + "'");
    return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& s = it->second;
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || trim(std::string(end)) != "")
        throw UsageError("config: key '" + key + "' is not a number: '" + s + "'");
    return x;
}

long Config::get_long(const std::string& key, long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& s = it->second;
    char* end = nullptr;
    const long x = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || trim(std::string(end)) != "")
        throw UsageError("config: key '" + key + "' is not an integer: '" + s + "'");
    return x;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::string s = it->second;
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw UsageError("config: key '" + key + "' is not a boolean: '" + it->second + "'");
}

std::vector<std::size_t> Config::get_ladder(const std::string& key) const {
    const std::string raw = require_string(key);
    std::string normalized = raw;
    for (auto& ch : normalized)
        if (ch == ',') ch = ' ';
    std::istringstream in(normalized);
    std::vector<std::size_t> Js;
    long v = 0;
    while (in >> v) {
        if (v <= 0)
            throw UsageError("config: key '" + key + "': grid sizes must be positive");
        Js.push_back(static_cast<std::size_t>(v));
    }
    if (!in.eof())
        throw UsageError("config: key '" + key + "' is not a list of integers: '" + raw + "'");
    if (Js.empty()) throw UsageError("config: key '" + key + "' is empty");
    for (std::size_t i = 1; i < Js.size(); ++i)
        if (Js[i] != 2 * Js[i - 1])
            throw UsageError("config: key '" + key + "': each grid size must double the previous");
    return Js;
}

std::string Config::serialize() const {
    std::ostringstream out;
    bool wrote = false;
    for (const auto& [key, value] : kv_) { // sectionless keys first
        if (key.find('.') == std::string::npos) {
            out << key << " = " << value << "\n";
            wrote = true;
        }
    }
    std::string current;
    for (const auto& [key, value] : kv_) {
        const std::size_t dot = key.find('.');
        if (dot == std::string::npos) continue;
        const std::string section = key.substr(0, dot);
        if (section != current) {
            if (wrote) out << "\n";
            out << "[" << section << "]\n";
            current = section;
            wrote = true;
        }
        out << key.substr(dot + 1) << " = " << value << "\n";
    }
    return out.str();
}

std::string format_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw UsageError("cannot write '" + tmp + "'");
        out << text;
        out.flush();
        if (!out) throw UsageError("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw UsageError("cannot rename '" + tmp + "' over '" + path + "'");
    }
}

} // namespace kdv
