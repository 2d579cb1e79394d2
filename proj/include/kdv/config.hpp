#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace kdv {

// Flat, human-editable run description:
//
//   # comment lines start with '#' or ';'
//   [section]
//   key = value
//
// Keys are addressed as "section.key" ("key" alone before any section
// header). Values keep their raw text; the typed getters parse on demand and
// throw UsageError with the offending key on malformed input. Within a
// section a repeated key keeps the last value.
class Config {
  public:
    Config() = default;

    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Whitespace- or comma-separated list of grid sizes; each entry must be
    // exactly twice the previous one.
    std::vector<std::size_t> get_ladder(const std::string& key) const;

    // Canonical text form: sectionless keys first, then sections in sorted
    // order with sorted keys. parse_string(serialize()) == *this.
    std::string serialize() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }
    bool operator==(const Config&) const = default;

  private:
    std::map<std::string, std::string> kv_;
};

// Doubles in reports are printed with %.17g so results diff cleanly and
// round-trip bit-exactly.
std::string format_g17(double x);

// Writes the whole file under a temporary name in the same directory, then
// renames over the target, so a reader never sees a partial file.
void write_text_atomic(const std::string& path, const std::string& text);

} // namespace kdv
