#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdelab::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Line-oriented `key = value` configuration with [section] headers. Keys are
// addressed as "section.key"; parse and type errors carry file/line context.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin);
    static Config defaults();  // the built-in default experiment

    // Missing keys are filled in from `other` (existing values win).
    void merge_missing_from(const Config& other);
    // "section.key=value"; applied after file parse, recorded like any entry.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    // Sorted `key = value` lines; hashed into every report header.
    std::string canonical_text() const;
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> origins_;  // key -> "file:line"
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace spdelab::cli
