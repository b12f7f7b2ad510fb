#include "spdelab/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spdelab::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

const char* kDefaultConfig = R"(# built-in defaults
[experiment]
suite = default
seed = 20260809
samples = 10000
dt = 2.5e-3
threads = 0
truncation = 0
scheme = exponential

[model]
final_time = 0.5
drift = sin
diffusion = mult_sin
covariance = white
x0 = parabola:1

[space]
ladder = 4,5,6,7
reference = spectral:512
mode_budget = 512
check_ladder = 3,4,5,6,7,8

[weak]
test_functions = gauss,cosine

[ito]
samples = 100000
truncation = 16
identity_covariance = fractional:1
identity_T = 0.1
identity_dt = 1e-3
heat_T = 0.01
heat_dt = 5e-6

[anchor]
samples = 20000
drift_a = 0.5
covariance_s = 1
T = 0.25
dt = 2.5e-3
reference_modes = 64
mesh_exponent = 4

[acceptance]
strong_slope = 0.5
strong_tol = 0.1
weak_slope_min = 0.8
weak_stderr_ratio = 0.5

[output]
dir = runs
)";

}  // namespace

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + t + "'");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": key '" + key + "' outside any [section]");
        cfg.set(section + "." + key, value, origin + ":" + std::to_string(lineno));
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

Config Config::defaults() { return parse_text(kDefaultConfig, "<defaults>"); }

void Config::merge_missing_from(const Config& other) {
    for (const auto& [k, v] : other.values_)
        if (!values_.count(k)) {
            values_[k] = v;
            origins_[k] = other.origins_.at(k);
        }
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
    const std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos)
        throw ConfigError("--set key must be section.key, got '" + key + "'");
    set(key, trim(assignment.substr(eq + 1)), "<override>");
}

void Config::set(const std::string& key, const std::string& value, const std::string& origin) {
    values_[key] = value;
    origins_[key] = origin;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::fail(const std::string& key, const std::string& what) const {
    const auto it = origins_.find(key);
    const std::string where = it == origins_.end() ? "" : " (" + it->second + ")";
    throw ConfigError("config key '" + key + "'" + where + ": " + what);
}

std::string Config::get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError("config key '" + key + "' is missing");
    return it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        fail(key, "'" + v + "' is not a number");
    return x;
}

long long Config::get_int(const std::string& key) const {
    const std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        fail(key, "'" + v + "' is not an integer");
    return x;
}

std::uint64_t Config::get_u64(const std::string& key) const {
    const std::string v = get_string(key);
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        fail(key, "'" + v + "' is not an unsigned integer");
    return x;
}

std::vector<int> Config::get_int_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<int> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        errno = 0;
        char* end = nullptr;
        const long x = std::strtol(t.c_str(), &end, 10);
        if (errno != 0 || end == t.c_str() || *end != '\0')
            fail(key, "'" + t + "' is not an integer");
        out.push_back(static_cast<int>(x));
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

std::string Config::canonical_text() const {
    std::string out;
    for (const auto& [k, v] : values_) {  // std::map iterates sorted
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace spdelab::cli
