#include "qnet/params.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

namespace qnet {

ConfigParseError::ConfigParseError(int line, const std::string& what)
    : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}

ParameterSet default_ion_trap() { return ParameterSet{}; }

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::map<std::string, double*> key_table(ParameterSet& p) {
    return {
        {"t_1q", &p.times.t_1q},     {"t_2q", &p.times.t_2q},
        {"t_mv", &p.times.t_mv},     {"t_ms", &p.times.t_ms},
        {"t_gen", &p.times.t_gen},   {"t_tprt", &p.times.t_tprt},
        {"t_prfy", &p.times.t_prfy}, {"t_cb", &p.times.t_cb},
        {"p_1q", &p.errors.p_1q},    {"p_2q", &p.errors.p_2q},
        {"p_mv", &p.errors.p_mv},    {"p_ms", &p.errors.p_ms},
        {"f_min", &p.threshold.f_min}, {"f_zero", &p.f_zero},
    };
}

void check_positive(const char* name, double v) {
    if (!(v > 0.0))
        throw ConfigValidationError(std::string(name) + " must be strictly positive, got " +
                                    std::to_string(v));
}

void check_probability(const char* name, double v) {
    if (!(v >= 0.0 && v < 1.0))
        throw ConfigValidationError(std::string(name) + " must be in [0, 1), got " +
                                    std::to_string(v));
}

}  // namespace

void validate(const ParameterSet& p) {
    check_positive("t_1q", p.times.t_1q);
    check_positive("t_2q", p.times.t_2q);
    check_positive("t_mv", p.times.t_mv);
    check_positive("t_ms", p.times.t_ms);
    check_positive("t_gen", p.times.t_gen);
    check_positive("t_tprt", p.times.t_tprt);
    check_positive("t_prfy", p.times.t_prfy);
    check_positive("t_cb", p.times.t_cb);
    check_probability("p_1q", p.errors.p_1q);
    check_probability("p_2q", p.errors.p_2q);
    check_probability("p_mv", p.errors.p_mv);
    check_probability("p_ms", p.errors.p_ms);
    if (!(p.threshold.f_min > 0.0 && p.threshold.f_min < 1.0))
        throw ConfigValidationError("f_min must be in (0, 1), got " +
                                    std::to_string(p.threshold.f_min));
    if (!(p.f_zero > 0.0 && p.f_zero <= 1.0))
        throw ConfigValidationError("f_zero must be in (0, 1], got " + std::to_string(p.f_zero));
}

ParameterSet load_config(const std::string& text) {
    ParameterSet params = default_ion_trap();
    auto table = key_table(params);

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError(lineno, "expected `key = value`, got \"" + trim(raw) + "\"");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = table.find(key);
        if (it == table.end()) throw ConfigParseError(lineno, "unknown key \"" + key + "\"");
        if (value.empty()) throw ConfigParseError(lineno, "missing value for \"" + key + "\"");

        char* end = nullptr;
        double parsed = std::strtod(value.c_str(), &end);
        if (end != value.c_str() + value.size())
            throw ConfigParseError(lineno, "malformed number \"" + value + "\"");
        *it->second = parsed;
    }

    validate(params);
    return params;
}

std::string save_config(const ParameterSet& params) {
    // Mutable copy only so key_table can hand out pointers.
    ParameterSet copy = params;
    auto table = key_table(copy);
    static const char* order[] = {"t_1q", "t_2q", "t_mv",  "t_ms",  "t_gen", "t_tprt", "t_prfy",
                                  "t_cb", "p_1q", "p_2q",  "p_mv",  "p_ms",  "f_min",  "f_zero"};
    std::string out;
    char buf[64];
    for (const char* key : order) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", key, *table.at(key));
        out += buf;
    }
    return out;
}

}  // namespace qnet
