#include "nds/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nds/errors.hpp"

namespace nds {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view key, std::string_view value, int line) {
    const std::string str(value);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(str, &pos);
    } catch (const std::exception&) {
        throw ConfigError(std::string(key), line, std::string(key) + ": expected a number, got '" + str + "'");
    }
    if (pos != str.size())
        throw ConfigError(std::string(key), line, std::string(key) + ": trailing characters in '" + str + "'");
    if (!std::isfinite(v))
        throw ConfigError(std::string(key), line, std::string(key) + ": value must be finite");
    return v;
}

std::int64_t parse_int(std::string_view key, std::string_view value, int line) {
    const std::string str(value);
    std::int64_t v = 0;
    const auto* first = str.data();
    const auto* last = str.data() + str.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError(std::string(key), line, std::string(key) + ": expected an integer, got '" + str + "'");
    return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view value, int line) {
    const std::string str(value);
    std::uint64_t v = 0;
    const auto* first = str.data();
    const auto* last = str.data() + str.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ConfigError(std::string(key), line, std::string(key) + ": expected a non-negative integer, got '" + str + "'");
    return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view value, int line, Parse parse) {
    std::vector<T> out;
    std::size_t start = 0;
    const std::string str(value);
    while (start <= str.size()) {
        std::size_t comma = str.find(',', start);
        if (comma == std::string::npos) comma = str.size();
        const std::string_view item = trim(std::string_view(str).substr(start, comma - start));
        if (item.empty())
            throw ConfigError(std::string(key), line, std::string(key) + ": empty list element");
        out.push_back(parse(key, item, line));
        start = comma + 1;
        if (comma == str.size()) break;
    }
    if (out.empty())
        throw ConfigError(std::string(key), line, std::string(key) + ": list must be non-empty");
    return out;
}

} // namespace

void apply_setting(Settings& s, std::string_view key, std::string_view value, int line) {
    const std::string k(key);
    if (k == "a") s.params.a = parse_double(key, value, line);
    else if (k == "v") s.params.v = parse_double(key, value, line);
    else if (k == "b") s.params.b = parse_double(key, value, line);
    else if (k == "c") s.params.c = parse_double(key, value, line);
    else if (k == "d") s.params.d = parse_double(key, value, line);
    else if (k == "k") s.params.k = parse_double(key, value, line);
    else if (k == "theta") s.params.theta = parse_double(key, value, line);
    else if (k == "eta0") s.params.eta0 = parse_double(key, value, line);
    else if (k == "divergence_bound") {
        s.params.divergence_bound = parse_double(key, value, line);
        if (s.params.divergence_bound <= 0.0)
            throw ConfigError(k, line, "divergence_bound: must be > 0");
    } else if (k == "tau") {
        s.tau = parse_int(key, value, line);
        if (s.tau < 1) throw ConfigError(k, line, "tau: must be >= 1");
    } else if (k == "weight") s.weight = parse_double(key, value, line);
    else if (k == "control_on") {
        s.control_on = parse_int(key, value, line);
        if (s.control_on < 0) throw ConfigError(k, line, "control_on: must be >= 0");
    } else if (k == "control_off") s.control_off = parse_int(key, value, line);
    else if (k == "total_steps") {
        s.total_steps = parse_int(key, value, line);
        if (*s.total_steps < 1) throw ConfigError(k, line, "total_steps: must be >= 1");
    } else if (k == "seed") s.seed = parse_uint(key, value, line);
    else if (k == "ics") {
        s.ics = parse_int(key, value, line);
        if (*s.ics < 1) throw ConfigError(k, line, "ics: must be >= 1");
    } else if (k == "parallel") {
        s.parallel = static_cast<int>(parse_int(key, value, line));
        if (s.parallel < 0) throw ConfigError(k, line, "parallel: must be >= 0");
    } else if (k == "reset") {
        if (value == "fixed") s.reset_kind = ResetPolicy::Kind::fixed;
        else if (value == "relative") s.reset_kind = ResetPolicy::Kind::relative;
        else throw ConfigError(k, line, "reset: expected 'fixed' or 'relative'");
    } else if (k == "inject_value") s.inject_value = parse_double(key, value, line);
    else if (k == "inject_phase") {
        s.inject_phase = parse_int(key, value, line);
        if (s.inject_phase < 0) throw ConfigError(k, line, "inject_phase: must be >= 0");
    } else if (k == "inject_period") {
        s.inject_period = parse_int(key, value, line);
        if (s.inject_period < 1) throw ConfigError(k, line, "inject_period: must be >= 1");
    } else if (k == "inject_mode") {
        if (value == "assign") s.inject_mode = FixedInjection::Mode::assign;
        else if (value == "add") s.inject_mode = FixedInjection::Mode::add;
        else throw ConfigError(k, line, "inject_mode: expected 'assign' or 'add'");
    } else if (k == "tau_list") {
        s.tau_list = parse_list<std::int64_t>(key, value, line, parse_int);
        for (std::int64_t t : s.tau_list)
            if (t < 1) throw ConfigError(k, line, "tau_list: values must be >= 1");
    } else if (k == "eta0_list") {
        s.eta0_list = parse_list<double>(key, value, line, parse_double);
    } else {
        throw ConfigError(k, line, "unknown key '" + k + "'");
    }
}

void parse_config_text(Settings& settings, std::string_view text) {
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        ++line_no;
        start = nl + 1;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (nl == text.size()) break;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("", line_no, "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", line_no, "missing key before '='");
        if (value.empty())
            throw ConfigError(std::string(key), line_no, std::string(key) + ": missing value");
        apply_setting(settings, key, value, line_no);
        if (nl == text.size()) break;
    }
}

void parse_config_file(Settings& settings, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", 0, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    parse_config_text(settings, buf.str());
}

void validate_settings(const Settings& s) {
    if (s.inject_phase >= s.inject_period)
        throw ConfigError("inject_phase", 0, "inject_phase: must be < inject_period");
    if (s.control_off && *s.control_off < s.control_on)
        throw ConfigError("control_off", 0, "control_off: must be >= control_on");
    if (!std::isfinite(s.weight))
        throw ConfigError("weight", 0, "weight: must be finite");
}

} // namespace nds
