#include "mimoee/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mimoee {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: value for '" + key +
                                    "' is not a number: " + value);
    }
    if (pos != value.size())
        throw std::invalid_argument("config: trailing characters after the "
                                    "value of '" + key + "': " + value);
    return out;
}

int parse_count(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9)
        throw std::invalid_argument("config: '" + key +
                                    "' must be an integer");
    return i;
}

/// Strips a recognized unit suffix and returns the scale back to watts.
/// key, key_mW, key_dBm are accepted for power-valued fields.
struct PowerKey {
    std::string base;
    enum class Unit { watts, milliwatts, dbm } unit = Unit::watts;
};

PowerKey split_power_key(const std::string& key) {
    PowerKey out;
    if (key.size() > 3 && key.ends_with("_mW")) {
        out.base = key.substr(0, key.size() - 3);
        out.unit = PowerKey::Unit::milliwatts;
    } else if (key.size() > 4 && key.ends_with("_dBm")) {
        out.base = key.substr(0, key.size() - 4);
        out.unit = PowerKey::Unit::dbm;
    } else {
        out.base = key;
    }
    return out;
}

double to_watts(double value, PowerKey::Unit unit) {
    switch (unit) {
        case PowerKey::Unit::watts: return value;
        case PowerKey::Unit::milliwatts: return value * 1e-3;
        case PowerKey::Unit::dbm: return std::pow(10.0, value / 10.0) * 1e-3;
    }
    return value;
}

bool is_power_field(const std::string& base) {
    return base == "b" || base == "b0" || base == "sigma2" || base == "P_max";
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

SystemConfig parse_config(const std::string& text) {
    SystemConfig cfg;
    bool xi_given = false, r_given = false, r0_given = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " +
                                        std::to_string(line_no) +
                                        " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const PowerKey pk = split_power_key(key);

        if (is_power_field(pk.base)) {
            const double watts = to_watts(parse_number(key, value), pk.unit);
            if (pk.base == "b") cfg.b = watts;
            else if (pk.base == "b0") cfg.b0 = watts;
            else if (pk.base == "sigma2") cfg.sigma2 = watts;
            else cfg.P_max = watts;
            continue;
        }
        if (key == "M") cfg.M = parse_count(key, value);
        else if (key == "N") cfg.N = parse_count(key, value);
        else if (key == "T_s") cfg.T_s = parse_count(key, value);
        else if (key == "t_s") cfg.t_s = parse_count(key, value);
        else if (key == "t_f_s") cfg.t_f_s = parse_count(key, value);
        else if (key == "S_d") cfg.S_d = parse_number(key, value);
        else if (key == "L") cfg.L = parse_count(key, value);
        else if (key == "R") { cfg.R = parse_number(key, value); r_given = true; }
        else if (key == "R0") { cfg.R0 = parse_number(key, value); r0_given = true; }
        else if (key == "xi") { cfg.xi = parse_number(key, value); xi_given = true; }
        else if (key == "a") cfg.a = parse_number(key, value);
        else
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    // xi = R/R0 consistency: derive whichever side was not given.
    if (!xi_given && (r_given || r0_given)) cfg.xi = cfg.R / cfg.R0;
    if (xi_given && !r_given && !r0_given) cfg.R = cfg.xi * cfg.R0;
    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string save_config(const SystemConfig& cfg) {
    std::ostringstream out;
    out << "M = " << cfg.M << "\n";
    out << "N = " << cfg.N << "\n";
    out << "T_s = " << cfg.T_s << "\n";
    out << "t_s = " << cfg.t_s << "\n";
    out << "t_f_s = " << cfg.t_f_s << "\n";
    out << "S_d = " << format_full(cfg.S_d) << "\n";
    out << "L = " << cfg.L << "\n";
    out << "R = " << format_full(cfg.R) << "\n";
    out << "R0 = " << format_full(cfg.R0) << "\n";
    out << "xi = " << format_full(cfg.xi) << "\n";
    out << "a = " << format_full(cfg.a) << "\n";
    out << "b = " << format_full(cfg.b) << "\n";
    if (cfg.b0) out << "b0 = " << format_full(*cfg.b0) << "\n";
    out << "sigma2 = " << format_full(cfg.sigma2) << "\n";
    out << "P_max = " << format_full(cfg.P_max) << "\n";
    return out.str();
}

void save_config(const SystemConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("config: cannot write '" + path + "'");
    out << save_config(cfg);
}

} // namespace mimoee
