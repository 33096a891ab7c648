#include "ellipsum/cli.hpp"

#include "ellipsum/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ellipsum::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) out.push_back(trim(cur));
    return out;
}

[[noreturn]] void bad(const std::string& origin, const std::string& key, const std::string& msg) {
    throw Error(ErrorCode::InvalidArgument, origin + ": " + key + ": " + msg);
}

std::int64_t parse_int(const std::string& s, const std::string& origin, const std::string& key) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE) {
        // accept integral reals such as 1e6
        const double d = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || !std::isfinite(d) || d != std::floor(d) || std::fabs(d) > 9.0e18)
            bad(origin, key, "expected an integer, got '" + s + "'");
        return static_cast<std::int64_t>(d);
    }
    return v;
}

double parse_real(const std::string& s, const std::string& origin, const std::string& key) {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(d)) bad(origin, key, "expected a finite number, got '" + s + "'");
    return d;
}

const std::vector<std::string> kShared = {"out", "manifest", "cache_dir", "no_cache", "workers"};

} // namespace

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::vector<KeySpec>& key_schema() {
    static const std::vector<KeySpec> s = {
        {"matrix", ValType::Text, "form: diag:a1,..,an | full:[[..],..] | qdiag:p/q,.. | qfull:[[p/q,..],..]"},
        {"alpha", ValType::Text, "shift, comma-separated tokens: decimal | p/q | sqrt<k> | sqrt<k>-<int> | phi-1 | e-2 | pi-3"},
        {"qmax", ValType::Int, "largest denominator scanned"},
        {"coeff_bound", ValType::Int, "also search integer relations with |c_i| <= bound"},
        {"pmax", ValType::Int, "largest form value p in the series"},
        {"checkpoints", ValType::IntList, "N values reported in the trace (default: powers of 10 and pmax)"},
        {"summary", ValType::Text, "write the JSON summary to this path"},
        {"P", ValType::Int, "truncation of the variance series"},
        {"t", ValType::RealList, "radii at which to evaluate"},
        {"T", ValType::RealList, "averaging scales"},
        {"K", ValType::Real, "mollifier scale"},
        {"zeta", ValType::Real, "spectral truncation exponent, p <= K^(2+zeta)"},
        {"gamma", ValType::Real, "shell width rule eps = T^(-gamma)"},
        {"eps", ValType::Real, "explicit shell width"},
        {"kernel", ValType::Text, "averaging density: bump or bump:c0,c1"},
        {"mollifier", ValType::Text, "gaussian or bump"},
        {"a", ValType::IntList, "diagonal weights a1,..,an"},
        {"v", ValType::RealList, "decreasing imaginary parts"},
        {"delta", ValType::Real, "width of the smooth cutoff beyond r = 1"},
        {"profile", ValType::Text, "smooth or indicator"},
        {"order", ValType::Int, "Gauss order per piece"},
        {"out", ValType::Text, "output file (default stdout)"},
        {"manifest", ValType::Text, "manifest file (default <out>.manifest.json, or stderr)"},
        {"cache_dir", ValType::Text, "cache directory (default $ELLIPSUM_CACHE or ~/.cache/ellipsum)"},
        {"no_cache", ValType::Bool, "neither read nor write the cache"},
        {"workers", ValType::Int, "worker threads"},
        {"assume_property_1", ValType::Bool, "allow non-diagonal forms where the asymptotics are only conjectural"},
        {"action", ValType::Text, "cache action: inspect or clear"},
    };
    return s;
}

const KeySpec* find_key(const std::string& key) {
    for (const auto& k : key_schema())
        if (key == k.key) return &k;
    return nullptr;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c = {"dio", "repsums", "meansq", "count", "fdev",
                                               "variance", "shell", "theta-check", "cache"};
    return c;
}

const std::vector<std::string>& command_keys(const std::string& command) {
    static const std::map<std::string, std::vector<std::string>> m = {
        {"dio", {"alpha", "qmax", "coeff_bound"}},
        {"repsums", {"matrix", "alpha", "pmax", "checkpoints", "summary"}},
        {"meansq", {"matrix", "alpha", "pmax", "checkpoints", "assume_property_1"}},
        {"count", {"matrix", "alpha", "t"}},
        {"fdev", {"matrix", "alpha", "T", "t", "eps", "gamma", "kernel", "order"}},
        {"variance", {"matrix", "alpha", "T", "P", "kernel", "order", "assume_property_1"}},
        {"shell", {"matrix", "alpha", "T", "gamma", "eps", "K", "zeta", "mollifier", "kernel", "order", "assume_property_1"}},
        {"theta-check", {"a", "alpha", "v", "delta", "profile"}},
        {"cache", {"action"}},
    };
    static const std::map<std::string, std::vector<std::string>> full = [] {
        std::map<std::string, std::vector<std::string>> f;
        for (const auto& [c, keys] : m) {
            auto k = keys;
            k.insert(k.end(), kShared.begin(), kShared.end());
            f[c] = k;
        }
        return f;
    }();
    auto it = full.find(command);
    if (it == full.end()) throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
    return it->second;
}

void set_value(RunConfig& cfg, const std::string& key, const std::string& raw_in, const std::string& origin) {
    if (key == "command") {
        const std::string c = trim(raw_in);
        if (std::find(commands().begin(), commands().end(), c) == commands().end())
            bad(origin, key, "unknown command '" + c + "'");
        cfg.command = c;
        return;
    }
    const KeySpec* ks = find_key(key);
    if (!ks) bad(origin, key, "unknown key");
    const std::string raw = trim(raw_in);
    std::string canon;
    switch (ks->type) {
    case ValType::Int: canon = std::to_string(parse_int(raw, origin, key)); break;
    case ValType::Real: canon = fmt17(parse_real(raw, origin, key)); break;
    case ValType::IntList:
    case ValType::RealList: {
        const auto parts = split_list(raw);
        if (parts.empty()) bad(origin, key, "empty list");
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) canon += ",";
            canon += ks->type == ValType::IntList ? std::to_string(parse_int(parts[i], origin, key))
                                                  : fmt17(parse_real(parts[i], origin, key));
        }
        break;
    }
    case ValType::Bool:
        if (raw.empty() || raw == "1" || raw == "true" || raw == "yes" || raw == "on") canon = "true";
        else if (raw == "0" || raw == "false" || raw == "no" || raw == "off") canon = "false";
        else bad(origin, key, "expected a boolean, got '" + raw + "'");
        break;
    case ValType::Text:
        if (raw.empty()) bad(origin, key, "empty value");
        canon = raw;
        break;
    }
    cfg.values[key] = canon;
    cfg.origin[key] = origin;
}

RunConfig parse_config_text(const std::string& text, const std::string& source) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, where + ": expected key=value");
        set_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1), where);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string serialize(const RunConfig& cfg) {
    std::string s;
    if (!cfg.command.empty()) s += "command=" + cfg.command + "\n";
    for (const auto& [k, v] : cfg.values) s += k + "=" + v + "\n"; // std::map keeps keys sorted
    return s;
}

std::string RunConfig::where(const std::string& key) const {
    auto it = origin.find(key);
    return it == origin.end() ? "default" : it->second;
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t def) const {
    auto it = values.find(key);
    return it == values.end() ? def : std::stoll(it->second);
}

double RunConfig::get_real(const std::string& key, double def) const {
    auto it = values.find(key);
    return it == values.end() ? def : std::strtod(it->second.c_str(), nullptr);
}

std::vector<std::int64_t> RunConfig::get_ints(const std::string& key) const {
    std::vector<std::int64_t> out;
    auto it = values.find(key);
    if (it != values.end())
        for (const auto& p : split_list(it->second)) out.push_back(std::stoll(p));
    return out;
}

std::vector<double> RunConfig::get_reals(const std::string& key) const {
    std::vector<double> out;
    auto it = values.find(key);
    if (it != values.end())
        for (const auto& p : split_list(it->second)) out.push_back(std::strtod(p.c_str(), nullptr));
    return out;
}

std::string RunConfig::get_text(const std::string& key, const std::string& def) const {
    auto it = values.find(key);
    return it == values.end() ? def : it->second;
}

bool RunConfig::get_bool(const std::string& key) const { return get_text(key, "false") == "true"; }

void validate(const RunConfig& cfg) {
    auto fail = [&](const std::string& key, const std::string& msg) { bad(cfg.where(key), key, msg); };
    for (const auto& [key, val] : cfg.values) {
        const KeySpec* ks = find_key(key);
        if (ks->type == ValType::Int || ks->type == ValType::IntList) {
            for (auto x : cfg.get_ints(key))
                if (x <= 0) fail(key, "must be positive");
        } else if (ks->type == ValType::Real || ks->type == ValType::RealList) {
            for (auto x : cfg.get_reals(key))
                if (!(x > 0.0)) fail(key, "must be positive");
        }
    }
    if (cfg.has("zeta")) {
        const double z = cfg.get_real("zeta", 0.5);
        if (!(z > 0.0 && z <= 2.0)) fail("zeta", "must lie in (0, 2]");
    }
    if (cfg.has("gamma")) {
        const double g = cfg.get_real("gamma", 0.5);
        if (!(g > 0.0 && g < 1.0)) fail("gamma", "must lie in (0, 1)");
    }
    if (cfg.has("qmax") && cfg.get_int("qmax", 2) < 2) fail("qmax", "must be at least 2");
    if (cfg.has("profile")) {
        const auto p = cfg.get_text("profile");
        if (p != "smooth" && p != "indicator") fail("profile", "expected smooth or indicator");
    }
    if (cfg.has("mollifier")) {
        const auto p = cfg.get_text("mollifier");
        if (p != "gaussian" && p != "bump") fail("mollifier", "expected gaussian or bump");
    }
    if (cfg.has("action")) {
        const auto a = cfg.get_text("action");
        if (a != "inspect" && a != "clear") fail("action", "expected inspect or clear");
    }
    if (cfg.has("v")) {
        const auto v = cfg.get_reals("v");
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] < v[i - 1])) fail("v", "must be strictly decreasing");
    }
}

} // namespace ellipsum::cli
