#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ellipsum::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum class ValType { Int, Real, IntList, RealList, Text, Bool };

struct KeySpec {
    const char* key; // config key; the flag is "--" + key with '_' -> '-'
    ValType type;
    const char* help;
};

const std::vector<KeySpec>& key_schema();
const KeySpec* find_key(const std::string& key);
std::string flag_name(const std::string& key);

// Keys each subcommand reads, beyond the shared output/cache/worker keys.
const std::vector<std::string>& command_keys(const std::string& command);
const std::vector<std::string>& commands();

/// Parsed run configuration. Values are stored in canonical text form; the
/// origin map remembers where each value came from for error messages.
struct RunConfig {
    std::string command;
    std::map<std::string, std::string> values;
    std::map<std::string, std::string> origin;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    double get_real(const std::string& key, double def) const;
    std::vector<std::int64_t> get_ints(const std::string& key) const;
    std::vector<double> get_reals(const std::string& key) const;
    std::string get_text(const std::string& key, const std::string& def = "") const;
    bool get_bool(const std::string& key) const;
    std::string where(const std::string& key) const;
};

// Canonicalizes raw text for the key's type; throws InvalidArgument naming origin.
void set_value(RunConfig& cfg, const std::string& key, const std::string& raw, const std::string& origin);

// key=value lines; '#' starts a comment; "command" is a key like any other.
RunConfig parse_config_text(const std::string& text, const std::string& source);
RunConfig load_config_file(const std::string& path);

// Sorted "key=value" lines, command first. serialize(parse(serialize(c))) == serialize(c).
std::string serialize(const RunConfig& cfg);

// Range checks on numeric bounds.
void validate(const RunConfig& cfg);

// Formatting shared by every emitter: 17 significant digits.
std::string fmt17(double x);

// Full command-line entry point; returns the process exit status.
int cli_main(int argc, const char* const* argv);

// Dispatch a validated config. Output goes to the configured --out or to `out`.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace ellipsum::cli
