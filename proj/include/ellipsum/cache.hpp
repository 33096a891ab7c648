#pragma once

#include "ellipsum/expsums.hpp"
#include "ellipsum/lattice.hpp"
#include "ellipsum/quadform.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace ellipsum {

constexpr std::uint32_t kCacheVersion = 1;

enum class CacheKind : std::uint8_t { Radii = 1, Series = 2 };

// $ELLIPSUM_CACHE, else ${XDG_CACHE_HOME:-$HOME/.cache}/ellipsum.
std::filesystem::path default_cache_dir();

// Stable file name for one (kind, matrix, alpha spec, bound) key.
std::string cache_file_name(CacheKind kind, const IntMatrix& M, const std::string& alpha_spec, double bound);

void write_radii(const std::filesystem::path& file, const IntMatrix& M, const std::string& alpha_spec,
                 const RadiiMultiset& rm);
void write_series(const std::filesystem::path& file, const IntMatrix& M, const ExpSumSeries& s);

// Both readers throw CorruptCache on bad magic, version, digest, truncation,
// or a header that does not match the requested key.
RadiiMultiset read_radii(const std::filesystem::path& file, const IntMatrix& M, const std::string& alpha_spec,
                         double R_max);
ExpSumSeries read_series(const std::filesystem::path& file, const IntMatrix& M, const std::string& alpha_spec,
                         std::int64_t p_max);

struct CacheEntryInfo {
    std::string file;
    std::string kind; // "radii", "series" or "unknown"
    int n = 0;
    std::string matrix;
    std::string alpha_spec;
    double bound = 0.0;
    std::uintmax_t bytes = 0;
    std::uint64_t digest = 0;
    bool valid = false;
    std::string error;
};

std::vector<CacheEntryInfo> inspect_cache(const std::filesystem::path& dir);
std::size_t clear_cache(const std::filesystem::path& dir); // number of files removed

/// Get-or-build front end. A disabled store always recomputes and writes nothing.
class CacheStore {
public:
    CacheStore(std::filesystem::path dir, bool enabled);

    RadiiMultiset radii(const IntMatrix& M, const std::string& alpha_spec, double R_max,
                        const std::function<RadiiMultiset()>& build);
    ExpSumSeries series(const IntMatrix& M, const std::string& alpha_spec, std::int64_t p_max,
                        const std::function<ExpSumSeries()>& build);

    struct Event {
        std::string file;
        std::string status; // "hit", "miss", "recomputed", "disabled"
        std::uint64_t digest = 0;
    };
    const std::vector<Event>& events() const { return events_; }
    bool enabled() const { return enabled_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    bool enabled_;
    std::vector<Event> events_;
};

} // namespace ellipsum
