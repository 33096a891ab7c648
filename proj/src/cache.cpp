#include "ellipsum/cache.hpp"

#include "ellipsum/errors.hpp"
#include "ellipsum/hash.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace ellipsum {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'E', 'L', 'S', 'M'};

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void i64(std::int64_t v) { le(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) {
        std::uint64_t b;
        std::memcpy(&b, &v, 8);
        le(b, 8);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }
    const std::string& bytes() const { return buf_; }

private:
    void le(std::uint64_t v, int k) {
        for (int i = 0; i < k; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string buf_;
};

class Reader {
public:
    explicit Reader(const std::string& b) : b_(b) {}
    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(le(8)); }
    double f64() {
        const std::uint64_t b = le(8);
        double v;
        std::memcpy(&v, &b, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t len = u32();
        return std::string(take(len), len);
    }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    const char* take(std::size_t k) {
        if (k > remaining()) throw Error(ErrorCode::CorruptCache, "cache file is truncated");
        const char* p = b_.data() + pos_;
        pos_ += k;
        return p;
    }
    std::uint64_t le(int k) {
        const char* p = take(static_cast<std::size_t>(k));
        std::uint64_t v = 0;
        for (int i = 0; i < k; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }
    const std::string& b_;
    std::size_t pos_ = 0;
};

struct Header {
    CacheKind kind;
    int n = 0;
    std::vector<std::int64_t> entries;
    std::string alpha;
    double bound = 0.0;
};

void write_header(Writer& w, CacheKind kind, const IntMatrix& M, const std::string& alpha, double bound) {
    w.u8(static_cast<std::uint8_t>(kMagic[0]));
    w.u8(static_cast<std::uint8_t>(kMagic[1]));
    w.u8(static_cast<std::uint8_t>(kMagic[2]));
    w.u8(static_cast<std::uint8_t>(kMagic[3]));
    w.u32(kCacheVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    w.u32(static_cast<std::uint32_t>(M.rows()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) w.i64(M(i, j));
    w.str(alpha);
    w.f64(bound);
}

// Checks magic, version and trailing digest; returns the body reader position past the header.
std::string load_verified(const fs::path& file, std::uint64_t* digest_out = nullptr) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open cache file " + file.string());
    std::string b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (b.size() < 4 + 4 + 8 || std::memcmp(b.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::CorruptCache, "bad magic in " + file.string());
    Reader tail(b);
    tail.u32();
    if (tail.u32() != kCacheVersion) throw Error(ErrorCode::CorruptCache, "unsupported cache version in " + file.string());
    const std::size_t body = b.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i)
        stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[body + static_cast<std::size_t>(i)])) << (8 * i);
    if (fnv1a(b.data(), body) != stored) throw Error(ErrorCode::CorruptCache, "digest mismatch in " + file.string());
    if (digest_out) *digest_out = stored;
    b.resize(body);
    return b;
}

Header read_header(Reader& r) {
    r.u32(); // magic, already checked
    r.u32(); // version
    Header h;
    const std::uint8_t k = r.u8();
    if (k != 1 && k != 2) throw Error(ErrorCode::CorruptCache, "unknown cache record kind");
    h.kind = static_cast<CacheKind>(k);
    h.n = static_cast<int>(r.u32());
    if (h.n < 1 || h.n > kMaxDim) throw Error(ErrorCode::CorruptCache, "bad dimension in cache header");
    for (int i = 0; i < h.n * h.n; ++i) h.entries.push_back(r.i64());
    h.alpha = r.str();
    h.bound = r.f64();
    return h;
}

void expect_key(const Header& h, CacheKind kind, const IntMatrix& M, const std::string& alpha, double bound) {
    bool ok = h.kind == kind && h.n == M.rows() && h.alpha == alpha && h.bound == bound;
    for (int i = 0; ok && i < h.n; ++i)
        for (int j = 0; ok && j < h.n; ++j) ok = h.entries[static_cast<std::size_t>(i * h.n + j)] == M(i, j);
    if (!ok) throw Error(ErrorCode::CorruptCache, "cache header does not match the requested key");
}

void commit(const fs::path& file, Writer& w) {
    const std::uint64_t d = fnv1a(w.bytes().data(), w.bytes().size());
    w.u64(d);
    fs::create_directories(file.parent_path());
    const fs::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write cache file " + tmp.string());
        out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
        if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
    }
    fs::rename(tmp, file);
}

std::string hex64(std::uint64_t v) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = d[v & 15];
    return s;
}

} // namespace

fs::path default_cache_dir() {
    if (const char* e = std::getenv("ELLIPSUM_CACHE"); e && *e) return fs::path(e);
    if (const char* x = std::getenv("XDG_CACHE_HOME"); x && *x) return fs::path(x) / "ellipsum";
    if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "ellipsum";
    return fs::temp_directory_path() / "ellipsum-cache";
}

std::string cache_file_name(CacheKind kind, const IntMatrix& M, const std::string& alpha_spec, double bound) {
    Writer w;
    write_header(w, kind, M, alpha_spec, bound);
    return std::string(kind == CacheKind::Radii ? "radii-" : "series-") + hex64(fnv1a(w.bytes().data(), w.bytes().size())) +
           ".elsm";
}

void write_radii(const fs::path& file, const IntMatrix& M, const std::string& alpha_spec, const RadiiMultiset& rm) {
    Writer w;
    write_header(w, CacheKind::Radii, M, alpha_spec, rm.R_max);
    w.u64(rm.ctx_digest);
    w.u64(rm.radii.size());
    for (double r : rm.radii) w.f64(r);
    commit(file, w);
}

void write_series(const fs::path& file, const IntMatrix& M, const ExpSumSeries& s) {
    Writer w;
    write_header(w, CacheKind::Series, M, s.alpha_spec, static_cast<double>(s.p_max));
    w.u64(s.matrix_digest);
    w.u32(static_cast<std::uint32_t>(s.n));
    w.i64(s.detM);
    w.f64(s.volume);
    w.i64(s.p_max);
    w.u64(s.r.size());
    for (const auto& z : s.r) {
        w.f64(z.real());
        w.f64(z.imag());
    }
    for (auto c : s.counts) w.i64(c);
    for (double v : s.R_cum) w.f64(v);
    commit(file, w);
}

RadiiMultiset read_radii(const fs::path& file, const IntMatrix& M, const std::string& alpha_spec, double R_max) {
    const std::string b = load_verified(file);
    Reader r(b);
    expect_key(read_header(r), CacheKind::Radii, M, alpha_spec, R_max);
    RadiiMultiset rm;
    rm.R_max = R_max;
    rm.ctx_digest = r.u64();
    const std::uint64_t len = r.u64();
    if (len * 8 != r.remaining()) throw Error(ErrorCode::CorruptCache, "radii payload has the wrong length");
    rm.radii.resize(len);
    for (auto& x : rm.radii) x = r.f64();
    return rm;
}

ExpSumSeries read_series(const fs::path& file, const IntMatrix& M, const std::string& alpha_spec, std::int64_t p_max) {
    const std::string b = load_verified(file);
    Reader r(b);
    expect_key(read_header(r), CacheKind::Series, M, alpha_spec, static_cast<double>(p_max));
    ExpSumSeries s;
    s.alpha_spec = alpha_spec;
    s.matrix_digest = r.u64();
    s.n = static_cast<int>(r.u32());
    s.detM = r.i64();
    s.volume = r.f64();
    s.p_max = r.i64();
    const std::uint64_t len = r.u64();
    if (s.p_max != p_max || len != static_cast<std::uint64_t>(p_max) + 1 || len * 32 != r.remaining())
        throw Error(ErrorCode::CorruptCache, "series payload has the wrong length");
    s.r.resize(len);
    for (auto& z : s.r) {
        const double re = r.f64();
        z = {re, r.f64()};
    }
    s.counts.resize(len);
    for (auto& c : s.counts) c = r.i64();
    s.R_cum.resize(len);
    for (auto& v : s.R_cum) v = r.f64();
    return s;
}

std::vector<CacheEntryInfo> inspect_cache(const fs::path& dir) {
    std::vector<CacheEntryInfo> out;
    if (!fs::exists(dir)) return out;
    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(dir))
        if (de.is_regular_file() && de.path().extension() == ".elsm") files.push_back(de.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        CacheEntryInfo info;
        info.file = f.filename().string();
        info.bytes = fs::file_size(f);
        info.kind = "unknown";
        try {
            const std::string b = load_verified(f, &info.digest);
            Reader r(b);
            const Header h = read_header(r);
            info.kind = h.kind == CacheKind::Radii ? "radii" : "series";
            info.n = h.n;
            IntMatrix M(h.n, h.n);
            for (int i = 0; i < h.n; ++i)
                for (int j = 0; j < h.n; ++j) M(i, j) = h.entries[static_cast<std::size_t>(i * h.n + j)];
            info.matrix = matrix_to_string(M);
            info.alpha_spec = h.alpha;
            info.bound = h.bound;
            info.valid = true;
        } catch (const Error& e) {
            info.error = e.what();
        }
        out.push_back(std::move(info));
    }
    return out;
}

std::size_t clear_cache(const fs::path& dir) {
    std::size_t removed = 0;
    if (!fs::exists(dir)) return 0;
    for (const auto& de : fs::directory_iterator(dir)) {
        const auto ext = de.path().extension();
        if (de.is_regular_file() && (ext == ".elsm" || ext == ".tmp")) removed += fs::remove(de.path()) ? 1 : 0;
    }
    return removed;
}

CacheStore::CacheStore(fs::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {}

RadiiMultiset CacheStore::radii(const IntMatrix& M, const std::string& alpha_spec, double R_max,
                                const std::function<RadiiMultiset()>& build) {
    if (!enabled_) {
        events_.push_back({"", "disabled", 0});
        return build();
    }
    const fs::path file = dir_ / cache_file_name(CacheKind::Radii, M, alpha_spec, R_max);
    std::string status = "miss";
    if (fs::exists(file)) {
        try {
            RadiiMultiset rm = read_radii(file, M, alpha_spec, R_max);
            std::uint64_t d = 0;
            load_verified(file, &d);
            events_.push_back({file.string(), "hit", d});
            return rm;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CorruptCache) throw;
            status = "recomputed";
        }
    }
    RadiiMultiset rm = build();
    write_radii(file, M, alpha_spec, rm);
    std::uint64_t d = 0;
    load_verified(file, &d);
    events_.push_back({file.string(), status, d});
    return rm;
}

ExpSumSeries CacheStore::series(const IntMatrix& M, const std::string& alpha_spec, std::int64_t p_max,
                                const std::function<ExpSumSeries()>& build) {
    if (!enabled_) {
        events_.push_back({"", "disabled", 0});
        return build();
    }
    const fs::path file = dir_ / cache_file_name(CacheKind::Series, M, alpha_spec, static_cast<double>(p_max));
    std::string status = "miss";
    if (fs::exists(file)) {
        try {
            ExpSumSeries s = read_series(file, M, alpha_spec, p_max);
            std::uint64_t d = 0;
            load_verified(file, &d);
            events_.push_back({file.string(), "hit", d});
            return s;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::CorruptCache) throw;
            status = "recomputed";
        }
    }
    ExpSumSeries s = build();
    write_series(file, M, s);
    std::uint64_t d = 0;
    load_verified(file, &d);
    events_.push_back({file.string(), status, d});
    return s;
}

} // namespace ellipsum
