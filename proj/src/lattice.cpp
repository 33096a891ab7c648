#include "ellipsum/lattice.hpp"

#include "ellipsum/ddouble.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/hash.hpp"
#include "ellipsum/numeric.hpp"
#include "ellipsum/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ellipsum {

namespace {

// Fincke-Pohst descent on the upper factor U = L^T, outermost coordinate last.
class Engine {
public:
    Engine(const QuadFormCtx& ctx, std::vector<double> center, double R2)
        : n_(ctx.n), U_(ctx.chol.transpose()), c_(std::move(center)), R2_(R2) {
        mu_ = U_;
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) mu_(i, j) = U_(i, j) / U_(i, i);
        guard_ = 1e-12 * R2_ + 1e-300;
    }

    std::pair<std::int64_t, std::int64_t> outer_range() const { return range(n_ - 1, 0.0, R2_); }

    // Row(x, lo0, hi0): x[1..n-1] fixed, x[0] ranges over [lo0, hi0]
    template <class Row>
    void run_outer(std::int64_t xo, Row& row) const {
        std::vector<std::int64_t> x(static_cast<std::size_t>(n_), 0);
        if (n_ == 1) {
            x[0] = xo;
            row(x, xo, xo);
            return;
        }
        x[static_cast<std::size_t>(n_ - 1)] = xo;
        const double part = U_(n_ - 1, n_ - 1) * (static_cast<double>(xo) - c_[static_cast<std::size_t>(n_ - 1)]);
        descend(n_ - 2, x, R2_ - part * part, row);
    }

private:
    std::pair<std::int64_t, std::int64_t> range(int i, double s, double rem) const {
        const double w = std::sqrt(std::max(rem + guard_, 0.0)) / U_(i, i);
        const double mid = c_[static_cast<std::size_t>(i)] - s;
        const double slack = 1e-9 * (1.0 + w);
        return {static_cast<std::int64_t>(std::ceil(mid - w - slack)),
                static_cast<std::int64_t>(std::floor(mid + w + slack))};
    }

    template <class Row>
    void descend(int i, std::vector<std::int64_t>& x, double rem, Row& row) const {
        if (rem + guard_ < 0.0) return;
        double s = 0.0;
        for (int j = i + 1; j < n_; ++j)
            s += mu_(i, j) * (static_cast<double>(x[static_cast<std::size_t>(j)]) - c_[static_cast<std::size_t>(j)]);
        auto [lo, hi] = range(i, s, rem);
        if (i == 0) {
            if (lo <= hi) row(x, lo, hi);
            return;
        }
        for (std::int64_t v = lo; v <= hi; ++v) {
            x[static_cast<std::size_t>(i)] = v;
            const double part = U_(i, i) * (static_cast<double>(v) - c_[static_cast<std::size_t>(i)] + s);
            descend(i - 1, x, rem - part * part, row);
        }
        x[static_cast<std::size_t>(i)] = 0;
    }

    int n_;
    Eigen::MatrixXd U_, mu_;
    std::vector<double> c_;
    double R2_;
    double guard_;
};

void check_budget(const QuadFormCtx& ctx, double R, double budget) {
    const double est = ctx.volume * std::pow(R, ctx.n);
    if (est > budget)
        throw Error(ErrorCode::BudgetExceeded,
                    "estimated " + std::to_string(est) + " lattice points exceeds cap " + std::to_string(budget));
}

// Exact integer pieces of Q(x) for a row: Q(x0) = M00 x0^2 + 2 b x0 + rest.
struct ExactRow {
    __int128 b = 0, rest = 0, m00 = 0;

    ExactRow(const QuadFormCtx& ctx, const std::vector<std::int64_t>& x) {
        const int n = ctx.n;
        m00 = ctx.M(0, 0);
        for (int j = 1; j < n; ++j) b += static_cast<__int128>(ctx.M(0, j)) * x[static_cast<std::size_t>(j)];
        for (int i = 1; i < n; ++i)
            for (int j = 1; j < n; ++j)
                rest += static_cast<__int128>(ctx.M(i, j)) * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)];
    }
    __int128 at(std::int64_t x0) const { return m00 * x0 * x0 + 2 * b * x0 + rest; }
};

// Double-double pieces of Q(x - alpha) for a row.
struct ShiftedRow {
    DD b, rest, a0;
    double m00;

    ShiftedRow(const QuadFormCtx& ctx, const std::vector<DD>& alpha, const std::vector<std::int64_t>& x) {
        const int n = ctx.n;
        std::vector<DD> y(static_cast<std::size_t>(n));
        for (int j = 1; j < n; ++j) y[static_cast<std::size_t>(j)] = DD(static_cast<double>(x[static_cast<std::size_t>(j)])) - alpha[static_cast<std::size_t>(j)];
        m00 = static_cast<double>(ctx.M(0, 0));
        a0 = alpha[0];
        for (int j = 1; j < n; ++j) b += y[static_cast<std::size_t>(j)] * static_cast<double>(ctx.M(0, j));
        for (int i = 1; i < n; ++i) {
            rest += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)] * static_cast<double>(ctx.M(i, i));
            for (int j = i + 1; j < n; ++j)
                rest += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * (2.0 * static_cast<double>(ctx.M(i, j)));
        }
    }
    DD at(std::int64_t x0) const {
        DD y0 = DD(static_cast<double>(x0)) - a0;
        return y0 * y0 * m00 + y0 * b * 2.0 + rest;
    }
};

} // namespace

std::uint64_t ctx_digest(const QuadFormCtx& ctx, const std::string& alpha_spec) {
    std::uint64_t h = fnv1a(&ctx.n, sizeof(ctx.n));
    for (Eigen::Index i = 0; i < ctx.M.size(); ++i) {
        const std::int64_t v = ctx.M.data()[i];
        h = fnv1a(&v, sizeof(v), h);
    }
    return fnv1a(alpha_spec, h);
}

std::int64_t enumerate(const QuadFormCtx& ctx, const ShiftVector& center, double R, const Visitor& visit,
                       double budget) {
    if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "enumeration radius must be positive");
    if (center.n != ctx.n) throw Error(ErrorCode::DimensionMismatch, "center dimension differs from matrix");
    check_budget(ctx, R, budget);
    const double R2 = R * R;
    const bool zero = center.is_zero();
    const auto alpha = center.as_dd();
    Engine eng(ctx, center.as_double(), R2);
    std::int64_t count = 0;
    IntVector m(ctx.n);
    auto row = [&](std::vector<std::int64_t>& x, std::int64_t lo, std::int64_t hi) {
        for (int j = 1; j < ctx.n; ++j) m[j] = x[static_cast<std::size_t>(j)];
        if (zero) {
            ExactRow er(ctx, x);
            for (std::int64_t v = lo; v <= hi; ++v) {
                const double q = static_cast<double>(er.at(v));
                if (q <= R2) {
                    m[0] = v;
                    ++count;
                    visit(m, q);
                }
            }
        } else {
            ShiftedRow sr(ctx, alpha, x);
            for (std::int64_t v = lo; v <= hi; ++v) {
                const DD q = sr.at(v);
                if (dd_sqrt(q).to_double() <= R) {
                    m[0] = v;
                    ++count;
                    visit(m, q.to_double());
                }
            }
        }
    };
    auto [olo, ohi] = eng.outer_range();
    for (std::int64_t xo = olo; xo <= ohi; ++xo) eng.run_outer(xo, row);
    return count;
}

RadiiMultiset build_radii(const QuadFormCtx& ctx, const ShiftVector& alpha, double R_max, const EnumOptions& opt) {
    if (!(R_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "R_max must be positive");
    if (alpha.n != ctx.n) throw Error(ErrorCode::DimensionMismatch, "shift dimension differs from matrix");
    check_budget(ctx, R_max, opt.budget);
    const bool zero = alpha.is_zero();
    const auto a = alpha.as_dd();
    const double R2 = R_max * R_max;
    Engine eng(ctx, alpha.as_double(), R2);
    auto [olo, ohi] = eng.outer_range();
    const std::size_t nblocks = ohi >= olo ? static_cast<std::size_t>(ohi - olo + 1) : 0;
    std::vector<std::vector<double>> per_block(nblocks);
    for_blocks(nblocks, opt.workers, [&](std::size_t b, unsigned) {
        auto& out = per_block[b];
        auto row = [&](std::vector<std::int64_t>& x, std::int64_t lo, std::int64_t hi) {
            if (zero) {
                ExactRow er(ctx, x);
                for (std::int64_t v = lo; v <= hi; ++v) {
                    const double q = static_cast<double>(er.at(v));
                    if (q <= R2) {
                        const double r = std::sqrt(q);
                        if (r <= R_max) out.push_back(r);
                    }
                }
            } else {
                ShiftedRow sr(ctx, a, x);
                for (std::int64_t v = lo; v <= hi; ++v) {
                    const double r = dd_sqrt(sr.at(v)).to_double();
                    if (r <= R_max) out.push_back(r);
                }
            }
        };
        eng.run_outer(olo + static_cast<std::int64_t>(b), row);
    });
    RadiiMultiset rm;
    rm.ctx_digest = ctx_digest(ctx, alpha.spec);
    rm.R_max = R_max;
    std::size_t total = 0;
    for (const auto& v : per_block) total += v.size();
    rm.radii.reserve(total);
    for (auto& v : per_block) {
        rm.radii.insert(rm.radii.end(), v.begin(), v.end());
        std::vector<double>().swap(v);
    }
    std::sort(rm.radii.begin(), rm.radii.end());
    return rm;
}

std::int64_t count_upto(const RadiiMultiset& rm, double t) {
    if (t > rm.R_max) throw Error(ErrorCode::RadiusOutOfRange, "t exceeds R_max of the radii multiset");
    if (t < 0.0) return 0;
    return std::upper_bound(rm.radii.begin(), rm.radii.end(), t) - rm.radii.begin();
}

ShellBuckets bucket_shells(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t p_max,
                           const EnumOptions& opt) {
    if (p_max < 1) throw Error(ErrorCode::InvalidArgument, "p_max must be at least 1");
    if (alpha.n != ctx.n) throw Error(ErrorCode::DimensionMismatch, "shift dimension differs from matrix");
    check_budget(ctx, std::sqrt(static_cast<double>(p_max)), opt.budget);
    const bool zero = alpha.is_zero();
    const auto a = alpha.as_dd();
    const std::size_t len = static_cast<std::size_t>(p_max) + 1;
    Engine eng(ctx, std::vector<double>(static_cast<std::size_t>(ctx.n), 0.0), static_cast<double>(p_max));
    auto [olo, ohi] = eng.outer_range();
    const std::size_t nblocks = static_cast<std::size_t>(ohi - olo + 1);

    // each worker owns full-length accumulators; fixed point makes the merge exact
    unsigned workers = std::max(1u, opt.workers);
    const double per_worker_bytes = 40.0 * static_cast<double>(len);
    workers = static_cast<unsigned>(std::max(1.0, std::min<double>(workers, 1.5e9 / per_worker_bytes)));
    std::vector<std::vector<FixedComplex>> acc(workers);
    std::vector<std::vector<std::int64_t>> cnt(workers);

    for_blocks(nblocks, workers, [&](std::size_t b, unsigned w) {
        if (acc[w].empty()) {
            acc[w].assign(len, FixedComplex{});
            cnt[w].assign(len, 0);
        }
        auto& A = acc[w];
        auto& C = cnt[w];
        auto row = [&](std::vector<std::int64_t>& x, std::int64_t lo, std::int64_t hi) {
            ExactRow er(ctx, x);
            DD phase_rest(0.0);
            if (!zero)
                for (int j = 1; j < ctx.n; ++j) phase_rest += a[static_cast<std::size_t>(j)] * static_cast<double>(x[static_cast<std::size_t>(j)]);
            for (std::int64_t v = lo; v <= hi; ++v) {
                const __int128 q = er.at(v);
                if (q > p_max) continue;
                const auto p = static_cast<std::size_t>(q);
                ++C[p];
                if (zero) {
                    A[p].add(1.0, 0.0);
                } else {
                    const double th = dd_frac_centered(phase_rest + a[0] * static_cast<double>(v));
                    // e(t) = exp(-2 pi i t)
                    A[p].add(std::cos(kTwoPi * th), -std::sin(kTwoPi * th));
                }
            }
        };
        eng.run_outer(olo + static_cast<std::int64_t>(b), row);
    });

    ShellBuckets sb;
    sb.p_max = p_max;
    sb.sums.resize(len);
    sb.counts.assign(len, 0);
    for (std::size_t p = 0; p < len; ++p) {
        FixedComplex f;
        for (unsigned w = 0; w < workers; ++w) {
            if (acc[w].empty()) continue;
            f += acc[w][p];
            sb.counts[p] += cnt[w][p];
        }
        sb.sums[p] = f.value();
    }
    return sb;
}

} // namespace ellipsum
