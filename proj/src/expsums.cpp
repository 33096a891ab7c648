#include "ellipsum/expsums.hpp"

#include "ellipsum/ddouble.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/hash.hpp"
#include "ellipsum/numeric.hpp"

#include <cmath>

namespace ellipsum {

namespace {

std::uint64_t matrix_digest(const QuadFormCtx& ctx) { return ctx_digest(ctx, ""); }

double block_sum(const ExpSumSeries& s, std::int64_t lo, std::int64_t hi, double expo) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(hi - lo));
    for (std::int64_t p = lo; p < hi; ++p) {
        const double a2 = std::norm(s.r[static_cast<std::size_t>(p)]);
        if (a2 != 0.0) terms.push_back(a2 * std::pow(static_cast<double>(p), -expo));
    }
    return pairwise_sum(terms);
}

} // namespace

ExpSumSeries series_from_buckets(const QuadFormCtx& ctx, const ShiftVector& alpha, ShellBuckets&& sb) {
    ExpSumSeries s;
    s.matrix_digest = matrix_digest(ctx);
    s.alpha_spec = alpha.spec;
    s.n = ctx.n;
    s.detM = ctx.detM;
    s.volume = ctx.volume;
    s.p_max = sb.p_max;
    s.r = std::move(sb.sums);
    s.counts = std::move(sb.counts);
    s.R_cum.assign(s.r.size(), 0.0);
    DD acc(0.0);
    for (std::size_t p = 1; p < s.r.size(); ++p) {
        acc += DD(std::norm(s.r[p]));
        s.R_cum[p] = acc.to_double();
    }
    return s;
}

ExpSumSeries rep_sums(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t p_max, const EnumOptions& opt) {
    return series_from_buckets(ctx, alpha, bucket_shells(ctx, alpha, p_max, opt));
}

std::vector<TraceRow> mean_square_trace(const ExpSumSeries& series, const std::vector<std::int64_t>& checkpoints) {
    std::vector<TraceRow> out;
    for (std::int64_t N : checkpoints) {
        if (N < 1 || N > series.p_max)
            throw Error(ErrorCode::CheckpointOutOfRange, "checkpoint " + std::to_string(N) + " outside [1, p_max]");
        TraceRow row;
        row.N = N;
        row.ratio = series.R_cum[static_cast<std::size_t>(N)] / std::pow(static_cast<double>(N), series.n / 2.0);
        row.target = series.volume;
        out.push_back(row);
    }
    return out;
}

VarianceSeries variance_series(const ExpSumSeries& adj, std::int64_t detM, std::int64_t P) {
    if (P < 1) throw Error(ErrorCode::InvalidArgument, "truncation P must be at least 1");
    if (P > adj.p_max) throw Error(ErrorCode::TruncationExceedsSeries, "P exceeds the adjugate series length");
    const int n = adj.n;
    const double expo = (n + 1) / 2.0;
    VarianceSeries v;
    v.P = P;
    std::vector<double> blocks;
    for (std::int64_t lo = 1; lo <= P; lo *= 2) {
        const std::int64_t hi = std::min<std::int64_t>(2 * lo, P + 1);
        const double b = block_sum(adj, lo, hi, expo);
        blocks.push_back(b);
        v.C_emp = std::max(v.C_emp, b * std::sqrt(static_cast<double>(lo)));
    }
    const double scale = std::pow(static_cast<double>(detM), (n - 1) / 2.0);
    v.A = scale * pairwise_sum(blocks);
    v.C_emp *= scale;
    v.tail_bound = v.C_emp / std::sqrt(static_cast<double>(P));
    return v;
}

VarianceSeries variance_series(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t P, const EnumOptions& opt) {
    const QuadFormCtx adj = adjugate_ctx(ctx);
    return variance_series(rep_sums(adj, alpha, P, opt), ctx.detM, P);
}

AbelReport abel_block_check(const ExpSumSeries& series, double b) {
    AbelReport rep;
    rep.b = b;
    for (int k = 0; (std::int64_t{1} << (k + 1)) - 1 <= series.p_max; ++k) {
        const std::int64_t lo = std::int64_t{1} << k;
        AbelBlock blk;
        blk.k = k;
        blk.value = block_sum(series, lo, 2 * lo, b);
        blk.scaled = blk.value / std::pow(2.0, k * (series.n / 2.0 - b));
        rep.C_max = std::max(rep.C_max, blk.scaled);
        rep.blocks.push_back(blk);
    }
    return rep;
}

} // namespace ellipsum
