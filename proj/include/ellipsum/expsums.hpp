#pragma once

#include "ellipsum/lattice.hpp"

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ellipsum {

/// r[M,alpha](p) for 0 <= p <= p_max (index 0 is the origin term) and the
/// cumulative R(N) = sum_{1 <= p <= N} |r(p)|^2.
struct ExpSumSeries {
    std::uint64_t matrix_digest = 0;
    std::string alpha_spec;
    int n = 0;
    std::int64_t detM = 0;
    double volume = 0.0;
    std::int64_t p_max = 0;
    std::vector<std::complex<double>> r;
    std::vector<std::int64_t> counts;
    std::vector<double> R_cum;
};

ExpSumSeries series_from_buckets(const QuadFormCtx& ctx, const ShiftVector& alpha, ShellBuckets&& sb);

ExpSumSeries rep_sums(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t p_max, const EnumOptions& opt = {});

struct TraceRow {
    std::int64_t N = 0;
    double ratio = 0.0;  // R(N) / N^{n/2}
    double target = 0.0; // volume of the ellipsoid
};

std::vector<TraceRow> mean_square_trace(const ExpSumSeries& series, const std::vector<std::int64_t>& checkpoints);

struct VarianceSeries {
    double A = 0.0;
    double tail_bound = 0.0;
    double C_emp = 0.0;
    std::int64_t P = 0;
};

// adj_series is the series of the adjugate form; detM is det of the original form.
VarianceSeries variance_series(const ExpSumSeries& adj_series, std::int64_t detM, std::int64_t P);

// Builds the adjugate series internally.
VarianceSeries variance_series(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t P,
                               const EnumOptions& opt = {});

struct AbelBlock {
    int k = 0;           // block [2^k, 2^{k+1})
    double value = 0.0;  // sum |r(p)|^2 p^{-b}
    double scaled = 0.0; // value / 2^{k(n/2 - b)}
};

struct AbelReport {
    double b = 0.0;
    double C_max = 0.0;
    std::vector<AbelBlock> blocks;
};

AbelReport abel_block_check(const ExpSumSeries& series, double b);

} // namespace ellipsum
