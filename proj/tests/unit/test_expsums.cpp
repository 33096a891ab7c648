#include <doctest.h>

#include "ellipsum/errors.hpp"
#include "ellipsum/expsums.hpp"
#include "ellipsum/numeric.hpp"

#include <cmath>

using namespace ellipsum;

namespace {

IntMatrix diag(std::vector<std::int64_t> a) {
    const auto n = static_cast<Eigen::Index>(a.size());
    IntMatrix M = IntMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) = a[static_cast<std::size_t>(i)];
    return M;
}

} // namespace

TEST_CASE("rep_sums small values") {
    const QuadFormCtx i2 = build_ctx(diag({1, 1}));
    const ExpSumSeries s = rep_sums(i2, zero_shift(2), 10);
    CHECK(s.r[1].real() == 4.0);
    CHECK(s.r[2].real() == 4.0);
    CHECK(s.r[3] == std::complex<double>(0.0, 0.0));
    CHECK(s.R_cum[2] == 32.0);
    CHECK(s.r[0].real() == 1.0); // origin slot

    const ExpSumSeries h = rep_sums(i2, parse_shift("0.5,0.5", 2), 50);
    CHECK(h.r[1].real() == doctest::Approx(-4.0));
    for (std::int64_t p = 1; p <= 50; ++p) CHECK(std::fabs(h.r[static_cast<std::size_t>(p)].imag()) < 1e-12);
}

TEST_CASE("series invariants") {
    IntMatrix M(2, 2);
    M << 2, 1, 1, 3;
    const QuadFormCtx ctx = build_ctx(M);
    const ShiftVector a = parse_shift("sqrt2-1,sqrt3-1", 2);
    const ExpSumSeries s = rep_sums(ctx, a, 3000);
    const ExpSumSeries sn = rep_sums(ctx, negated(a), 3000);
    const ExpSumSeries s0 = rep_sums(ctx, zero_shift(2), 3000);
    for (std::int64_t p = 1; p <= 3000; ++p) {
        const auto i = static_cast<std::size_t>(p);
        CHECK(s.R_cum[i] >= s.R_cum[i - 1]);
        CHECK(std::abs(s.r[i]) <= s0.r[i].real() + 1e-9);
        CHECK(s0.r[i].real() == static_cast<double>(s.counts[i]));
        CHECK(std::abs(sn.r[i] - std::conj(s.r[i])) < 1e-10);
    }
}

TEST_CASE("mean_square_trace") {
    const ExpSumSeries s = rep_sums(build_ctx(diag({1})), parse_shift("sqrt2-1", 1), 100000);
    const auto rows = mean_square_trace(s, {100000});
    CHECK(rows[0].target == doctest::Approx(2.0));
    CHECK(rows[0].ratio == doctest::Approx(2.0).epsilon(0.1));
    CHECK_THROWS_AS(mean_square_trace(s, {100001}), Error);

    // boundedness backing the hypothesis used for non-diagonal forms
    IntMatrix M(2, 2);
    M << 2, 1, 1, 2;
    const ExpSumSeries t = rep_sums(build_ctx(M), parse_shift("sqrt2-1,sqrt3-1", 2), 100000);
    for (std::int64_t N = 1000; N <= 100000; N += 997)
        CHECK(t.R_cum[static_cast<std::size_t>(N)] / static_cast<double>(N) <= 3.0 * t.volume);
}

TEST_CASE("variance_series") {
    const QuadFormCtx i2 = build_ctx(diag({1, 1}));
    const VarianceSeries v1 = variance_series(i2, zero_shift(2), 1);
    CHECK(v1.A == doctest::Approx(16.0));

    const VarianceSeries v = variance_series(i2, parse_shift("sqrt2-1,sqrt3-1", 2), 100000);
    CHECK(v.A > 0.0);
    CHECK(v.tail_bound / v.A < 0.1);

    // direct oracle of the truncated series for a non-diagonal form
    IntMatrix M(2, 2);
    M << 2, 1, 1, 2;
    const QuadFormCtx ctx = build_ctx(M);
    const ShiftVector a = parse_shift("sqrt2-1,sqrt3-1", 2);
    const ExpSumSeries adj = rep_sums(adjugate_ctx(ctx), a, 2000);
    long double ref = 0;
    for (std::int64_t p = 1; p <= 2000; ++p) ref += std::norm(adj.r[static_cast<std::size_t>(p)]) * std::pow(static_cast<long double>(p), -1.5L);
    ref *= std::sqrt(3.0L);
    CHECK(variance_series(ctx, a, 2000).A == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));

    double prev = 0.0;
    for (std::int64_t P : {1000, 4000, 16000, 64000}) {
        const VarianceSeries w = variance_series(i2, a, P);
        CHECK(w.A >= prev);
        prev = w.A;
    }
    CHECK(variance_series(i2, a, 64000).tail_bound < variance_series(i2, a, 1000).tail_bound);

    ExpSumSeries zero = rep_sums(i2, zero_shift(2), 10);
    for (auto& z : zero.r) z = 0.0;
    CHECK(variance_series(zero, 1, 10).A == 0.0);
    CHECK_THROWS_AS(variance_series(zero, 1, 11), Error);
}

TEST_CASE("abel_block_check") {
    const QuadFormCtx i2 = build_ctx(diag({1, 1}));
    const ExpSumSeries s = rep_sums(i2, zero_shift(2), (1 << 14) - 1);
    const AbelReport r = abel_block_check(s, 1.5);
    CHECK(std::isfinite(r.C_max));
    CHECK(r.blocks.size() == 14);
    // scaled values stay bounded, so raw block values shrink like 2^{-k/2}
    CHECK(r.blocks.back().value < r.blocks[4].value);

    const ExpSumSeries sa = rep_sums(i2, parse_shift("sqrt2-1,sqrt3-1", 2), (1 << 14) - 1);
    const AbelReport flat = abel_block_check(sa, 1.0);
    const double first = flat.blocks[6].value, last = flat.blocks.back().value;
    CHECK(last / first == doctest::Approx(1.0).epsilon(0.25));

    ExpSumSeries zero = s;
    for (auto& z : zero.r) z = 0.0;
    CHECK(abel_block_check(zero, 1.5).C_max == 0.0);
}
