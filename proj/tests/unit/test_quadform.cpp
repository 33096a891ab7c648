#include <doctest.h>

#include "ellipsum/errors.hpp"
#include "ellipsum/numeric.hpp"
#include "ellipsum/quadform.hpp"

#include <random>

using namespace ellipsum;

namespace {

IntMatrix mat(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    IntMatrix M(n, n);
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (auto v : r) M(i, j++) = v;
        ++i;
    }
    return M;
}

// cofactor expansion, independent of Bareiss
std::int64_t det_cofactor(const IntMatrix& A) {
    const auto n = A.rows();
    if (n == 1) return A(0, 0);
    std::int64_t d = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        IntMatrix minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index c = 0, cc = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = A(r, c);
        d += ((j % 2) ? -1 : 1) * A(0, j) * det_cofactor(minor);
    }
    return d;
}

} // namespace

TEST_CASE("build_ctx on small forms") {
    const QuadFormCtx i2 = build_ctx(mat({{1, 0}, {0, 1}}));
    CHECK(i2.detM == 1);
    CHECK(i2.adjM == mat({{1, 0}, {0, 1}}));
    CHECK(i2.volume == doctest::Approx(kPi).epsilon(1e-14));

    const QuadFormCtx d14 = build_ctx(mat({{1, 0}, {0, 4}}));
    CHECK(d14.detM == 4);
    CHECK(d14.volume == doctest::Approx(kPi / 2).epsilon(1e-14));

    const QuadFormCtx d23 = build_ctx(mat({{2, 0}, {0, 3}}));
    CHECK(d23.detM == 6);
    CHECK(d23.adjM == mat({{3, 0}, {0, 2}}));
}

TEST_CASE("build_ctx rejects bad input") {
    CHECK_THROWS_AS(build_ctx(mat({{1, 2}, {0, 1}})), Error);
    CHECK_THROWS_AS(build_ctx(mat({{1, 2}, {2, 1}})), Error);
    CHECK_THROWS_AS(build_ctx(IntMatrix(0, 0)), Error);
    try {
        build_ctx(mat({{1, 2}, {2, 1}}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotPositiveDefinite);
    }
    try {
        build_ctx(mat({{1, 1}, {0, 1}}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotSymmetric);
    }
}

TEST_CASE("determinant, adjugate and Cholesky against oracles") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> de(-2, 2);
    for (int n = 1; n <= 7; ++n) {
        for (int rep = 0; rep < 4; ++rep) {
            IntMatrix B(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) B(i, j) = de(rng);
            const IntMatrix M = B.transpose() * B + IntMatrix::Identity(n, n);
            const QuadFormCtx ctx = build_ctx(M);
            CHECK(ctx.detM == det_cofactor(M));
            CHECK(M * ctx.adjM == ctx.detM * IntMatrix::Identity(n, n));
            CHECK(ctx.adjM == ctx.adjM.transpose());
            const Eigen::MatrixXd rec = ctx.chol * ctx.chol.transpose();
            CHECK((rec - M.cast<double>()).cwiseAbs().maxCoeff() <= 1e-12 * M.cast<double>().cwiseAbs().maxCoeff());
            // the adjugate is itself positive definite; its determinant det^{n-1} outgrows 64 bits for large n
            if (n <= 4) CHECK_NOTHROW(build_ctx(ctx.adjM));
            const double vn = unit_ball_volume(n);
            CHECK(ctx.volume * std::sqrt(static_cast<double>(ctx.detM)) == doctest::Approx(vn).epsilon(1e-12));
        }
    }
}

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(kPi));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
    CHECK(unit_ball_volume(4) == doctest::Approx(kPi * kPi / 2.0));
}

TEST_CASE("qform_value and dual norms") {
    const QuadFormCtx i2 = build_ctx(mat({{1, 0}, {0, 1}}));
    IntVector m(2);
    m << 3, 4;
    CHECK(qform_value(i2, m) == 25);
    const QuadFormCtx d12 = build_ctx(mat({{1, 0}, {0, 2}}));
    m << 1, 1;
    CHECK(qform_value(d12, m) == 3);
    const QuadFormCtx d23 = build_ctx(mat({{2, 0}, {0, 3}}));
    m << 0, 0;
    CHECK(qform_value(d23, m) == 0);

    m << 1, 0;
    CHECK(dual_norm_sq(i2, m) == Rational(1));
    const QuadFormCtx d14 = build_ctx(mat({{1, 0}, {0, 4}}));
    m << 0, 1;
    CHECK(dual_norm_sq(d14, m) == Rational(1, 4));
    m << 1, 1;
    CHECK(dual_norm_sq(d23, m) == Rational(5, 6));

    const QuadFormCtx q = build_ctx(mat({{3, 1, 0}, {1, 2, 1}, {0, 1, 4}}));
    const QuadFormCtx qa = adjugate_ctx(q);
    IntVector v(3);
    for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
            for (int c = -2; c <= 2; ++c) {
                v << a, b, c;
                CHECK(dual_norm_sq(q, v) * q.detM == Rational(qform_value(qa, v)));
            }
}

TEST_CASE("rationalize and matrix grammar") {
    RationalMatrix Q(2, 2);
    Q << Rational(1, 2), Rational(0), Rational(0), Rational(1, 3);
    const Rationalized r = rationalize(Q);
    CHECK(r.c == 6);
    CHECK(r.ctx.M == mat({{3, 0}, {0, 2}}));

    const Rationalized r2 = parse_matrix("qfull:[[1,1/2],[1/2,1]]");
    CHECK(r2.c == 2);
    CHECK(r2.ctx.M == mat({{2, 1}, {1, 2}}));

    const Rationalized r3 = parse_matrix("diag:1,1");
    CHECK(r3.c == 1);
    CHECK(r3.ctx.M == mat({{1, 0}, {0, 1}}));

    CHECK(parse_matrix("full:[[2,1],[1,2]]").ctx.detM == 3);
    CHECK(matrix_to_string(mat({{2, 1}, {1, 2}})) == "full:[[2,1],[1,2]]");
    CHECK(is_diagonal(mat({{2, 0}, {0, 2}})));
    CHECK_FALSE(is_diagonal(mat({{2, 1}, {1, 2}})));
    CHECK_THROWS_AS(parse_matrix("diag:1,x"), Error);
    CHECK_THROWS_AS(parse_matrix("full:[[1,2],[3]]"), Error);
    CHECK_THROWS_AS(parse_matrix("diag:1,1,1,1,1,1,1,1,1,1,1,1,1"), Error);
}
