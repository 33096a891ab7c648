#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>

namespace ellipsum {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using RationalMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

constexpr int kMaxDim = 12;

/// Integral positive-definite form with exact determinant and adjugate.
/// Immutable after build_ctx; share freely across threads.
struct QuadFormCtx {
    int n = 0;
    IntMatrix M;
    std::int64_t detM = 0;
    IntMatrix adjM;
    Eigen::MatrixXd chol; // lower triangular, chol * chol^T = M
    double volume = 0.0;  // volume of {x : x^T M x <= 1}
};

double unit_ball_volume(int n);

BigInt bareiss_det(const IntMatrix& A);

QuadFormCtx build_ctx(const IntMatrix& M);

// The form of the adjugate, as its own context.
QuadFormCtx adjugate_ctx(const QuadFormCtx& ctx);

std::int64_t qform_value(const QuadFormCtx& ctx, const IntVector& m);
double qform_value(const QuadFormCtx& ctx, const Eigen::VectorXd& x);
Rational qform_value(const QuadFormCtx& ctx, const Eigen::Matrix<Rational, Eigen::Dynamic, 1>& x);

// |m|^2 in the adjugate form divided by det M, exactly.
Rational dual_norm_sq(const QuadFormCtx& ctx, const IntVector& m);

struct Rationalized {
    std::int64_t c = 1; // radius map R -> sqrt(c) R
    QuadFormCtx ctx;
};

Rationalized rationalize(const RationalMatrix& Q);

// Matrix grammar: diag:a1,..  full:[[..],..]  qdiag:p/q,..  qfull:[[p/q,..],..]
Rationalized parse_matrix(const std::string& spec);

// Canonical text form, e.g. "full:[[2,1],[1,2]]".
std::string matrix_to_string(const IntMatrix& M);

bool is_diagonal(const IntMatrix& M);

} // namespace ellipsum
