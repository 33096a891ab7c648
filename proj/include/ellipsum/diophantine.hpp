#pragma once

#include "ellipsum/ddouble.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ellipsum {

using HighPrec = boost::multiprecision::cpp_bin_float_50;
using HighPrec100 = boost::multiprecision::cpp_bin_float_100;

struct DioMeta {
    double kappa_hat = 0.0;
    std::int64_t q_max = 0;
};

/// Center of the ellipsoid, kept at 50 digits alongside the text it came from.
struct ShiftVector {
    int n = 0;
    std::vector<HighPrec> comps;
    std::string spec;
    std::optional<DioMeta> dio_meta;

    std::vector<DD> as_dd() const;
    std::vector<double> as_double() const;
    bool is_zero() const;
};

// Tokens: decimal | p/q | sqrt<k> | sqrt<k>-<int> | phi-1 | e-2 | pi-3,
// each optionally prefixed by '-' to negate the whole token.
// n = 0 takes the dimension from the token count.
ShiftVector parse_shift(const std::string& spec, int n = 0);

// Same grammar evaluated at an arbitrary precision.
template <class Real>
std::vector<Real> eval_shift_spec(const std::string& spec);

ShiftVector zero_shift(int n);
ShiftVector negated(const ShiftVector& a);

struct DioReport {
    std::int64_t q_max = 0;
    double kappa_hat = 1.0;
    std::int64_t worst_q = 0;
    double worst_dist = 0.0;
    bool rational_hit = false;
    std::int64_t hit_q = 0;
};

// Hurwitz constant used to normalize the exponent estimate.
constexpr double kHurwitzC0 = 0.44721359549995793928; // 1/sqrt(5)
constexpr double kRationalTol = 1e-25;

DioReport estimate_type(const ShiftVector& alpha, std::int64_t q_max);

// Same scan with the components re-evaluated from the spec at 100 digits.
DioReport estimate_type_100(const ShiftVector& alpha, std::int64_t q_max);

struct RelationResult {
    bool found = false;
    std::vector<std::int64_t> witness; // (c_1..c_n, c_{n+1}) with c.(alpha,1) ~ 0
};

RelationResult independence_scan(const ShiftVector& alpha, std::int64_t coeff_bound);

} // namespace ellipsum
