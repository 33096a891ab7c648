#pragma once

#include "ellipsum/diophantine.hpp"
#include "ellipsum/quadform.hpp"

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace ellipsum {

constexpr double kDefaultBudget = 5e8;

struct EnumOptions {
    double budget = kDefaultBudget; // cap on volume * R^n
    unsigned workers = 1;
};

// qval is the exact integer form value (as a double) when the center is zero.
using Visitor = std::function<void(const IntVector& m, double qval)>;

std::int64_t enumerate(const QuadFormCtx& ctx, const ShiftVector& center, double R, const Visitor& visit,
                       double budget = kDefaultBudget);

std::uint64_t ctx_digest(const QuadFormCtx& ctx, const std::string& alpha_spec);

/// Sorted radii |m - alpha|_M of every lattice point in the ball of radius R_max.
struct RadiiMultiset {
    std::uint64_t ctx_digest = 0;
    double R_max = 0.0;
    std::vector<double> radii;

    std::size_t count() const { return radii.size(); }
};

RadiiMultiset build_radii(const QuadFormCtx& ctx, const ShiftVector& alpha, double R_max, const EnumOptions& opt = {});

// Closed ball: radii equal to t are counted.
std::int64_t count_upto(const RadiiMultiset& rm, double t);

/// Twisted shell sums indexed by p = Q_M(m). Index 0 holds the origin.
struct ShellBuckets {
    std::int64_t p_max = 0;
    std::vector<std::complex<double>> sums;
    std::vector<std::int64_t> counts;
};

ShellBuckets bucket_shells(const QuadFormCtx& ctx, const ShiftVector& alpha, std::int64_t p_max,
                           const EnumOptions& opt = {});

} // namespace ellipsum
