#pragma once

#include "ellipsum/counting.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/expsums.hpp"
#include "ellipsum/numeric.hpp"
#include "ellipsum/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace ellipsum {

/// Smooth probability density on [c0, c1], normalized numerically.
class AveragingKernel {
public:
    AveragingKernel(double c0, double c1, std::function<double(double)> raw);

    // exp(-1/(1-u^2)) with u mapping [c0, c1] onto [-1, 1]
    static AveragingKernel bump(double c0 = 1.0, double c1 = 2.0);

    double c0() const { return c0_; }
    double c1() const { return c1_; }
    double density(double s) const {
        if (s <= c0_ || s >= c1_) return 0.0;
        return raw_(s) / Z_;
    }
    double density_T(double t, double T) const { return density(t / T) / T; }
    double cdf(double s) const;
    double moment(int k) const;
    double total_mass() const { return mass_; } // integral of the normalized density

private:
    double c0_, c1_;
    std::function<double(double)> raw_;
    double Z_ = 1.0;
    double mass_ = 1.0;
    std::vector<double> grid_cdf_, grid_pdf_;
};

struct AverageResult {
    double T = 0.0;
    double value = 0.0;
    double est_error = 0.0;
    std::size_t breakpoint_count = 0;
};

struct PiecewiseOptions {
    int order = 8;          // Gauss order per piece; order/2 gives the error estimate
    double max_piece = 0.0; // extra cap on piece length (0 = none)
    unsigned workers = 1;
};

/// Integrates f(t) mu_T(t) over the kernel support, exact between breakpoints.
/// eval(mid, nodes, vals) fills vals[i] = f(nodes[i]) on a piece whose
/// interior contains mid and no breakpoint.
template <class Eval>
AverageResult average_piecewise(std::span<const double> breaks, double T, const AveragingKernel& k, Eval&& eval,
                                const PiecewiseOptions& opt = {}) {
    const double lo = k.c0() * T, hi = k.c1() * T;
    std::vector<double> pts;
    pts.push_back(lo);
    auto first = std::upper_bound(breaks.begin(), breaks.end(), lo);
    auto last = std::lower_bound(breaks.begin(), breaks.end(), hi);
    for (auto it = first; it != last; ++it)
        if (*it != pts.back()) pts.push_back(*it);
    if (hi != pts.back()) pts.push_back(hi);

    double max_len = (hi - lo) / 256.0;
    if (opt.max_piece > 0.0) max_len = std::min(max_len, opt.max_piece);

    const int o1 = opt.order, o2 = std::max(1, opt.order / 2);
    const GaussRule& g1 = gauss_legendre(o1);
    const GaussRule& g2 = gauss_legendre(o2);
    const std::size_t nint = pts.size() - 1;
    constexpr std::size_t kChunk = 4096;
    const std::size_t nchunks = (nint + kChunk - 1) / kChunk;
    std::vector<double> chunk_val(nchunks), chunk_err(nchunks);

    for_blocks(nchunks, opt.workers, [&](std::size_t c, unsigned) {
        std::vector<double> nodes(static_cast<std::size_t>(o1 + o2)), vals(nodes.size());
        std::vector<double> piece_val, piece_err;
        const std::size_t i0 = c * kChunk, i1 = std::min(nint, i0 + kChunk);
        for (std::size_t i = i0; i < i1; ++i) {
            const double a = pts[i], b = pts[i + 1];
            const int sub = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
            const double h = (b - a) / sub;
            for (int s = 0; s < sub; ++s) {
                const double pa = a + s * h;
                const double pb = (s + 1 == sub) ? b : pa + h;
                const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
                for (int j = 0; j < o1; ++j) nodes[static_cast<std::size_t>(j)] = mid + half * g1.nodes[static_cast<std::size_t>(j)];
                for (int j = 0; j < o2; ++j) nodes[static_cast<std::size_t>(o1 + j)] = mid + half * g2.nodes[static_cast<std::size_t>(j)];
                eval(mid, std::span<const double>(nodes), std::span<double>(vals));
                double s1 = 0.0, s2 = 0.0;
                for (int j = 0; j < o1; ++j)
                    s1 += g1.weights[static_cast<std::size_t>(j)] * vals[static_cast<std::size_t>(j)] * k.density_T(nodes[static_cast<std::size_t>(j)], T);
                for (int j = 0; j < o2; ++j)
                    s2 += g2.weights[static_cast<std::size_t>(j)] * vals[static_cast<std::size_t>(o1 + j)] *
                          k.density_T(nodes[static_cast<std::size_t>(o1 + j)], T);
                piece_val.push_back(half * s1);
                piece_err.push_back(std::fabs(half * (s1 - s2)));
            }
        }
        chunk_val[c] = pairwise_sum(piece_val);
        chunk_err[c] = pairwise_sum(piece_err);
    });

    AverageResult res;
    res.T = T;
    res.value = pairwise_sum(chunk_val);
    res.est_error = pairwise_sum(chunk_err);
    res.breakpoint_count = pts.size() - 2;
    return res;
}

void require_support(const RadiiMultiset& rm, const AveragingKernel& k, double T, double extra = 0.0);

// <f>_T for f(t) = t^power (used for sanity checks and as a smooth reference)
AverageResult average_power(const AveragingKernel& k, double T, double power);

// <N>_T through the closed form sum_j (1 - CDF_T(r_j)) and through Gauss pieces.
double average_N_closed(const RadiiMultiset& rm, const AveragingKernel& k, double T);
AverageResult average_N_gauss(const RadiiMultiset& rm, const AveragingKernel& k, double T, const PiecewiseOptions& opt = {});

AverageResult mean_F(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const PiecewiseOptions& opt = {});
std::vector<AverageResult> mean_F(const DeviationEvaluator& ev, const AveragingKernel& k, const std::vector<double>& Ts,
                                  const PiecewiseOptions& opt = {});
AverageResult mean_F2(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const PiecewiseOptions& opt = {});

struct VarFResult {
    AverageResult msq;     // <|F|^2>_T
    AverageResult mean;    // <F>_T
    VarianceSeries series; // A and its tail heuristic
    double target = 0.0;   // A / (2 pi^2)
    double ratio = 0.0;
};

VarFResult var_F(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const VarianceSeries& A,
                 const PiecewiseOptions& opt = {});

struct VarSResult {
    double eps = 0.0;
    AverageResult msq;  // <|S|^2>_T
    AverageResult mean; // <S>_T
    double target = 0.0;
    double ratio = 0.0;
};

double eps_rule(double T, double gamma);

VarSResult var_S(const DeviationEvaluator& ev, const AveragingKernel& k, double T, double eps,
                 const PiecewiseOptions& opt = {});

// Diagonal part of the shell variance computed from the adjugate series.
double diag_shell_variance(const ExpSumSeries& adj, std::int64_t detM, double eps, double K, double zeta,
                           const Mollifier& mol);

struct BlockSumResult {
    double value = 0.0;
    double target = 0.0;
};

// sum over N1 <= eps^2 p < N2 of eps^n |r(p)|^2, against |E| (N2^{n/2} - N1^{n/2})
BlockSumResult eps_block_sum(const ExpSumSeries& series, double eps, double N1, double N2);

// <|F - F^{K,0}|^2>_T
AverageResult spectral_gap_msq(const DeviationEvaluator& ev, const SpectralEvaluator& sp, const AveragingKernel& k,
                               double T, const PiecewiseOptions& opt = {});

} // namespace ellipsum
