#pragma once

#include "ellipsum/expsums.hpp"
#include "ellipsum/lattice.hpp"

#include <memory>
#include <span>
#include <vector>

namespace ellipsum {

/// F and S read off a radii multiset.
struct DeviationEvaluator {
    const RadiiMultiset* rm = nullptr;
    int n = 0;
    double volume = 0.0;
    double T_max = 0.0;
};

DeviationEvaluator make_deviation(const QuadFormCtx& ctx, const RadiiMultiset& rm);

double F(const DeviationEvaluator& ev, double t);
double S(const DeviationEvaluator& ev, double t, double eps);
// Correction term so that S = (F(t+eps) - F(t)) / sqrt(eps) + P(t, eps).
double S_correction(const DeviationEvaluator& ev, double t, double eps);

/// Fourier transform of the radial mollifier, normalized to hat(0) = 1.
class Mollifier {
public:
    enum class Kind { Gaussian, Bump };

    static Mollifier gaussian(int n);
    static Mollifier bump(int n);

    Kind kind() const { return kind_; }
    int dim() const { return n_; }
    double hat(double s) const;

    // Direct quadrature, bypassing the cached table (bump only).
    double hat_direct(double s) const;

private:
    struct Table;
    Kind kind_ = Kind::Gaussian;
    int n_ = 1;
    std::shared_ptr<const Table> table_;
};

struct SpectralEvaluator {
    int n = 0;
    std::int64_t detM = 0;
    double K = 1.0;
    double zeta = 0.5;
    std::int64_t p_cut = 0;
    double imag_residue = 0.0; // max |Im r(p)| over the retained p
    // nonzero terms only: frequency in turns per unit t and the real weight
    std::vector<double> freq;
    std::vector<double> coef;
};

constexpr double kP0 = 0.31830988618379067154; // 1/pi

SpectralEvaluator make_spectral(const ExpSumSeries& adj_series, std::int64_t detM, double K, double zeta,
                                const Mollifier& mol);

double F_K0(const SpectralEvaluator& sp, double t);
void F_K0_batch(const SpectralEvaluator& sp, std::span<const double> ts, std::span<double> out);

std::int64_t spectral_cut(double K, double zeta);

} // namespace ellipsum
