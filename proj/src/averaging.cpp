#include "ellipsum/averaging.hpp"

namespace ellipsum {

namespace {

constexpr int kCdfCells = 4096;

// (t + e)^n - t^n without cancellation
double power_increment(double t, double e, int n) { return std::pow(t, n) * std::expm1(n * std::log1p(e / t)); }

} // namespace

AveragingKernel::AveragingKernel(double c0, double c1, std::function<double(double)> raw)
    : c0_(c0), c1_(c1), raw_(std::move(raw)) {
    if (!(c0 > 0.0) || !(c1 > c0)) throw Error(ErrorCode::InvalidArgument, "kernel support must satisfy 0 < c0 < c1");
    const double h = (c1 - c0) / kCdfCells;
    std::vector<double> cells(kCdfCells);
    for (int i = 0; i < kCdfCells; ++i)
        cells[static_cast<std::size_t>(i)] = integrate_gl(raw_, c0 + i * h, c0 + (i + 1) * h, 1, 16);
    grid_cdf_.assign(kCdfCells + 1, 0.0);
    NeumaierSum acc;
    for (int i = 0; i < kCdfCells; ++i) {
        acc.add(cells[static_cast<std::size_t>(i)]);
        grid_cdf_[static_cast<std::size_t>(i) + 1] = acc.value();
    }
    Z_ = grid_cdf_.back();
    if (!(Z_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel density has zero mass");
    for (auto& v : grid_cdf_) v /= Z_;
    grid_cdf_.back() = 1.0;
    grid_pdf_.resize(kCdfCells + 1);
    for (int i = 0; i <= kCdfCells; ++i) grid_pdf_[static_cast<std::size_t>(i)] = density(c0 + i * h);
    mass_ = integrate_gl([&](double s) { return density(s); }, c0, c1, 512, 16);
}

AveragingKernel AveragingKernel::bump(double c0, double c1) {
    const double mid = 0.5 * (c0 + c1), hw = 0.5 * (c1 - c0);
    return AveragingKernel(c0, c1, [mid, hw](double s) {
        const double u = (s - mid) / hw;
        if (u <= -1.0 || u >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
    });
}

double AveragingKernel::cdf(double s) const {
    if (s <= c0_) return 0.0;
    if (s >= c1_) return 1.0;
    // monotone cubic Hermite with exact slopes, Fritsch-Carlson limited
    const double h = (c1_ - c0_) / kCdfCells;
    const double x = (s - c0_) / h;
    auto i = static_cast<std::size_t>(x);
    if (i >= static_cast<std::size_t>(kCdfCells)) i = kCdfCells - 1;
    const double u = x - static_cast<double>(i);
    const double y0 = grid_cdf_[i], y1 = grid_cdf_[i + 1];
    const double delta = y1 - y0;
    double m0 = grid_pdf_[i] * h, m1 = grid_pdf_[i + 1] * h;
    if (delta <= 0.0) {
        m0 = m1 = 0.0;
    } else {
        const double a = m0 / delta, b = m1 / delta, r = a * a + b * b;
        if (r > 9.0) {
            const double tau = 3.0 / std::sqrt(r);
            m0 *= tau;
            m1 *= tau;
        }
    }
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
}

double AveragingKernel::moment(int k) const {
    return integrate_gl([&](double s) { return std::pow(s, k) * density(s); }, c0_, c1_, 512, 16);
}

void require_support(const RadiiMultiset& rm, const AveragingKernel& k, double T, double extra) {
    if (k.c1() * T + extra > rm.R_max)
        throw Error(ErrorCode::SupportExceedsRadii, "kernel support up to " + std::to_string(k.c1() * T + extra) +
                                                        " exceeds radii built to " + std::to_string(rm.R_max));
}

AverageResult average_power(const AveragingKernel& k, double T, double power) {
    std::vector<double> none;
    return average_piecewise(std::span<const double>(none), T, k, [&](double, std::span<const double> t, std::span<double> v) {
        for (std::size_t i = 0; i < t.size(); ++i) v[i] = std::pow(t[i], power);
    });
}

double average_N_closed(const RadiiMultiset& rm, const AveragingKernel& k, double T) {
    require_support(rm, k, T);
    const double lo = k.c0() * T, hi = k.c1() * T;
    auto b = std::upper_bound(rm.radii.begin(), rm.radii.end(), lo);
    auto e = std::upper_bound(rm.radii.begin(), rm.radii.end(), hi);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(e - b));
    for (auto it = b; it != e; ++it) terms.push_back(1.0 - k.cdf(*it / T));
    return static_cast<double>(b - rm.radii.begin()) + pairwise_sum(terms);
}

AverageResult average_N_gauss(const RadiiMultiset& rm, const AveragingKernel& k, double T, const PiecewiseOptions& opt) {
    require_support(rm, k, T);
    return average_piecewise(std::span<const double>(rm.radii), T, k,
                             [&](double mid, std::span<const double>, std::span<double> v) {
                                 const double N = static_cast<double>(count_upto(rm, mid));
                                 std::fill(v.begin(), v.end(), N);
                             },
                             opt);
}

namespace {

template <class G>
AverageResult average_F_like(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const PiecewiseOptions& opt, G g) {
    require_support(*ev.rm, k, T);
    const double h = (ev.n - 1) / 2.0;
    return average_piecewise(std::span<const double>(ev.rm->radii), T, k,
                             [&](double mid, std::span<const double> t, std::span<double> v) {
                                 const double N = static_cast<double>(count_upto(*ev.rm, mid));
                                 for (std::size_t i = 0; i < t.size(); ++i)
                                     v[i] = g((N - ev.volume * std::pow(t[i], ev.n)) / std::pow(t[i], h));
                             },
                             opt);
}

} // namespace

AverageResult mean_F(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const PiecewiseOptions& opt) {
    return average_F_like(ev, k, T, opt, [](double f) { return f; });
}

std::vector<AverageResult> mean_F(const DeviationEvaluator& ev, const AveragingKernel& k, const std::vector<double>& Ts,
                                  const PiecewiseOptions& opt) {
    std::vector<AverageResult> out;
    for (double T : Ts) out.push_back(mean_F(ev, k, T, opt));
    return out;
}

AverageResult mean_F2(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const PiecewiseOptions& opt) {
    return average_F_like(ev, k, T, opt, [](double f) { return f * f; });
}

VarFResult var_F(const DeviationEvaluator& ev, const AveragingKernel& k, double T, const VarianceSeries& A,
                 const PiecewiseOptions& opt) {
    VarFResult r;
    r.msq = mean_F2(ev, k, T, opt);
    r.mean = mean_F(ev, k, T, opt);
    r.series = A;
    r.target = A.A / (2.0 * kPi * kPi);
    r.ratio = r.msq.value / r.target;
    return r;
}

double eps_rule(double T, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1)");
    return std::pow(T, -gamma);
}

VarSResult var_S(const DeviationEvaluator& ev, const AveragingKernel& k, double T, double eps, const PiecewiseOptions& opt) {
    if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
    require_support(*ev.rm, k, T, eps);
    const auto& radii = ev.rm->radii;
    const double lo = k.c0() * T, hi = k.c1() * T;
    // breakpoints: radii and radii - eps inside the support
    auto a0 = std::upper_bound(radii.begin(), radii.end(), lo);
    auto a1 = std::lower_bound(radii.begin(), radii.end(), hi);
    auto b0 = std::upper_bound(radii.begin(), radii.end(), lo + eps);
    auto b1 = std::lower_bound(radii.begin(), radii.end(), hi + eps);
    std::vector<double> shifted;
    shifted.reserve(static_cast<std::size_t>(b1 - b0));
    for (auto it = b0; it != b1; ++it) shifted.push_back(*it - eps);
    std::vector<double> brk(static_cast<std::size_t>(a1 - a0) + shifted.size());
    std::merge(a0, a1, shifted.begin(), shifted.end(), brk.begin());
    std::vector<double>().swap(shifted);

    const double h = (ev.n - 1) / 2.0, se = std::sqrt(eps);
    auto run = [&](bool square) {
        return average_piecewise(std::span<const double>(brk), T, k,
                                 [&](double mid, std::span<const double> t, std::span<double> v) {
                                     const double dN = static_cast<double>(count_upto(*ev.rm, mid + eps) - count_upto(*ev.rm, mid));
                                     for (std::size_t i = 0; i < t.size(); ++i) {
                                         const double s = (dN - ev.volume * power_increment(t[i], eps, ev.n)) /
                                                          (se * std::pow(t[i], h));
                                         v[i] = square ? s * s : s;
                                     }
                                 },
                                 opt);
    };
    VarSResult r;
    r.eps = eps;
    r.msq = run(true);
    r.mean = run(false);
    r.target = ev.n * ev.volume;
    r.ratio = r.msq.value / r.target;
    return r;
}

double diag_shell_variance(const ExpSumSeries& adj, std::int64_t detM, double eps, double K, double zeta,
                           const Mollifier& mol) {
    if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
    const std::int64_t p_cut = spectral_cut(K, zeta);
    if (p_cut > adj.p_max) throw Error(ErrorCode::TruncationExceedsSeries, "K^{2+zeta} exceeds the adjugate series length");
    const int n = adj.n;
    const double d = static_cast<double>(detM), sd = std::sqrt(d);
    std::vector<double> terms;
    for (std::int64_t p = 1; p <= p_cut; ++p) {
        const double a2 = std::norm(adj.r[static_cast<std::size_t>(p)]);
        if (a2 == 0.0) continue;
        const double sq = std::sqrt(static_cast<double>(p));
        const double s = std::sin(kPi * eps * sq / sd);
        const double ph = mol.hat(sq / (K * sd));
        terms.push_back(s * s * a2 * std::pow(static_cast<double>(p), -(n + 1) / 2.0) * ph * ph);
    }
    return 2.0 * std::pow(d, (n - 1) / 2.0) / (eps * kPi * kPi) * pairwise_sum(terms);
}

BlockSumResult eps_block_sum(const ExpSumSeries& series, double eps, double N1, double N2) {
    if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
    const double e2 = eps * eps;
    const auto plo = static_cast<std::int64_t>(std::ceil(N1 / e2 - 1e-9));
    auto phi = static_cast<std::int64_t>(std::ceil(N2 / e2 - 1e-9)) - 1;
    if (phi > series.p_max) throw Error(ErrorCode::TruncationExceedsSeries, "block exceeds series length");
    std::vector<double> terms;
    for (std::int64_t p = std::max<std::int64_t>(plo, 1); p <= phi; ++p)
        terms.push_back(std::norm(series.r[static_cast<std::size_t>(p)]));
    BlockSumResult r;
    r.value = std::pow(eps, series.n) * pairwise_sum(terms);
    r.target = series.volume * (std::pow(N2, series.n / 2.0) - std::pow(N1, series.n / 2.0));
    return r;
}

AverageResult spectral_gap_msq(const DeviationEvaluator& ev, const SpectralEvaluator& sp, const AveragingKernel& k,
                               double T, const PiecewiseOptions& opt) {
    require_support(*ev.rm, k, T);
    const double h = (ev.n - 1) / 2.0;
    // resolve the fastest retained oscillation with a few nodes per cycle
    double fmax = 0.0;
    for (double f : sp.freq) fmax = std::max(fmax, f);
    PiecewiseOptions o = opt;
    if (fmax > 0.0) {
        const double cap = 0.25 / fmax;
        o.max_piece = o.max_piece > 0.0 ? std::min(o.max_piece, cap) : cap;
    }
    return average_piecewise(std::span<const double>(ev.rm->radii), T, k,
                             [&](double mid, std::span<const double> t, std::span<double> v) {
                                 const double N = static_cast<double>(count_upto(*ev.rm, mid));
                                 F_K0_batch(sp, t, v);
                                 for (std::size_t i = 0; i < t.size(); ++i) {
                                     const double f = (N - ev.volume * std::pow(t[i], ev.n)) / std::pow(t[i], h);
                                     const double d = f - v[i];
                                     v[i] = d * d;
                                 }
                             },
                             o);
}

} // namespace ellipsum
