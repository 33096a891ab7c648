#include "ellipsum/counting.hpp"

#include "ellipsum/ddouble.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/numeric.hpp"

#include <cmath>

namespace ellipsum {

DeviationEvaluator make_deviation(const QuadFormCtx& ctx, const RadiiMultiset& rm) {
    DeviationEvaluator ev;
    ev.rm = &rm;
    ev.n = ctx.n;
    ev.volume = ctx.volume;
    ev.T_max = rm.R_max;
    return ev;
}

namespace {

DD dd_pow(double t, int n) {
    DD r(1.0);
    for (int i = 0; i < n; ++i) r = r * t;
    return r;
}

// N - V t^n carried in double-double; the cancellation is ~N-fold at large t
double excess(const DeviationEvaluator& ev, std::int64_t N, double t) {
    return (DD(static_cast<double>(N)) - dd_pow(t, ev.n) * ev.volume).to_double();
}

} // namespace

double F(const DeviationEvaluator& ev, double t) {
    if (!(t > 0.0) || t > ev.T_max) throw Error(ErrorCode::RadiusOutOfRange, "t outside (0, T_max]");
    return excess(ev, count_upto(*ev.rm, t), t) / std::pow(t, (ev.n - 1) / 2.0);
}

double S(const DeviationEvaluator& ev, double t, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorCode::NonpositiveEps, "eps must be positive");
    if (!(t > 0.0) || t + eps > ev.T_max) throw Error(ErrorCode::RadiusOutOfRange, "t + eps outside (0, T_max]");
    const double u = t + eps;
    const double dN = static_cast<double>(count_upto(*ev.rm, u) - count_upto(*ev.rm, t));
    const DD dV = (dd_pow(u, ev.n) - dd_pow(t, ev.n)) * ev.volume;
    return (DD(dN) - dV).to_double() / (std::sqrt(eps) * std::pow(t, (ev.n - 1) / 2.0));
}

double S_correction(const DeviationEvaluator& ev, double t, double eps) {
    const double h = (ev.n - 1) / 2.0;
    const double u = t + eps;
    // u - t is exact here, so expm1/log1p keep full relative accuracy
    return std::expm1(h * std::log1p((u - t) / t)) * F(ev, u) / std::sqrt(eps);
}

// ---------------------------------------------------------------- mollifier

namespace {

constexpr double kBumpGridMax = 8.0;
constexpr int kBumpGridPerUnit = 512;

double bump_profile(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

// x^{-nu} J_nu(x), regular at 0
double bessel_reduced(double nu, double x) {
    if (x < 1e-4) {
        const double g0 = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
        return g0 * (1.0 - x * x / (4.0 * (nu + 1.0)));
    }
    // std::cyl_bessel_j rejects negative order; n = 1 needs J_{-1/2}
    if (nu == -0.5) return std::sqrt(2.0 / kPi) * std::cos(x);
    return std::cyl_bessel_j(nu, x) / std::pow(x, nu);
}

} // namespace

struct Mollifier::Table {
    double norm = 1.0; // 1 / integral of the raw bump over R^n
    std::vector<double> val, der;
};

namespace {

// radial transform of the raw bump and its s-derivative, composite Gauss-Legendre on [0, 1]
std::pair<double, double> bump_transform(int n, double s) {
    const double nu = n / 2.0 - 1.0;
    const GaussRule& g = gauss_legendre(20);
    const int panels = 8 + static_cast<int>(2.0 * s);
    const double h = 1.0 / panels;
    std::vector<double> v(static_cast<std::size_t>(panels)), d(static_cast<std::size_t>(panels));
    for (int k = 0; k < panels; ++k) {
        double sv = 0.0, sd = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double r = (k + 0.5 + 0.5 * g.nodes[i]) * h;
            const double w = g.weights[i] * bump_profile(r) * std::pow(r, n - 1);
            const double x = kTwoPi * s * r;
            sv += w * bessel_reduced(nu, x);
            // d/dx [x^-nu J_nu] = -x * x^-(nu+1) J_{nu+1}
            sd += w * kTwoPi * r * (-x * bessel_reduced(nu + 1.0, x));
        }
        v[static_cast<std::size_t>(k)] = 0.5 * h * sv;
        d[static_cast<std::size_t>(k)] = 0.5 * h * sd;
    }
    const double c = std::pow(kTwoPi, n / 2.0);
    return {c * pairwise_sum(v), c * pairwise_sum(d)};
}

} // namespace

Mollifier Mollifier::gaussian(int n) {
    Mollifier m;
    m.kind_ = Kind::Gaussian;
    m.n_ = n;
    return m;
}

Mollifier Mollifier::bump(int n) {
    Mollifier m;
    m.kind_ = Kind::Bump;
    m.n_ = n;
    auto t = std::make_shared<Table>();
    t->norm = 1.0 / bump_transform(n, 0.0).first;
    const int N = static_cast<int>(kBumpGridMax * kBumpGridPerUnit);
    t->val.resize(static_cast<std::size_t>(N) + 1);
    t->der.resize(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) {
        auto [v, d] = bump_transform(n, static_cast<double>(i) / kBumpGridPerUnit);
        t->val[static_cast<std::size_t>(i)] = v * t->norm;
        t->der[static_cast<std::size_t>(i)] = d * t->norm;
    }
    t->val[0] = 1.0;
    m.table_ = std::move(t);
    return m;
}

double Mollifier::hat_direct(double s) const {
    if (kind_ == Kind::Gaussian) return std::exp(-kPi * s * s);
    return bump_transform(n_, s).first * table_->norm;
}

double Mollifier::hat(double s) const {
    if (kind_ == Kind::Gaussian) return std::exp(-kPi * s * s);
    if (s >= kBumpGridMax) return hat_direct(s);
    // cubic Hermite on the cached grid with exact slopes
    const double x = s * kBumpGridPerUnit;
    const auto i = static_cast<std::size_t>(x);
    const double u = x - static_cast<double>(i);
    const double h = 1.0 / kBumpGridPerUnit;
    const double y0 = table_->val[i], y1 = table_->val[i + 1];
    const double m0 = table_->der[i] * h, m1 = table_->der[i + 1] * h;
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
}

// ----------------------------------------------------------------- spectral

std::int64_t spectral_cut(double K, double zeta) {
    return static_cast<std::int64_t>(std::floor(std::pow(K, 2.0 + zeta) * (1.0 + 1e-15)));
}

SpectralEvaluator make_spectral(const ExpSumSeries& adj, std::int64_t detM, double K, double zeta, const Mollifier& mol) {
    if (!(K >= 1.0)) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
    if (!(zeta > 0.0)) throw Error(ErrorCode::InvalidArgument, "zeta must be positive");
    SpectralEvaluator sp;
    sp.n = adj.n;
    sp.detM = detM;
    sp.K = K;
    sp.zeta = zeta;
    sp.p_cut = spectral_cut(K, zeta);
    if (sp.p_cut > adj.p_max)
        throw Error(ErrorCode::TruncationExceedsSeries,
                    "p_cut = " + std::to_string(sp.p_cut) + " exceeds series p_max = " + std::to_string(adj.p_max));
    const double d = static_cast<double>(detM);
    const double sd = std::sqrt(d);
    const double pre = kP0 * std::pow(d, (sp.n - 1) / 4.0);
    for (std::int64_t p = 1; p <= sp.p_cut; ++p) {
        const auto& r = adj.r[static_cast<std::size_t>(p)];
        if (adj.counts[static_cast<std::size_t>(p)] == 0) continue;
        sp.imag_residue = std::max(sp.imag_residue, std::fabs(r.imag()));
        const double sq = std::sqrt(static_cast<double>(p));
        const double w = pre * std::pow(static_cast<double>(p), -(sp.n + 1) / 4.0) * mol.hat(sq / (K * sd)) * r.real();
        if (w == 0.0) continue;
        sp.freq.push_back(sq / sd);
        sp.coef.push_back(w);
    }
    return sp;
}

namespace {

__attribute__((target_clones("avx2", "default")))
void spectral_terms(const double* freq, const double* coef, std::size_t m, double t, double off, double* out) {
    for (std::size_t i = 0; i < m; ++i) out[i] = coef[i] * cos_turns(t * freq[i] + off);
}

} // namespace

double F_K0(const SpectralEvaluator& sp, double t) {
    double out = 0.0;
    F_K0_batch(sp, std::span<const double>(&t, 1), std::span<double>(&out, 1));
    return out;
}

void F_K0_batch(const SpectralEvaluator& sp, std::span<const double> ts, std::span<double> out) {
    // phase -(n+1)/4 pi, expressed in turns
    const double off = -(sp.n + 1) / 8.0;
    std::vector<double> buf(sp.coef.size());
    for (std::size_t j = 0; j < ts.size(); ++j) {
        spectral_terms(sp.freq.data(), sp.coef.data(), sp.coef.size(), ts[j], off, buf.data());
        out[j] = pairwise_sum(buf);
    }
}

} // namespace ellipsum
