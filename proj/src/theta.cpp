#include "ellipsum/theta.hpp"

#include "ellipsum/ddouble.hpp"
#include "ellipsum/errors.hpp"
#include "ellipsum/expsums.hpp"
#include "ellipsum/numeric.hpp"
#include "ellipsum/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ellipsum {

namespace {

// e(s) = exp(-2 pi i s), with s reduced mod 1 first
cplx e_turns(double s) {
    const double f = s - std::nearbyint(s);
    return {std::cos(kTwoPi * f), -std::sin(kTwoPi * f)};
}

double smooth_step_h(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

} // namespace

GroupPoint GroupPoint::identity(int n) {
    GroupPoint g;
    g.n = n;
    g.u.assign(static_cast<std::size_t>(n), 0.0);
    g.v.assign(static_cast<std::size_t>(n), 1.0);
    g.phi.assign(static_cast<std::size_t>(n), 0.0);
    g.x.assign(static_cast<std::size_t>(n), 0.0);
    g.y.assign(static_cast<std::size_t>(n), 0.0);
    return g;
}

ThetaProfile ThetaProfile::gaussian(double lambda) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "Gaussian scale must be positive");
    ThetaProfile p;
    p.kind = Kind::Gaussian;
    p.lambda = lambda;
    return p;
}

ThetaProfile ThetaProfile::smooth_cutoff(double delta) {
    if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff width must be positive");
    ThetaProfile p;
    p.kind = Kind::SmoothCutoff;
    p.delta = delta;
    return p;
}

ThetaProfile ThetaProfile::indicator() {
    ThetaProfile p;
    p.kind = Kind::ExactIndicator;
    p.delta = 0.0;
    return p;
}

double ThetaProfile::psi(double r) const {
    switch (kind) {
    case Kind::Gaussian: return std::exp(-kPi * lambda * r);
    case Kind::ExactIndicator: return r <= 1.0 ? 1.0 : 0.0;
    case Kind::SmoothCutoff: {
        if (r <= 1.0) return 1.0;
        if (r >= 1.0 + delta) return 0.0;
        const double s = (r - 1.0) / delta;
        const double a = smooth_step_h(1.0 - s), b = smooth_step_h(s);
        return a / (a + b);
    }
    }
    return 0.0;
}

double ThetaProfile::support() const { return kind == Kind::SmoothCutoff ? 1.0 + delta : 1.0; }

int sigma_index(double phi) {
    const double nu = std::floor(phi / kPi);
    const int k = static_cast<int>(nu);
    return (phi == nu * kPi) ? 2 * k : 2 * k + 1;
}

RotatedGaussian gaussian_rotation(double lambda, double phi) {
    RotatedGaussian g;
    const int sig = sigma_index(phi);
    const cplx tilde = std::exp(cplx(0.0, -kPi * sig / 4.0));
    if (sig % 2 == 0) {
        // phi on pi*Z: A = +-1, C = 0, and the Gaussian is even
        g.prefactor = tilde;
        g.lambda_phi = lambda;
        return g;
    }
    const double s = std::sin(phi), c = std::cos(phi);
    const cplx a(lambda, -c / s);
    g.prefactor = tilde * std::sqrt(1.0 / a) / std::sqrt(std::fabs(s));
    g.lambda_phi = cplx(0.0, -c / s) + 1.0 / (s * s * a);
    return g;
}

cplx rotation_quadrature(double lambda, double phi, double w) {
    const double s = std::sin(phi), c = std::cos(phi);
    if (std::fabs(s) < 1e-12) throw Error(ErrorCode::InvalidArgument, "quadrature branch needs sin(phi) != 0");
    const double cot = c / s;
    const double L = std::sqrt(50.0 / (kPi * lambda));
    const double cycles = std::fabs(cot) * L + std::fabs(w / s) + lambda * L;
    const int panels = std::max(200, static_cast<int>(4.0 * L * cycles));
    auto f = [&](double wp, bool im) {
        const double ph = kPi * (cot * wp * wp + cot * w * w - 2.0 * w * wp / s);
        const double amp = std::exp(-kPi * lambda * wp * wp);
        return amp * (im ? std::sin(ph) : std::cos(ph));
    };
    const double re = integrate_gl([&](double q) { return f(q, false); }, -L, L, panels, 20);
    const double im = integrate_gl([&](double q) { return f(q, true); }, -L, L, panels, 20);
    const cplx tilde = std::exp(cplx(0.0, -kPi * sigma_index(phi) / 4.0));
    return tilde * cplx(re, im) / std::sqrt(std::fabs(s));
}

namespace {

void check_point(const GroupPoint& g) {
    const auto n = static_cast<std::size_t>(g.n);
    if (g.n < 1 || g.u.size() != n || g.v.size() != n || g.phi.size() != n || g.x.size() != n || g.y.size() != n)
        throw Error(ErrorCode::DimensionMismatch, "group point components have inconsistent lengths");
    for (double vk : g.v)
        if (!(vk > 0.0)) throw Error(ErrorCode::InvalidArgument, "v_k must be positive");
}

cplx theta_prefactor(const GroupPoint& g) {
    double pv = 1.0, xy = 0.0;
    for (int k = 0; k < g.n; ++k) {
        pv *= g.v[static_cast<std::size_t>(k)];
        xy += g.x[static_cast<std::size_t>(k)] * g.y[static_cast<std::size_t>(k)];
    }
    return std::pow(pv, 0.25) * e_turns(-g.t + 0.5 * xy);
}

cplx theta_gaussian(const ThetaProfile& prof, const GroupPoint& g, double Lambda) {
    cplx prod(1.0, 0.0);
    for (int k = 0; k < g.n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const RotatedGaussian rg = gaussian_rotation(prof.lambda, g.phi[kk]);
        const double sv = std::sqrt(g.v[kk]);
        const double W = Lambda / (sv * std::sqrt(rg.lambda_phi.real()));
        const double y = g.y[kk], u = g.u[kk], x = g.x[kk];
        const auto lo = static_cast<std::int64_t>(std::ceil(y - W));
        const auto hi = static_cast<std::int64_t>(std::floor(y + W));
        std::vector<cplx> terms;
        terms.reserve(static_cast<std::size_t>(std::max<std::int64_t>(0, hi - lo + 1)));
        for (std::int64_t m = lo; m <= hi; ++m) {
            const double d = static_cast<double>(m) - y;
            const double ph = -0.5 * d * d * u - static_cast<double>(m) * x;
            terms.push_back(rg(d * sv) * e_turns(ph));
        }
        prod *= pairwise_sum(terms);
    }
    return prod;
}

cplx theta_compact(const ThetaProfile& prof, const GroupPoint& g) {
    for (double p : g.phi)
        if (p != 0.0) throw Error(ErrorCode::PhiUnsupportedForProfile, "nonzero angle needs the Gaussian profile");
    const double rmax = prof.support();
    const int n = g.n;
    std::vector<cplx> terms;
    std::vector<std::int64_t> m(static_cast<std::size_t>(n));
    // recursive box walk with the partial weighted norm as the budget
    auto walk = [&](auto&& self, int k, double used) -> void {
        if (k == n) {
            double ph = 0.0;
            for (int j = 0; j < n; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                const double d = static_cast<double>(m[jj]) - g.y[jj];
                ph += -0.5 * d * d * g.u[jj] - static_cast<double>(m[jj]) * g.x[jj];
            }
            const double w = prof.psi(used);
            if (w != 0.0) terms.push_back(w * e_turns(ph));
            return;
        }
        const auto kk = static_cast<std::size_t>(k);
        const double W = std::sqrt(std::max(0.0, rmax - used) / g.v[kk]) + 1e-9;
        const auto lo = static_cast<std::int64_t>(std::ceil(g.y[kk] - W));
        const auto hi = static_cast<std::int64_t>(std::floor(g.y[kk] + W));
        for (std::int64_t v = lo; v <= hi; ++v) {
            const double d = static_cast<double>(v) - g.y[kk];
            const double nu = used + d * d * g.v[kk];
            if (nu > rmax) continue;
            m[kk] = v;
            self(self, k + 1, nu);
        }
    };
    walk(walk, 0, 0.0);
    return pairwise_sum(terms);
}

} // namespace

cplx theta_sum(const ThetaProfile& prof, const GroupPoint& g, double Lambda) {
    check_point(g);
    if (Lambda < kMinTruncation) throw Error(ErrorCode::TruncationTooSmall, "truncation Lambda must be at least 8");
    const cplx pre = theta_prefactor(g);
    if (prof.kind == ThetaProfile::Kind::Gaussian) return pre * theta_gaussian(prof, g, Lambda);
    return pre * theta_compact(prof, g);
}

Generator Generator::F(int k) {
    Generator g;
    g.kind = Kind::F;
    g.k = k;
    return g;
}

Generator Generator::U(int k) {
    Generator g;
    g.kind = Kind::U;
    g.k = k;
    return g;
}

Generator Generator::M(std::vector<std::int64_t> h1, std::vector<std::int64_t> h2) {
    Generator g;
    g.kind = Kind::M;
    g.h1 = std::move(h1);
    g.h2 = std::move(h2);
    return g;
}

GroupPoint apply_generator(const Generator& gen, const GroupPoint& g) {
    check_point(g);
    GroupPoint out = g;
    if (gen.kind == Generator::Kind::M) {
        if (static_cast<int>(gen.h1.size()) != g.n || static_cast<int>(gen.h2.size()) != g.n)
            throw Error(ErrorCode::IndexOutOfRange, "translation vectors must have length n");
        double dt = 0.0;
        for (int k = 0; k < g.n; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            dt += static_cast<double>(gen.h1[kk]) * g.y[kk] - static_cast<double>(gen.h2[kk]) * g.x[kk];
            out.x[kk] += static_cast<double>(gen.h1[kk]);
            out.y[kk] += static_cast<double>(gen.h2[kk]);
        }
        out.t += 0.5 * dt;
        return out;
    }
    if (gen.k < 0 || gen.k >= g.n) throw Error(ErrorCode::IndexOutOfRange, "generator index outside [0, n)");
    const auto k = static_cast<std::size_t>(gen.k);
    if (gen.kind == Generator::Kind::F) {
        const double u = g.u[k], v = g.v[k], r2 = u * u + v * v;
        out.u[k] = -u / r2;
        out.v[k] = v / r2;
        out.phi[k] = g.phi[k] + std::atan2(v, u);
        out.x[k] = -g.y[k];
        out.y[k] = g.x[k];
    } else {
        out.u[k] = g.u[k] + 1.0;
        out.x[k] = 0.5 + g.x[k] + g.y[k];
        out.t = g.t + 0.25 * g.y[k];
    }
    return out;
}

PhaseCheck phase_check(const ThetaProfile& prof, const GroupPoint& g, const Generator& gen, double Lambda) {
    if (gen.kind == Generator::Kind::F && prof.kind != ThetaProfile::Kind::Gaussian)
        throw Error(ErrorCode::PhiUnsupportedForProfile, "the F generator rotates the profile; use the Gaussian");
    const GroupPoint h = apply_generator(gen, g);
    PhaseCheck pc;
    pc.lhs = theta_sum(prof, h, Lambda);
    const cplx base = theta_sum(prof, g, Lambda);
    pc.central_factor = 1.0;
    switch (gen.kind) {
    case Generator::Kind::F: pc.lemma_factor = std::exp(cplx(0.0, -kPi / 4.0)); break;
    case Generator::Kind::U:
        pc.lemma_factor = std::exp(cplx(0.0, -kPi * g.y[static_cast<std::size_t>(gen.k)] / 2.0));
        pc.central_factor = e_turns(-(h.t - g.t));
        break;
    case Generator::Kind::M: {
        double hh = 0.0;
        for (std::size_t k = 0; k < gen.h1.size(); ++k) hh += static_cast<double>(gen.h1[k] * gen.h2[k]);
        pc.lemma_factor = std::exp(cplx(0.0, -kPi * hh));
        break;
    }
    }
    pc.rhs = pc.lemma_factor * pc.central_factor * base;
    pc.max_err = std::abs(pc.lhs - pc.rhs);
    return pc;
}

namespace {

struct DiagPoint {
    std::int64_t p;
    double c, s; // cos and sin of 2 pi m.x
};

std::vector<DiagPoint> diag_points(const std::vector<std::int64_t>& a, std::int64_t pmax, const std::vector<double>& x) {
    const int n = static_cast<int>(a.size());
    std::vector<DD> xd;
    for (double xi : x) xd.emplace_back(xi);
    std::vector<DiagPoint> pts;
    std::vector<std::int64_t> m(static_cast<std::size_t>(n));
    auto walk = [&](auto&& self, int k, std::int64_t used) -> void {
        if (k == n) {
            DD dot(0.0);
            for (int j = 0; j < n; ++j) dot += xd[static_cast<std::size_t>(j)] * static_cast<double>(m[static_cast<std::size_t>(j)]);
            const double f = dd_frac_centered(dot);
            pts.push_back({used, std::cos(kTwoPi * f), std::sin(kTwoPi * f)});
            return;
        }
        const std::int64_t ak = a[static_cast<std::size_t>(k)];
        const auto W = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(pmax - used) / static_cast<double>(ak)))) + 1;
        for (std::int64_t v = -W; v <= W; ++v) {
            const std::int64_t nu = used + ak * v * v;
            if (nu > pmax) continue;
            m[static_cast<std::size_t>(k)] = v;
            self(self, k + 1, nu);
        }
    };
    walk(walk, 0, 0);
    std::stable_sort(pts.begin(), pts.end(), [](const DiagPoint& l, const DiagPoint& r) { return l.p < r.p; });
    return pts;
}

std::int64_t largest_p(double v, double bound) {
    auto p = static_cast<std::int64_t>(std::floor(bound / v));
    while (v * static_cast<double>(p + 1) <= bound) ++p;
    while (p > 0 && v * static_cast<double>(p) > bound) --p;
    return p;
}

} // namespace

MsqIdentity msq_integral_u(const std::vector<std::int64_t>& a, double v, const std::vector<double>& x) {
    if (a.empty()) throw Error(ErrorCode::DimensionZero, "empty weight vector");
    if (a.size() != x.size()) throw Error(ErrorCode::DimensionMismatch, "a and x differ in length");
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "v must be positive");
    for (auto ak : a)
        if (ak < 1) throw Error(ErrorCode::InvalidArgument, "weights must be positive integers");
    const int n = static_cast<int>(a.size());
    double pa = 1.0;
    for (auto ak : a) pa *= static_cast<double>(ak);
    const std::int64_t pmax = largest_p(v, 1.0);
    const double est = unit_ball_volume(n) * std::pow(static_cast<double>(pmax), n / 2.0) / std::sqrt(pa);
    if (est > kDefaultBudget) throw Error(ErrorCode::BudgetExceeded, "too many lattice points for the identity");

    const auto pts = diag_points(a, pmax, x);
    std::vector<double> lhs_terms, rhs_terms, row;
    for (std::size_t i = 0; i < pts.size();) {
        std::size_t j = i;
        while (j < pts.size() && pts[j].p == pts[i].p) ++j;
        // shell [i, j)
        std::vector<double> cs, ss;
        for (std::size_t q = i; q < j; ++q) {
            cs.push_back(pts[q].c);
            ss.push_back(pts[q].s);
        }
        const double C = pairwise_sum(cs), Sn = pairwise_sum(ss);
        lhs_terms.push_back(C * C + Sn * Sn);
        std::vector<double> shell_rows;
        for (std::size_t h = i; h < j; ++h) {
            row.clear();
            for (std::size_t q = i; q < j; ++q) row.push_back(pts[h].c * pts[q].c + pts[h].s * pts[q].s);
            shell_rows.push_back(pairwise_sum(row));
        }
        rhs_terms.push_back(pairwise_sum(shell_rows));
        i = j;
    }
    const double scale = std::sqrt(pa) * std::pow(v, n / 2.0);
    MsqIdentity out;
    out.lhs = scale * pairwise_sum(lhs_terms);
    out.rhs = scale * pairwise_sum(rhs_terms);
    out.points = static_cast<std::int64_t>(pts.size());
    return out;
}

double cutoff_target(const std::vector<std::int64_t>& a, const ThetaProfile& prof) {
    const int n = static_cast<int>(a.size());
    double pa = 1.0;
    for (auto ak : a) pa *= static_cast<double>(ak);
    double tail = 0.0;
    if (prof.kind == ThetaProfile::Kind::SmoothCutoff)
        tail = integrate_gl([&](double r) { const double p = prof.psi(r); return p * p * std::pow(r, n / 2.0 - 1.0); },
                            1.0, 1.0 + prof.delta, 64, 16);
    // (n/2) int_0^1 r^{n/2-1} dr = 1
    return unit_ball_volume(n) * (1.0 + 0.5 * n * tail) / std::sqrt(pa);
}

std::vector<BridgeRow> bridge_check(const std::vector<std::int64_t>& a, const ShiftVector& alpha,
                                    const std::vector<double>& v_list, const ThetaProfile& prof, unsigned workers) {
    if (prof.kind == ThetaProfile::Kind::Gaussian)
        throw Error(ErrorCode::InvalidArgument, "bridge check needs a cutoff profile");
    const int n = static_cast<int>(a.size());
    if (alpha.n != n) throw Error(ErrorCode::DimensionMismatch, "shift dimension differs from weights");
    IntMatrix D = IntMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) D(k, k) = a[static_cast<std::size_t>(k)];
    const QuadFormCtx ctx = build_ctx(D);

    double vmin = 1.0;
    for (std::size_t i = 0; i < v_list.size(); ++i) {
        if (!(v_list[i] >= 1e-6)) throw Error(ErrorCode::InvalidArgument, "v must be at least 1e-6");
        if (i && !(v_list[i] < v_list[i - 1])) throw Error(ErrorCode::InvalidArgument, "v_list must be decreasing");
        vmin = std::min(vmin, v_list[i]);
    }
    const double supp = prof.support();
    std::int64_t pall = std::max<std::int64_t>(1, largest_p(vmin, supp));
    EnumOptions eo;
    eo.workers = workers;
    const ExpSumSeries ser = rep_sums(ctx, alpha, pall, eo);
    const double target = cutoff_target(a, prof);

    std::vector<BridgeRow> rows;
    for (double v : v_list) {
        BridgeRow row;
        row.v = v;
        row.N = std::max<std::int64_t>(1, largest_p(v, 1.0));
        row.repsum_msq = ser.R_cum[static_cast<std::size_t>(row.N)] / std::pow(static_cast<double>(row.N), n / 2.0);
        row.target = target;

        const std::int64_t pm = largest_p(v, supp);
        // S_p is the conjugate of r(p); the origin contributes S_0 = 1
        std::vector<cplx> c(static_cast<std::size_t>(pm) + 1);
        for (std::int64_t p = 0; p <= pm; ++p)
            c[static_cast<std::size_t>(p)] = prof.psi(v * static_cast<double>(p)) * std::conj(ser.r[static_cast<std::size_t>(p)]);
        while (pm > 0 && c.back() == cplx(0.0, 0.0)) c.pop_back();
        const std::size_t deg = c.size() - 1;
        const std::vector<double> cr = [&] { std::vector<double> o; for (auto& z : c) o.push_back(z.real()); return o; }();
        const std::vector<double> ci = [&] { std::vector<double> o; for (auto& z : c) o.push_back(z.imag()); return o; }();

        const GaussRule& g = gauss_legendre(20);
        const std::size_t panels = std::max<std::size_t>(64, deg + 1);
        const double h = 2.0 / static_cast<double>(panels);
        std::vector<double> pv(panels);
        for_blocks(panels, workers, [&](std::size_t b, unsigned) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                const double u = (static_cast<double>(b) + 0.5 + 0.5 * g.nodes[i]) * h;
                const double zr = std::cos(kPi * u), zi = std::sin(kPi * u);
                double ar = cr[deg], ai = ci[deg];
                for (std::size_t p = deg; p-- > 0;) {
                    const double tr = ar * zr - ai * zi + cr[p];
                    ai = ar * zi + ai * zr + ci[p];
                    ar = tr;
                }
                acc += g.weights[i] * (ar * ar + ai * ai);
            }
            pv[b] = 0.5 * h * acc;
        });
        row.theta_msq = 0.5 * pairwise_sum(pv) * std::pow(v, n / 2.0);
        rows.push_back(row);
    }
    return rows;
}

} // namespace ellipsum
