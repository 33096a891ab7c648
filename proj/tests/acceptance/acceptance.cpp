// Acceptance battery: one line per criterion, tolerances pinned below.
#include "ellipsum/averaging.hpp"
#include "ellipsum/counting.hpp"
#include "ellipsum/diophantine.hpp"
#include "ellipsum/expsums.hpp"
#include "ellipsum/lattice.hpp"
#include "ellipsum/quadform.hpp"
#include "ellipsum/theta.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace ellipsum;

namespace {

// Tolerances and limits.
constexpr double kC1Lo = 1.8, kC1Hi = 2.2, kC1Time = 10.0;
constexpr double kC2Rel = 0.10, kC2Time = 60.0;
constexpr double kC3Abs = 0.10, kC3Time = 300.0;
constexpr double kC4Lo = 0.8, kC4Hi = 1.2, kC4Time = 600.0;
constexpr double kC5Lo = 0.8, kC5Hi = 1.2, kC5Mean = 0.15, kC5Time = 600.0;
constexpr double kC6Abs = 1e-12, kC6Time = 5.0;
constexpr double kC7UM = 1e-10, kC7F = 1e-8, kC7Rot = 1e-8, kC7Time = 30.0;
constexpr double kC8Rel = 0.10, kC8Time = 300.0;
constexpr double kC9Factor = 3.0, kC9Time = 300.0;
constexpr double kC10Block = 0.10, kC10Diag = 0.15, kC10Time = 120.0;
constexpr double kC11Unit = 1e-10, kC11Decomp = 1e-9, kC11Time = 60.0;

const char* kAlpha2 = "sqrt2-1,sqrt3-1";

int failures = 0;

double now() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void report(int id, bool ok, double secs, double limit, const std::string& detail) {
    const bool in_time = secs < limit;
    const bool pass = ok && in_time;
    if (!pass) ++failures;
    std::printf("[%s] criterion %d: %s; runtime %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", id, detail.c_str(),
                secs, limit, in_time ? "" : " EXCEEDED");
    std::fflush(stdout);
}

std::string g(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.6g", x);
    return b;
}

IntMatrix diag(std::vector<std::int64_t> a) {
    IntMatrix M = IntMatrix::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = a[i];
    return M;
}

void run_guarded(int id, double limit, const std::function<void(double)>& body) {
    const double t0 = now();
    try {
        body(t0);
    } catch (const std::exception& e) {
        report(id, false, now() - t0, limit, std::string("exception: ") + e.what());
    }
}

void crit1() {
    run_guarded(1, kC1Time, [](double t0) {
        const QuadFormCtx ctx = build_ctx(diag({1}));
        const ExpSumSeries s = rep_sums(ctx, parse_shift("sqrt2-1", 1), 1000000);
        const auto rows = mean_square_trace(s, {10000, 1000000});
        const double r4 = rows[0].ratio, r6 = rows[1].ratio;
        const bool ok = r6 >= kC1Lo && r6 <= kC1Hi && std::fabs(r6 - 2.0) < std::fabs(r4 - 2.0);
        report(1, ok, now() - t0, kC1Time,
               "n=1 mean square R/sqrt(N): N=1e4 " + g(r4) + ", N=1e6 " + g(r6) + " (target 2, band [1.8, 2.2])");
    });
}

void crit2() {
    struct Case {
        std::vector<std::int64_t> a;
        double target;
        const char* name;
    };
    for (const Case& c : {Case{{1, 1}, kPi, "I2"}, Case{{1, 2}, kPi / std::sqrt(2.0), "diag(1,2)"}}) {
        run_guarded(2, kC2Time, [&](double t0) {
            const QuadFormCtx ctx = build_ctx(diag(c.a));
            const ExpSumSeries s = rep_sums(ctx, parse_shift(kAlpha2, 2), 1000000);
            const double r = mean_square_trace(s, {1000000})[0].ratio;
            const double rel = std::fabs(r / c.target - 1.0);
            report(2, rel <= kC2Rel, now() - t0, kC2Time,
                   std::string(c.name) + " R(N)/N at N=1e6 = " + g(r) + " vs " + g(c.target) + " (rel " + g(rel) + ")");
        });
    }
}

struct Shared {
    QuadFormCtx i2, d12;
    ShiftVector alpha;
    RadiiMultiset rm_i2, rm_d12;
    double build_i2 = 0.0, build_d12 = 0.0;
};

void crit3(Shared& sh) {
    run_guarded(3, kC3Time, [&](double t0) {
        sh.rm_i2 = build_radii(sh.i2, sh.alpha, 1601.0);
        sh.build_i2 = now() - t0;
        const DeviationEvaluator ev = make_deviation(sh.i2, sh.rm_i2);
        const AveragingKernel k = AveragingKernel::bump(1.0, 2.0);
        const auto res = mean_F(ev, k, {100.0, 200.0, 400.0, 800.0});
        std::string d = "<F>_T for T=100,200,400,800:";
        for (const auto& r : res) d += " " + g(r.value);
        const double a100 = std::fabs(res[0].value), a800 = std::fabs(res[3].value);
        report(3, a800 < kC3Abs && a800 < a100, now() - t0, kC3Time, d + " (need |T=800| < 0.1 and < |T=100|)");
    });
}

void crit4(Shared& sh) {
    run_guarded(4, kC4Time, [&](double t0) {
        const AveragingKernel k = AveragingKernel::bump(1.0, 2.0);
        std::string d;
        bool ok = true;
        double extra = sh.build_i2; // I2 radii were built under criterion 3
        for (int which = 0; which < 2; ++which) {
            const QuadFormCtx& ctx = which ? sh.d12 : sh.i2;
            if (which) {
                sh.rm_d12 = build_radii(sh.d12, sh.alpha, 1600.0);
            }
            const RadiiMultiset& rm = which ? sh.rm_d12 : sh.rm_i2;
            const VarianceSeries A = variance_series(ctx, sh.alpha, 100000);
            const VarFResult r = var_F(make_deviation(ctx, rm), k, 800.0, A);
            ok = ok && r.ratio >= kC4Lo && r.ratio <= kC4Hi;
            d += std::string(which ? "; diag(1,2)" : "I2") + " <|F|^2>_800 = " + g(r.msq.value) + ", A/(2 pi^2) = " +
                 g(r.target) + " (tail heuristic " + g(r.series.tail_bound) + "), ratio " + g(r.ratio);
        }
        report(4, ok, now() - t0 + extra, kC4Time, d + " (band [0.8, 1.2])");
    });
}

void crit5(Shared& sh) {
    run_guarded(5, kC5Time, [&](double t0) {
        const AveragingKernel k = AveragingKernel::bump(1.0, 2.0);
        const double eps = eps_rule(800.0, 0.5);
        const VarSResult r = var_S(make_deviation(sh.i2, sh.rm_i2), k, 800.0, eps);
        const bool ok = r.ratio >= kC5Lo && r.ratio <= kC5Hi && std::fabs(r.mean.value) < kC5Mean;
        report(5, ok, now() - t0 + sh.build_i2, kC5Time,
               "I2 eps=" + g(eps) + ": <|S|^2>_800 = " + g(r.msq.value) + " vs 2 pi, ratio " + g(r.ratio) +
                   " (band [0.8, 1.2]); <S>_800 = " + g(r.mean.value) + " (need |.| < 0.15)");
    });
}

void crit6() {
    run_guarded(6, kC6Time, [](double t0) {
        std::mt19937_64 rng(20261016);
        std::uniform_int_distribution<int> dn(1, 3), da(1, 4);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const int n = dn(rng);
            std::vector<std::int64_t> a;
            std::vector<double> x;
            for (int k = 0; k < n; ++k) {
                a.push_back(da(rng));
                x.push_back(u01(rng));
            }
            // 1/v log-uniform in [1, 1000]; sparser in higher dimension is not needed at this scale
            const double v = std::pow(10.0, -3.0 * u01(rng));
            const MsqIdentity m = msq_integral_u(a, v, x);
            worst = std::max(worst, std::fabs(m.lhs - m.rhs));
        }
        report(6, worst < kC6Abs, now() - t0, kC6Time, "50 random (a, v, x), 1/v <= 1e3: max |lhs - rhs| = " + g(worst));
    });
}

void crit7() {
    run_guarded(7, kC7Time, [](double t0) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        double rot = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double lambda = 0.5 + 1.5 * u01(rng);
            double phi = 2.0 * kPi * u01(rng);
            if (std::fabs(std::sin(phi)) < 0.05) phi += 0.3;
            const double w = 4.0 * u01(rng) - 2.0;
            rot = std::max(rot, std::abs(gaussian_rotation(lambda, phi)(w) - rotation_quadrature(lambda, phi, w)));
        }
        double eu = 0.0, em = 0.0, ef = 0.0;
        std::uniform_int_distribution<int> dh(-3, 3);
        for (int i = 0; i < 40; ++i) {
            GroupPoint gp = GroupPoint::identity(2);
            for (int k = 0; k < 2; ++k) {
                gp.u[static_cast<std::size_t>(k)] = 2.0 * u01(rng) - 1.0;
                gp.v[static_cast<std::size_t>(k)] = 0.5 + 1.5 * u01(rng);
                gp.phi[static_cast<std::size_t>(k)] = 2.0 * kPi * u01(rng);
                gp.x[static_cast<std::size_t>(k)] = 2.0 * u01(rng) - 1.0;
                gp.y[static_cast<std::size_t>(k)] = 2.0 * u01(rng) - 1.0;
            }
            gp.t = u01(rng);
            const ThetaProfile gauss = ThetaProfile::gaussian(1.0);
            const int k = i % 2;
            eu = std::max(eu, phase_check(gauss, gp, Generator::U(k)).max_err);
            em = std::max(em, phase_check(gauss, gp, Generator::M({dh(rng), dh(rng)}, {dh(rng), dh(rng)})).max_err);
            ef = std::max(ef, phase_check(gauss, gp, Generator::F(k)).max_err);
            // compact profiles at phi = 0 for the two generators that keep phi fixed
            GroupPoint g0 = gp;
            g0.phi = {0.0, 0.0};
            const ThetaProfile cut = ThetaProfile::smooth_cutoff(0.3);
            eu = std::max(eu, phase_check(cut, g0, Generator::U(k)).max_err);
            em = std::max(em, phase_check(cut, g0, Generator::M({dh(rng), dh(rng)}, {dh(rng), dh(rng)})).max_err);
        }
        const bool ok = rot < kC7Rot && eu < kC7UM && em < kC7UM && ef < kC7F;
        report(7, ok, now() - t0, kC7Time,
               "rotation vs quadrature " + g(rot) + "; U_k " + g(eu) + ", M_h " + g(em) + ", F_k " + g(ef) +
                   " (limits 1e-8, 1e-10, 1e-10, 1e-8)");
    });
}

void crit8() {
    run_guarded(8, kC8Time, [](double t0) {
        const auto rows = bridge_check({1, 1}, parse_shift(kAlpha2, 2), {1e-4}, ThetaProfile::smooth_cutoff(0.02));
        const BridgeRow& r = rows.at(0);
        const double vals[3] = {r.theta_msq, r.repsum_msq, kPi};
        double worst = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) worst = std::max(worst, std::fabs(vals[i] / vals[j] - 1.0));
        report(8, worst <= kC8Rel, now() - t0, kC8Time,
               "v=1e-4: theta side " + g(r.theta_msq) + ", R side " + g(r.repsum_msq) + ", target pi (cutoff-weighted " +
                   g(r.target) + "); worst pairwise rel " + g(worst));
    });
}

void crit9(Shared& sh) {
    run_guarded(9, kC9Time, [&](double t0) {
        const double Ks[4] = {10.0, 20.0, 40.0, 80.0};
        const double T = 100.0, zeta = 0.5;
        const ExpSumSeries adj = rep_sums(adjugate_ctx(sh.i2), sh.alpha, spectral_cut(80.0, zeta));
        const DeviationEvaluator ev = make_deviation(sh.i2, sh.rm_i2);
        const AveragingKernel k = AveragingKernel::bump(1.0, 2.0);
        const Mollifier mol = Mollifier::gaussian(2);
        double vals[4];
        bool decreasing = true;
        std::string d = "<|F - F_K0|^2>_100 for K=10,20,40,80:";
        for (int i = 0; i < 4; ++i) {
            const SpectralEvaluator sp = make_spectral(adj, sh.i2.detM, Ks[i], zeta, mol);
            vals[i] = spectral_gap_msq(ev, sp, k, T).value;
            d += " " + g(vals[i]);
            if (i && !(vals[i] < vals[i - 1])) decreasing = false;
        }
        // least-squares fit of log C over the model C T^{n-1} / K
        double logc = 0.0;
        for (int i = 0; i < 4; ++i) logc += std::log(vals[i] * Ks[i] / T);
        const double C = std::exp(logc / 4.0);
        double spread = 1.0;
        for (int i = 0; i < 4; ++i) {
            const double q = vals[i] / (C * T / Ks[i]);
            spread = std::max(spread, std::max(q, 1.0 / q));
        }
        report(9, decreasing && spread <= kC9Factor, now() - t0, kC9Time,
               d + "; fitted C " + g(C) + ", worst factor " + g(spread) + " (need strictly decreasing, factor <= 3)");
    });
}

void crit10(Shared& sh) {
    run_guarded(10, kC10Time, [&](double t0) {
        const double zeta = 0.5;
        const std::int64_t pcut = spectral_cut(500.0, zeta);
        // the adjugate of I2 is I2, so one series serves both diagnostics
        const ExpSumSeries s = rep_sums(adjugate_ctx(sh.i2), sh.alpha, std::max<std::int64_t>(pcut, 40000));
        const BlockSumResult b = eps_block_sum(s, 0.01, 1.0, 4.0);
        const double rb = std::fabs(b.value / b.target - 1.0);
        const double sd = diag_shell_variance(s, sh.i2.detM, 0.02, 500.0, zeta, Mollifier::gaussian(2));
        const double rd = std::fabs(sd / (2.0 * kPi) - 1.0);
        report(10, rb <= kC10Block && rd <= kC10Diag, now() - t0, kC10Time,
               "block sum " + g(b.value) + " vs " + g(b.target) + " (rel " + g(rb) + ", limit 0.10); S^D(0.02, K=500) " +
                   g(sd) + " vs 2 pi (rel " + g(rd) + ", limit 0.15)");
    });
}

// Exact membership by box scan; irrational centers use long double.
std::set<std::vector<std::int64_t>> box_scan(const QuadFormCtx& ctx, const std::vector<long double>& c, double R) {
    const int n = ctx.n;
    Eigen::MatrixXd Md = ctx.M.cast<double>();
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Md).eigenvalues().minCoeff();
    const auto B = static_cast<std::int64_t>(std::ceil(R / std::sqrt(lmin))) + 1;
    std::set<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> m(static_cast<std::size_t>(n), -B);
    while (true) {
        long double q = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                q += (static_cast<long double>(m[static_cast<std::size_t>(i)]) - c[static_cast<std::size_t>(i)]) *
                     static_cast<long double>(ctx.M(i, j)) *
                     (static_cast<long double>(m[static_cast<std::size_t>(j)]) - c[static_cast<std::size_t>(j)]);
        if (q <= static_cast<long double>(R) * R) out.insert(m);
        int k = 0;
        while (k < n && ++m[static_cast<std::size_t>(k)] > B) m[static_cast<std::size_t>(k++)] = -B;
        if (k == n) break;
    }
    return out;
}

void crit11(Shared& sh) {
    run_guarded(11, kC11Time, [&](double t0) {
        std::vector<std::string> notes;
        bool ok = true;

        // enumeration against a box scan
        struct EnumCase {
            IntMatrix M;
            std::string alpha;
            double R;
        };
        IntMatrix m2(2, 2), m3(3, 3);
        m2 << 2, 1, 1, 3;
        m3 << 3, 1, 0, 1, 2, 1, 0, 1, 4;
        std::vector<EnumCase> cases = {{diag({3}), "0", 20.0},         {diag({2}), "sqrt2-1", 17.5},
                                       {m2, "0,0", 20.0},              {m2, kAlpha2, 19.25},
                                       {diag({1, 2, 3}), "0,0,0", 12.0}, {m3, "phi-1,e-2,pi-3", 11.5},
                                       {m3, "0,0,0", 20.0}};
        bool enum_ok = true;
        for (const auto& c : cases) {
            const QuadFormCtx ctx = build_ctx(c.M);
            const ShiftVector a = parse_shift(c.alpha, ctx.n);
            std::set<std::vector<std::int64_t>> got;
            enumerate(ctx, a, c.R, [&](const IntVector& m, double) { got.insert(std::vector<std::int64_t>(m.data(), m.data() + m.size())); });
            std::vector<long double> cen;
            for (const auto& x : a.comps) cen.push_back(static_cast<long double>(x));
            enum_ok = enum_ok && got == box_scan(ctx, cen, c.R);
        }
        notes.push_back(std::string("enumeration ") + (enum_ok ? "matches" : "DIFFERS FROM") + " box scan on 7 cases");
        ok = ok && enum_ok;

        // M * adj(M) = det(M) I, exactly in integers
        bool adj_ok = true;
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> de(-3, 3);
        for (int n = 1; n <= 6; ++n) {
            for (int rep = 0; rep < 5; ++rep) {
                IntMatrix B(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) B(i, j) = de(rng);
                IntMatrix M = B.transpose() * B + IntMatrix::Identity(n, n);
                const QuadFormCtx ctx = build_ctx(M);
                adj_ok = adj_ok && (M * ctx.adjM == ctx.detM * IntMatrix::Identity(n, n));
            }
        }
        notes.push_back(std::string("M adj(M) = det I ") + (adj_ok ? "exact" : "FAILED"));
        ok = ok && adj_ok;

        // <1>_T = 1
        const AveragingKernel k = AveragingKernel::bump(1.0, 2.0);
        double unit = 0.0;
        for (double T : {1.0, 100.0, 800.0}) {
            const auto r = average_piecewise(std::span<const double>(sh.rm_i2.radii), T, k,
                                             [](double, std::span<const double> t, std::span<double> v) {
                                                 for (std::size_t i = 0; i < t.size(); ++i) v[i] = 1.0;
                                             });
            unit = std::max(unit, std::fabs(r.value - 1.0));
        }
        notes.push_back("|<1>_T - 1| = " + g(unit));
        ok = ok && unit < kC11Unit;

        // S = (F(t+eps) - F(t))/sqrt(eps) + correction
        const DeviationEvaluator ev = make_deviation(sh.i2, sh.rm_i2);
        std::uniform_real_distribution<double> ut(1.0, 1500.0), ue(-4.0, 0.0);
        double dec = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double t = ut(rng), eps = std::pow(10.0, ue(rng));
            const double s = S(ev, t, eps);
            const double alt = (F(ev, t + eps) - F(ev, t)) / std::sqrt(eps) + S_correction(ev, t, eps);
            dec = std::max(dec, std::fabs(s - alt) / std::max(1.0, std::fabs(s)));
        }
        notes.push_back("S decomposition rel err " + g(dec));
        ok = ok && dec < kC11Decomp;

        // serial vs parallel bit equality
        EnumOptions e1, e4;
        e4.workers = 4;
        const ShellBuckets b1 = bucket_shells(sh.d12, sh.alpha, 200000, e1);
        const ShellBuckets b4 = bucket_shells(sh.d12, sh.alpha, 200000, e4);
        const RadiiMultiset r1 = build_radii(sh.d12, sh.alpha, 300.0, e1);
        const RadiiMultiset r4 = build_radii(sh.d12, sh.alpha, 300.0, e4);
        PiecewiseOptions p1, p3;
        p3.workers = 3;
        const DeviationEvaluator evd = make_deviation(sh.d12, r1);
        const double m1 = mean_F2(evd, k, 140.0, p1).value, m3v = mean_F2(evd, k, 140.0, p3).value;
        const bool det = b1.sums == b4.sums && b1.counts == b4.counts && r1.radii == r4.radii && m1 == m3v;
        notes.push_back(std::string("parallel vs serial ") + (det ? "bit-identical" : "DIFFER"));
        ok = ok && det;

        std::string d;
        for (std::size_t i = 0; i < notes.size(); ++i) d += (i ? "; " : "") + notes[i];
        report(11, ok, now() - t0, kC11Time, d);
    });
}

} // namespace

int main() {
    Shared sh;
    sh.i2 = build_ctx(diag({1, 1}));
    sh.d12 = build_ctx(diag({1, 2}));
    sh.alpha = parse_shift(kAlpha2, 2);

    crit1();
    crit2();
    crit3(sh);
    crit4(sh);
    crit5(sh);
    crit6();
    crit7();
    crit8();
    crit9(sh);
    crit10(sh);
    crit11(sh);

    std::printf("%d criterion check(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
