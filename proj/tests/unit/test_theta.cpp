#include <doctest.h>

#include "ellipsum/errors.hpp"
#include "ellipsum/numeric.hpp"
#include "ellipsum/theta.hpp"

#include <cmath>
#include <random>

using namespace ellipsum;

namespace {

GroupPoint random_point(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> U(-1.0, 1.0), V(0.5, 2.0);
    GroupPoint g = GroupPoint::identity(n);
    for (int k = 0; k < n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        g.u[kk] = U(rng);
        g.v[kk] = V(rng);
        g.x[kk] = U(rng);
        g.y[kk] = U(rng);
    }
    g.t = U(rng);
    return g;
}

} // namespace

TEST_CASE("theta_sum: hand values") {
    const ThetaProfile gauss = ThetaProfile::gaussian();
    GroupPoint g = GroupPoint::identity(1);
    long double ref = 0;
    for (int m = -40; m <= 40; ++m) ref += std::exp(-3.14159265358979323846264L * m * m);
    const cplx th = theta_sum(gauss, g);
    CHECK(th.real() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
    CHECK(th.real() == doctest::Approx(1.0864348).epsilon(1e-7));
    CHECK(std::fabs(th.imag()) < 1e-15);

    g.t = 0.25;
    const cplx sh = theta_sum(gauss, g);
    // e(-1/4) = exp(i pi / 2) under e(t) = exp(-2 pi i t)
    CHECK(std::abs(sh - cplx(0.0, 1.0) * th) < 1e-14);
    CHECK(std::fabs(std::abs(sh) - std::abs(th)) < 1e-15);

    GroupPoint h = GroupPoint::identity(1);
    h.v[0] = 2.0;
    CHECK(std::abs(theta_sum(ThetaProfile::indicator(), h) - cplx(std::pow(2.0, 0.25), 0.0)) < 1e-14);

    CHECK_THROWS_AS(theta_sum(gauss, g, 7.9), Error);
    GroupPoint r = GroupPoint::identity(1);
    r.phi[0] = 0.3;
    CHECK_THROWS_AS(theta_sum(ThetaProfile::smooth_cutoff(0.1), r), Error);
}

TEST_CASE("theta_sum: translation and truncation invariants") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> T(-50.0, 50.0);
    const ThetaProfile gauss = ThetaProfile::gaussian();
    GroupPoint g = random_point(rng, 2);
    const double base = std::abs(theta_sum(gauss, g));
    for (int i = 0; i < 100; ++i) {
        g.t = T(rng);
        CHECK(std::fabs(std::abs(theta_sum(gauss, g)) - base) < 1e-13 * std::max(1.0, base));
    }
    for (int i = 0; i < 20; ++i) {
        GroupPoint q = random_point(rng, 2);
        q.phi = {0.7, 2.1};
        const cplx a = theta_sum(gauss, q, 8.0), b = theta_sum(gauss, q, 12.0);
        CHECK(std::abs(a - b) <= std::exp(-kPi * 64.0) + 1e-14 * std::abs(b));
    }
}

TEST_CASE("sigma index boundaries") {
    CHECK(sigma_index(0.0) == 0);
    CHECK(sigma_index(0.5) == 1);
    CHECK(sigma_index(kPi - 1e-9) == 1);
    CHECK(sigma_index(kPi) == 2);
    CHECK(sigma_index(kPi + 1e-9) == 3);
    CHECK(sigma_index(-0.5) == -1);
}

TEST_CASE("gaussian_rotation") {
    const RotatedGaussian r0 = gaussian_rotation(1.0, 0.0);
    for (double w : {0.0, 0.3, 1.2}) CHECK(std::abs(r0(w) - std::exp(-kPi * w * w)) < 1e-15);

    const RotatedGaussian rp = gaussian_rotation(1.0, kPi);
    for (double w : {0.0, 0.3, 1.2}) CHECK(std::fabs(std::abs(rp(w)) - std::exp(-kPi * w * w)) < 1e-15);

    const RotatedGaussian rh = gaussian_rotation(1.0, kPi / 2.0);
    for (double w : {0.0, 0.3, 1.2}) {
        CHECK(std::fabs(std::abs(rh(w)) - std::exp(-kPi * w * w)) < 1e-14);
        CHECK(std::abs(rh(w) - rotation_quadrature(1.0, kPi / 2.0, w)) < 1e-8);
    }

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> P(0.05, 6.2), L(0.5, 3.0), W(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
        const double phi = P(rng), lam = L(rng), w = W(rng);
        if (std::fabs(std::sin(phi)) < 1e-3) continue;
        const RotatedGaussian rg = gaussian_rotation(lam, phi);
        CHECK(std::abs(rg(w) - rotation_quadrature(lam, phi, w)) < 1e-8);
        // unitarity: int |f_phi|^2 = int |f|^2 = 1/sqrt(2 lam)
        const double norm2 = integrate_gl([&](double x) { return std::norm(rg(x)); }, -12.0, 12.0, 400, 20);
        CHECK(norm2 == doctest::Approx(1.0 / std::sqrt(2.0 * lam)).epsilon(1e-8));
    }
}

TEST_CASE("apply_generator") {
    GroupPoint g = GroupPoint::identity(2);
    g.x = {0.2, -0.4};
    g.y = {0.3, 0.1};
    const GroupPoint f = apply_generator(Generator::F(0), g);
    CHECK(f.u[0] == doctest::Approx(0.0));
    CHECK(f.v[0] == doctest::Approx(1.0));
    CHECK(f.phi[0] == doctest::Approx(kPi / 2.0));
    CHECK(f.x[0] == doctest::Approx(-0.3));
    CHECK(f.y[0] == doctest::Approx(0.2));

    const GroupPoint uu = apply_generator(Generator::U(1), apply_generator(Generator::U(1), g));
    CHECK(uu.u[1] == doctest::Approx(2.0));
    CHECK(uu.x[1] == doctest::Approx(1.0 - 0.4 + 2 * 0.1));
    CHECK(uu.t == doctest::Approx(0.05));

    const GroupPoint m0 = apply_generator(Generator::M({0, 0}, {0, 0}), g);
    CHECK(m0.x == g.x);
    CHECK(m0.y == g.y);
    CHECK(m0.t == g.t);

    CHECK_THROWS_AS(apply_generator(Generator::U(2), g), Error);
    CHECK_THROWS_AS(apply_generator(Generator::M({1}, {0, 0}), g), Error);
}

TEST_CASE("phase_check") {
    std::mt19937_64 rng(17);
    const ThetaProfile gauss = ThetaProfile::gaussian();
    for (int i = 0; i < 20; ++i) {
        const GroupPoint g = random_point(rng, 2);
        const PhaseCheck m = phase_check(gauss, g, Generator::M({1, 0}, {1, 0}));
        CHECK(m.max_err < 1e-10);
        CHECK(std::abs(m.lemma_factor + 1.0) < 1e-15);
        const PhaseCheck u = phase_check(gauss, g, Generator::U(0));
        CHECK(u.max_err < 1e-10);
        const PhaseCheck f = phase_check(gauss, g, Generator::F(1));
        CHECK(f.max_err < 1e-8);
    }
    const PhaseCheck f0 = phase_check(gauss, GroupPoint::identity(1), Generator::F(0));
    CHECK(std::abs(f0.lhs / theta_sum(gauss, GroupPoint::identity(1)) - std::exp(cplx(0.0, -kPi / 4.0))) < 1e-8);
    CHECK_THROWS_AS(phase_check(ThetaProfile::smooth_cutoff(0.1), GroupPoint::identity(1), Generator::F(0)), Error);
}

namespace {

// trapezoid in u on [0, 2]; exact once the node count exceeds the top frequency
double msq_trapezoid(const std::vector<std::int64_t>& a, double v, const std::vector<double>& x, int J) {
    const int n = static_cast<int>(a.size());
    long double acc = 0;
    for (int j = 0; j < J; ++j) {
        const double u = 2.0 * j / J;
        GroupPoint g = GroupPoint::identity(n);
        for (int k = 0; k < n; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            g.u[kk] = static_cast<double>(a[kk]) * u;
            g.v[kk] = static_cast<double>(a[kk]) * v;
            g.x[kk] = x[kk];
        }
        acc += std::norm(theta_sum(ThetaProfile::indicator(), g));
    }
    return static_cast<double>(acc / J);
}

} // namespace

TEST_CASE("msq_integral_u against the trapezoid oracle") {
    const MsqIdentity one = msq_integral_u({1}, 2.0, {0.37});
    CHECK(one.lhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(one.rhs == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const MsqIdentity d = msq_integral_u({1, 1}, 0.3, {0.0, 0.0});
    CHECK(d.rhs == doctest::Approx(0.3 * (1 + 16 + 16)).epsilon(1e-13));
    CHECK(std::fabs(d.lhs - d.rhs) < 1e-12);
    CHECK(d.lhs == doctest::Approx(msq_trapezoid({1, 1}, 0.3, {0.0, 0.0}, 16)).epsilon(1e-12));

    const MsqIdentity h = msq_integral_u({1, 1}, 0.6, {0.5, 0.5});
    CHECK(h.rhs == doctest::Approx(0.6 * (1 + 16)).epsilon(1e-13));
    CHECK(std::fabs(h.lhs - h.rhs) < 1e-12);

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> A(1, 3);
    std::uniform_real_distribution<double> X(-1.0, 1.0), V(0.01, 0.2);
    for (int i = 0; i < 10; ++i) {
        const std::vector<std::int64_t> a = {A(rng), A(rng)};
        const double v = V(rng);
        const std::vector<double> x = {X(rng), X(rng)};
        const MsqIdentity r = msq_integral_u(a, v, x);
        const int J = static_cast<int>(std::ceil(1.0 / v)) + 8;
        CHECK(std::fabs(r.lhs - r.rhs) < 1e-12 * std::max(1.0, r.lhs));
        CHECK(r.lhs == doctest::Approx(msq_trapezoid(a, v, x, J)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(msq_integral_u({1, 1}, 0.0, {0.0, 0.0}), Error);
    CHECK_THROWS_AS(msq_integral_u({1, 1}, 1e-9, {0.0, 0.0}), Error);
}

TEST_CASE("cutoff target sharpens toward the ball volume") {
    const double t1 = cutoff_target({1, 1}, ThetaProfile::smooth_cutoff(0.2));
    const double t2 = cutoff_target({1, 1}, ThetaProfile::smooth_cutoff(0.02));
    CHECK(t1 > t2);
    CHECK(t2 > kPi);
    CHECK(t2 - kPi < 0.2 * (t1 - kPi));
    CHECK(cutoff_target({1, 2}, ThetaProfile::indicator()) == doctest::Approx(kPi / std::sqrt(2.0)));
}
