#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ellipsum {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

// Recursive pairwise summation; the split points depend only on length,
// so results are reproducible for a given input order.
double pairwise_sum(std::span<const double> xs);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> xs);

// Compensated running sum for long streams where storing terms is wasteful.
class NeumaierSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int order);

// Composite Gauss-Legendre of a scalar callable over [a, b].
template <class F>
double integrate_gl(F&& f, double a, double b, int panels, int order = 16) {
    const GaussRule& g = gauss_legendre(order);
    const double h = (b - a) / panels;
    std::vector<double> part(static_cast<std::size_t>(panels));
    for (int k = 0; k < panels; ++k) {
        const double mid = a + (k + 0.5) * h;
        double s = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + 0.5 * h * g.nodes[i]);
        part[static_cast<std::size_t>(k)] = 0.5 * h * s;
    }
    return pairwise_sum(part);
}

// Exact fixed-point complex accumulator, scale 2^50. Integer addition is
// associative, so any partition of the terms yields the same bits.
struct FixedComplex {
    __int128 re = 0;
    __int128 im = 0;

    static constexpr double kScale = 1125899906842624.0; // 2^50

    void add(double r, double i) {
        re += static_cast<__int128>(std::llround(r * kScale));
        im += static_cast<__int128>(std::llround(i * kScale));
    }
    FixedComplex& operator+=(const FixedComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
    std::complex<double> value() const;
};

// cos(2*pi*x) for any finite |x| < 2^50, written so the compiler can
// vectorize loops around it (no calls, no branches).
inline double cos_turns(double x) {
    constexpr double kMagic = 6755399441055744.0; // 1.5 * 2^52, round-to-nearest trick
    double r = (x + kMagic) - kMagic;
    double z = kTwoPi * (x - r); // in [-pi, pi]
    z = z * z;
    // Taylor series of cos to degree 28, Horner in z = w^2
    double p = -1.0 / 304888344611713860501504000000.0;
    p = p * z + 1.0 / 403291461126605635584000000.0;
    p = p * z - 1.0 / 620448401733239439360000.0;
    p = p * z + 1.0 / 1124000727777607680000.0;
    p = p * z - 1.0 / 2432902008176640000.0;
    p = p * z + 1.0 / 6402373705728000.0;
    p = p * z - 1.0 / 20922789888000.0;
    p = p * z + 1.0 / 87178291200.0;
    p = p * z - 1.0 / 479001600.0;
    p = p * z + 1.0 / 3628800.0;
    p = p * z - 1.0 / 40320.0;
    p = p * z + 1.0 / 720.0;
    p = p * z - 1.0 / 24.0;
    p = p * z + 1.0 / 2.0;
    return 1.0 - z * p;
}

} // namespace ellipsum
