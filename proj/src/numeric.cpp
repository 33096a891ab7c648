#include "ellipsum/numeric.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace ellipsum {

namespace {

template <class T>
T pairwise_impl(const T* x, std::size_t n) {
    if (n <= 16) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_impl(x, h) + pairwise_impl(x + h, n - h);
}

GaussRule make_rule(int order) {
    GaussRule g;
    g.nodes.resize(static_cast<std::size_t>(order));
    g.weights.resize(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        long double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1, p1 = x;
            for (int k = 2; k <= order; ++k) {
                long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (order == 1) p1 = x, p0 = 1;
            dp = order * (x * p1 - p0) / (x * x - 1);
            long double dx = p1 / dp;
            x -= dx;
            if (std::fabs(static_cast<double>(dx)) < 1e-19) break;
        }
        // recompute derivative at the converged node
        long double p0 = 1, p1 = x;
        for (int k = 2; k <= order; ++k) {
            long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1);
        g.nodes[static_cast<std::size_t>(i)] = static_cast<double>(-x);
        g.weights[static_cast<std::size_t>(i)] = static_cast<double>(2 / ((1 - x * x) * dp * dp));
    }
    return g;
}

} // namespace

double pairwise_sum(std::span<const double> xs) { return pairwise_impl(xs.data(), xs.size()); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> xs) {
    return pairwise_impl(xs.data(), xs.size());
}

void NeumaierSum::add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

const GaussRule& gauss_legendre(int order) {
    if (order < 1 || order > 512) throw std::invalid_argument("gauss_legendre: order out of range");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
    return it->second;
}

std::complex<double> FixedComplex::value() const {
    // split into high and low 64-bit words so the conversion is correctly rounded enough
    auto conv = [](__int128 v) {
        const bool neg = v < 0;
        unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
        const double hi = static_cast<double>(static_cast<std::uint64_t>(u >> 64)) * 18446744073709551616.0;
        const double lo = static_cast<double>(static_cast<std::uint64_t>(u));
        const double r = (hi + lo) / kScale;
        return neg ? -r : r;
    };
    return {conv(re), conv(im)};
}

} // namespace ellipsum
