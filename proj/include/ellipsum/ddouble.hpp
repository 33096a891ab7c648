#pragma once

#include <cmath>

namespace ellipsum {

// Unevaluated sum hi + lo, |lo| <= ulp(hi)/2. Enough for ~31 digits.
struct DD {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

inline DD quick_two_sum(double a, double b) {
    double s = a + b;
    return {s, b - (s - a)};
}

inline DD two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD operator+(DD a, DD b) {
    DD s = two_sum(a.hi, b.hi);
    DD t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }

inline DD operator*(DD a, DD b) {
    DD p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DD operator*(DD a, double b) {
    DD p = two_prod(a.hi, b);
    p.lo += a.lo * b;
    return quick_two_sum(p.hi, p.lo);
}

inline DD& operator+=(DD& a, DD b) { return a = a + b; }

inline DD dd_sqrt(DD a) {
    if (a.hi <= 0.0) return DD(0.0);
    double x = std::sqrt(a.hi);
    // one Newton step in double-double
    DD x2 = two_prod(x, x);
    double corr = ((a.hi - x2.hi) - x2.lo + a.lo) / (2.0 * x);
    return quick_two_sum(x, corr);
}

// Fractional part in [-1/2, 1/2); result carries the low-order bits.
inline double dd_frac_centered(DD a) {
    double k = std::nearbyint(a.hi);
    DD r = two_sum(a.hi - k, a.lo);
    double f = r.hi + r.lo;
    if (f >= 0.5) f -= 1.0;
    if (f < -0.5) f += 1.0;
    return f;
}

} // namespace ellipsum
