#pragma once

#include "ellipsum/diophantine.hpp"
#include "ellipsum/quadform.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace ellipsum {

using cplx = std::complex<double>;

/// Point (z, phi; xi, t) of the Jacobi group in Iwasawa coordinates.
struct GroupPoint {
    int n = 0;
    std::vector<double> u, v, phi; // z_k = u_k + i v_k, v_k > 0
    std::vector<double> x, y;      // xi = (x, y)
    double t = 0.0;

    static GroupPoint identity(int n); // z = i, everything else zero
};

struct ThetaProfile {
    enum class Kind { Gaussian, SmoothCutoff, ExactIndicator };
    Kind kind = Kind::Gaussian;
    double lambda = 1.0; // Gaussian exp(-pi lambda |w|^2)
    double delta = 0.02; // cutoff: psi = 1 on [0,1], 0 beyond 1 + delta

    static ThetaProfile gaussian(double lambda = 1.0);
    static ThetaProfile smooth_cutoff(double delta);
    static ThetaProfile indicator();

    // profile value as a function of r = |w|^2
    double psi(double r) const;
    double support() const; // largest r with psi(r) != 0
};

// The integer index attached to an angle: 2 nu on nu*pi, 2 nu + 1 strictly between.
int sigma_index(double phi);

/// Image of exp(-pi lambda w^2) under the normalized rotation by phi:
/// w -> prefactor * exp(-pi lambda_phi w^2).
struct RotatedGaussian {
    cplx prefactor{1.0, 0.0};
    cplx lambda_phi{1.0, 0.0};
    cplx operator()(double w) const { return prefactor * std::exp(-3.14159265358979323846 * lambda_phi * (w * w)); }
};

RotatedGaussian gaussian_rotation(double lambda, double phi);

// The same image by direct quadrature of the oscillatory integral (sin(phi) != 0).
cplx rotation_quadrature(double lambda, double phi, double w);

constexpr double kMinTruncation = 8.0;

cplx theta_sum(const ThetaProfile& prof, const GroupPoint& g, double Lambda = kMinTruncation);

struct Generator {
    enum class Kind { F, U, M };
    Kind kind = Kind::F;
    int k = 0;                        // 0-based coordinate for F and U
    std::vector<std::int64_t> h1, h2; // for M

    static Generator F(int k);
    static Generator U(int k);
    static Generator M(std::vector<std::int64_t> h1, std::vector<std::int64_t> h2);
};

GroupPoint apply_generator(const Generator& gen, const GroupPoint& g);

struct PhaseCheck {
    cplx lhs;            // Theta(gen g)
    cplx rhs;            // predicted value
    cplx lemma_factor;   // unimodular factor as stated for the generator
    cplx central_factor; // e(-dt) from the central shift of the group law
    double max_err = 0.0;
};

// Compares Theta(gen g) with lemma_factor * e(-dt) * Theta(g), where dt is the
// shift of t done by the generator (nonzero only for U_k).
PhaseCheck phase_check(const ThetaProfile& prof, const GroupPoint& g, const Generator& gen, double Lambda = 12.0);

struct MsqIdentity {
    double lhs = 0.0; // (1/2) int_0^2 |Theta|^2 du, frequency by frequency
    double rhs = 0.0; // pair sum over equal norms
    std::int64_t points = 0;
};

MsqIdentity msq_integral_u(const std::vector<std::int64_t>& a, double v, const std::vector<double>& x);

struct BridgeRow {
    double v = 0.0;
    std::int64_t N = 0;
    double theta_msq = 0.0;  // (prod a)^{-1/2} (1/2) int |Theta|^2 du
    double repsum_msq = 0.0; // R(N) / N^{n/2}
    double target = 0.0;     // (prod a)^{-1/2} (n/2)|B| int psi^2 r^{n/2-1} dr
};

double cutoff_target(const std::vector<std::int64_t>& a, const ThetaProfile& prof);

std::vector<BridgeRow> bridge_check(const std::vector<std::int64_t>& a, const ShiftVector& alpha,
                                    const std::vector<double>& v_list, const ThetaProfile& prof, unsigned workers = 1);

} // namespace ellipsum
