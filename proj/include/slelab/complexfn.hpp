// Moebius maps, complete elliptic integrals, the rectangle->disc boundary
// correspondence, and a finite-difference Schwarzian derivative.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace slelab {

using Cx = std::complex<double>;

// Extended complex value: a point of the Riemann sphere. The point at
// infinity is carried explicitly, never as NaN.
struct ExtCx {
    Cx value{};
    bool infinite = false;

    static ExtCx inf() { return ExtCx{Cx{}, true}; }
    static ExtCx at(Cx z) { return ExtCx{z, false}; }
};

// z -> (a z + b) / (c z + d), with ad - bc != 0.
struct MoebiusMap {
    Cx a{1.0}, b{0.0}, c{0.0}, d{1.0};

    Cx determinant() const { return a * d - b * c; }

    static MoebiusMap identity() { return MoebiusMap{}; }

    // Cayley-type map used throughout: z -> (i - z) / (i + z), half-plane to disc.
    static MoebiusMap halfplane_to_disc() {
        return MoebiusMap{Cx(-1.0, 0.0), Cx(0.0, 1.0), Cx(1.0, 0.0), Cx(0.0, 1.0)};
    }

    // Composition corresponds to the coefficient-matrix product.
    MoebiusMap compose(const MoebiusMap& inner) const {
        return MoebiusMap{a * inner.a + b * inner.c, a * inner.b + b * inner.d,
                          c * inner.a + d * inner.c, c * inner.b + d * inner.d};
    }

    MoebiusMap inverse() const { return MoebiusMap{d, -b, -c, a}; }
};

inline ExtCx mobius_apply(const MoebiusMap& m, Cx z) {
    const Cx den = m.c * z + m.d;
    const double scale = std::abs(m.c) * std::abs(z) + std::abs(m.d);
    if (std::abs(den) <= 1e-14 * (scale > 0.0 ? scale : 1.0)) return ExtCx::inf();
    return ExtCx::at((m.a * z + m.b) / den);
}

inline ExtCx mobius_apply(const MoebiusMap& m, const ExtCx& z) {
    if (z.infinite) {
        if (std::abs(m.c) == 0.0) return ExtCx::inf();
        return ExtCx::at(m.a / m.c);
    }
    return mobius_apply(m, z.value);
}

inline Cx cross_ratio(Cx z1, Cx z2, Cx z3, Cx z4) {
    return ((z1 - z3) * (z2 - z4)) / ((z1 - z4) * (z2 - z3));
}

// Complete elliptic integral of the first kind via the arithmetic-geometric
// mean. Quadratic convergence; stops when the means agree to 1e-15.
inline double elliptic_K(double k) {
    if (!(k >= 0.0 && k < 1.0)) throw std::domain_error("elliptic_K: modulus must lie in [0,1)");
    double a = 1.0;
    double b = std::sqrt(1.0 - k * k);
    for (int iter = 0; iter < 64 && std::fabs(a - b) > 1e-15 * a; ++iter) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return std::numbers::pi / (2.0 * a);
}

// Solves K(k)/K(k') = ratio for k in (0,1), k' the complementary modulus.
inline double modulus_from_K_ratio(double ratio) {
    double lo = 1e-300, hi = 1.0 - 1e-16;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double r = elliptic_K(mid) / elliptic_K(std::sqrt((1.0 - mid) * (1.0 + mid)));
        (r < ratio ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Fraction of the unit circle covered by the image of one short side of an
// M x 1 rectangle under the conformal map to the disc, center to center.
//
// The rectangle [-K,K] x [0,K'] (modulus k chosen so 2K/K' = M) maps to the
// upper half-plane by the Jacobi sn function; the corners go to +-1, +-1/k and
// the center to i/sqrt(k). Following with the Moebius map that sends the
// center to 0, the corner images land at angles -2*atan2(1/sqrt(k), x), so the
// short-side arc has length 2*(atan(1/sqrt(k)) - atan(sqrt(k))).
inline double rect_arc_fraction(double aspect) {
    if (!(aspect >= 1.0)) throw std::domain_error("rect_arc_fraction: aspect must be >= 1");
    const double k = modulus_from_K_ratio(aspect / 2.0);
    const double sk = std::sqrt(k);
    return (std::atan(1.0 / sk) - std::atan(sk)) / std::numbers::pi;
}

// Finite-difference Schwarzian derivative f'''/f' - (3/2)(f''/f')^2 on a
// 7-point stencil along the real direction.
inline Cx schwarzian(const std::function<Cx(Cx)>& f, Cx z, double h = 1e-3) {
    Cx v[7];
    for (int j = -3; j <= 3; ++j) v[j + 3] = f(z + Cx(j * h, 0.0));
    const Cx d1 = (-v[0] / 60.0 + 3.0 * v[1] / 20.0 - 3.0 * v[2] / 4.0 + 3.0 * v[4] / 4.0 -
                   3.0 * v[5] / 20.0 + v[6] / 60.0) /
                  h;
    const Cx d2 = (v[0] / 90.0 - 3.0 * v[1] / 20.0 + 3.0 * v[2] / 2.0 - 49.0 * v[3] / 18.0 +
                   3.0 * v[4] / 2.0 - 3.0 * v[5] / 20.0 + v[6] / 90.0) /
                  (h * h);
    const Cx d3 = (v[0] / 8.0 - v[1] + 13.0 * v[2] / 8.0 - 13.0 * v[4] / 8.0 + v[5] -
                   v[6] / 8.0) /
                  (h * h * h);
    if (std::abs(d1) < 1e-12 * (std::abs(v[3]) + 1.0))
        throw std::domain_error("schwarzian: critical point (|f'| below tolerance)");
    const Cx ratio = d2 / d1;
    return d3 / d1 - 1.5 * ratio * ratio;
}

} // namespace slelab
