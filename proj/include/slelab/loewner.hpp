// Forward/backward solvers for the chordal and radial Loewner equations,
// trace evaluation, half-plane capacity, and driving-term extraction.
//
// Chordal discretization: piecewise-constant driver with the exact
// square-root slit map per step, so capacities add exactly and the
// constant-driver closed forms are reproduced to rounding error.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slelab/complexfn.hpp"

namespace slelab {

enum class DriverKind { chordal, radial };

// Driving function sampled on a uniform capacity-time grid t_i = i*dt.
struct Driver {
    double dt = 0.0;
    DriverKind kind = DriverKind::chordal;
    std::vector<double> w;  // chordal: real values W_i
    std::vector<Cx> zeta;   // radial: unit-modulus values zeta_i

    std::size_t steps() const {
        return (kind == DriverKind::chordal ? w.size() : zeta.size()) - 1;
    }
    double horizon() const { return dt * double(steps()); }

    static Driver chordal_constant(double value, double dt, std::size_t n) {
        Driver d;
        d.dt = dt;
        d.kind = DriverKind::chordal;
        d.w.assign(n + 1, value);
        return d;
    }

    static Driver radial_from_phases(const std::vector<double>& theta, double dt) {
        Driver d;
        d.dt = dt;
        d.kind = DriverKind::radial;
        d.zeta.reserve(theta.size());
        for (double th : theta) d.zeta.push_back(std::polar(1.0, th));
        return d;
    }
};

struct Trace {
    std::vector<double> t;
    std::vector<Cx> pts;
};

// Result of driving a point through the flow: either the value g_t(z), or a
// swallow signal carrying the swallow time.
struct FlowResult {
    bool swallowed = false;
    double tau = std::numeric_limits<double>::infinity();
    Cx value{};
};

namespace detail {

// sqrt with values in the closed upper half-plane (branch cut along [0,inf)).
inline Cx sqrt_upper(Cx z) {
    Cx s = std::sqrt(z);
    if (s.imag() < 0.0) s = -s;
    return s;
}

// One chordal step of duration tau with driver value c: the exact map from
// H minus the vertical slit onto H. Real points keep their side of c.
inline Cx chordal_step(Cx z, double c, double tau) {
    const Cx u = z - c;
    if (u.imag() == 0.0) {
        const double root = std::sqrt(u.real() * u.real() + 4.0 * tau);
        return Cx(c + (u.real() >= 0.0 ? root : -root), 0.0);
    }
    return c + sqrt_upper(u * u + Cx(4.0 * tau, 0.0));
}

// Inverse step: H -> H minus the slit.
inline Cx chordal_step_inverse(Cx w, double c, double tau) {
    const Cx u = w - c;
    if (u.imag() == 0.0 && u.real() * u.real() >= 4.0 * tau) {
        const double root = std::sqrt(u.real() * u.real() - 4.0 * tau);
        return Cx(c + (u.real() >= 0.0 ? root : -root), 0.0);
    }
    return c + sqrt_upper(u * u - Cx(4.0 * tau, 0.0));
}

} // namespace detail

inline double swallow_threshold(Cx z) { return 1e-9 * (1.0 + std::abs(z)); }

// g_t(z) for a chordal driver, by composing the exact elementary maps of the
// piecewise-constant segments. Swallowing is reported, not thrown.
inline FlowResult chordal_forward(const Driver& d, Cx z, double t) {
    if (d.kind != DriverKind::chordal) throw std::invalid_argument("chordal_forward: driver is radial");
    if (t < 0.0 || t > d.horizon() + 1e-12) throw std::domain_error("chordal_forward: time outside driver horizon");
    const double thresh = swallow_threshold(z);
    Cx g = z;
    double s = 0.0;
    std::size_t i = 0;
    while (s < t - 1e-15) {
        const double c = d.w[i];
        if (std::abs(g - c) < thresh) return FlowResult{true, s, g};
        const double tau = std::min(d.dt, t - s);
        // a point on the slit line is overtaken by the growing tip
        if (std::abs(g.real() - c) <= thresh && g.imag() * g.imag() <= 4.0 * tau)
            return FlowResult{true, s + g.imag() * g.imag() / 4.0, Cx(c, 0.0)};
        g = detail::chordal_step(g, c, tau);
        s += tau;
        ++i;
        // the driver jumps to its next value; a real point is swallowed if the
        // jump moves the driver past it
        if (i < d.w.size() && g.imag() == 0.0) {
            const double side_before = g.real() - c;
            const double side_after = g.real() - d.w[i];
            if (side_before * side_after <= 0.0) return FlowResult{true, s, g};
        }
    }
    return FlowResult{false, 0.0, g};
}

inline std::optional<double> chordal_swallow_time(const Driver& d, Cx z) {
    FlowResult r = chordal_forward(d, z, d.horizon());
    if (r.swallowed) return r.tau;
    return std::nullopt;
}

// Trace point gamma(t_i) = f_{t_i}(W_i) by backward composition of the
// inverse elementary maps (zipper evaluation).
inline Cx chordal_trace_point(const Driver& d, std::size_t i) {
    Cx w = Cx(d.w[i], 0.0);
    for (std::size_t j = i; j-- > 0;) w = detail::chordal_step_inverse(w, d.w[j], d.dt);
    return w;
}

inline Trace chordal_trace(const Driver& d, std::size_t stride = 1) {
    Trace tr;
    for (std::size_t i = 0; i < d.w.size(); i += stride) {
        tr.t.push_back(double(i) * d.dt);
        tr.pts.push_back(chordal_trace_point(d, i));
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Radial solver
// ---------------------------------------------------------------------------

namespace detail {

inline Cx radial_rhs(Cx g, Cx zeta) { return g * (zeta + g) / (zeta - g); }

inline Cx rk4_step(Cx g, Cx zeta0, Cx zeta1, double h, int sign) {
    // driver interpolated at the half step; sign=-1 integrates backwards
    const Cx zm = (zeta0 + zeta1) / std::abs(zeta0 + zeta1);
    const double s = sign;
    const Cx k1 = s * radial_rhs(g, zeta0);
    const Cx k2 = s * radial_rhs(g + 0.5 * h * k1, zm);
    const Cx k3 = s * radial_rhs(g + 0.5 * h * k2, zm);
    const Cx k4 = s * radial_rhs(g + h * k3, zeta1);
    return g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Cx zeta_at(const Driver& d, double s) {
    const double x = s / d.dt;
    const std::size_t i = std::min<std::size_t>(std::size_t(x), d.zeta.size() - 1);
    if (i + 1 >= d.zeta.size()) return d.zeta.back();
    const double f = x - double(i);
    // interpolate on the circle through the shorter arc
    const Cx a = d.zeta[i], b = d.zeta[i + 1];
    const double dth = std::arg(b / a);
    return a * std::polar(1.0, f * dth);
}

} // namespace detail

// g_t(z) for a radial driver by adaptive 4th-order integration. Steps are
// shortened near the singularity |zeta - g| -> 0; crossing the swallow
// threshold reports the swallow time.
inline FlowResult radial_forward(const Driver& d, Cx z, double t) {
    if (d.kind != DriverKind::radial) throw std::invalid_argument("radial_forward: driver is chordal");
    if (std::abs(z) >= 1.0) throw std::domain_error("radial_forward: z must lie in the open disc");
    if (t < 0.0 || t > d.horizon() + 1e-12) throw std::domain_error("radial_forward: time outside driver horizon");
    const double thresh = swallow_threshold(z);
    Cx g = z;
    double s = 0.0;
    while (s < t - 1e-15) {
        const Cx zeta = detail::zeta_at(d, s);
        const double gap = std::abs(zeta - g);
        if (gap < thresh) return FlowResult{true, s, g};
        double h = std::min({t - s, 0.25 * d.dt, 0.05 * gap * gap});
        h = std::max(h, 1e-14);
        const Cx g1 = detail::rk4_step(g, zeta, detail::zeta_at(d, s + h), h, +1);
        if (std::abs(g1) > 1.0 - 1e-14 || std::abs(detail::zeta_at(d, s + h) - g1) < thresh)
            return FlowResult{true, s + h, g1};
        g = g1;
        s += h;
    }
    return FlowResult{false, 0.0, g};
}

// f_t(w) = g_t^{-1}(w) by integrating the same equation backwards in time.
inline Cx radial_backward(const Driver& d, Cx w, double t) {
    Cx phi = w;
    double s = t;
    while (s > 1e-15) {
        const Cx zeta = detail::zeta_at(d, s);
        const double gap = std::abs(zeta - phi);
        double h = std::min({s, 0.25 * d.dt, 0.05 * gap * gap});
        h = std::max(h, 1e-14);
        phi = detail::rk4_step(phi, zeta, detail::zeta_at(d, s - h), h, -1);
        if (std::abs(phi) > 1.0) phi /= std::abs(phi) * (1.0 + 1e-15);
        s -= h;
    }
    return phi;
}

// ---------------------------------------------------------------------------
// Radial elementary slit maps (exact per-step maps, used by the radial trace
// and by driving-term extraction in the disc)
// ---------------------------------------------------------------------------

namespace detail {

// Cayley transforms between the disc (slit base at 1) and the half-plane.
inline Cx disc_to_half(Cx z) { return Cx(0.0, 1.0) * (1.0 - z) / (1.0 + z); }
inline Cx half_to_disc(Cx w) { return (Cx(0.0, 1.0) - w) / (Cx(0.0, 1.0) + w); }

struct RadialSlitMap {
    // removal map for the radial slit [s,1]*zeta: D minus slit -> D with
    // psi(0)=0 and psi'(0) = 1/m^2 = e^{dcap}
    Cx zeta;   // slit direction on the unit circle
    double h;  // vertical extent (1-s)/(1+s) in the half-plane frame
    double m;  // sqrt(1-h^2)
    double a;  // (1-m)/(1+m), automorphism parameter

    static RadialSlitMap for_depth(Cx zeta, double s) {
        RadialSlitMap r;
        r.zeta = zeta;
        r.h = (1.0 - s) / (1.0 + s);
        r.m = std::sqrt(std::max(0.0, 1.0 - r.h * r.h));
        r.a = (1.0 - r.m) / (1.0 + r.m);
        return r;
    }
    static RadialSlitMap for_capacity(Cx zeta, double dcap) {
        RadialSlitMap r;
        r.zeta = zeta;
        r.m = std::exp(-0.5 * dcap);
        r.h = std::sqrt(std::max(0.0, 1.0 - r.m * r.m));
        r.a = (1.0 - r.m) / (1.0 + r.m);
        return r;
    }

    double dcap() const { return -2.0 * std::log(m); }

    // forward removal map (D minus slit -> D)
    Cx apply(Cx z) const {
        const Cx u = disc_to_half(z / zeta);
        const Cx v = sqrt_upper(u * u + Cx(h * h, 0.0));
        const Cx p = half_to_disc(v);
        return zeta * (p - a) / (1.0 - a * p);
    }

    // inverse map (D -> D minus slit)
    Cx apply_inverse(Cx w) const {
        const Cx p = w / zeta;
        const Cx q = (p + a) / (1.0 + a * p);
        const Cx u = disc_to_half(q);
        const Cx v = sqrt_upper(u * u - Cx(h * h, 0.0));
        return zeta * half_to_disc(v);
    }
};

} // namespace detail

// Radial trace gamma(t_i) = f_{t_i}(zeta_i) via exact elementary maps for the
// piecewise-constant driver (robust at the singular tip).
inline Cx radial_trace_point(const Driver& d, std::size_t i) {
    Cx w = d.zeta[i];
    for (std::size_t j = i; j-- > 0;) {
        const auto m = detail::RadialSlitMap::for_capacity(d.zeta[j], d.dt);
        w = m.apply_inverse(w);
    }
    return w;
}

inline Trace radial_trace(const Driver& d, std::size_t stride = 1) {
    Trace tr;
    for (std::size_t i = 0; i < d.zeta.size(); i += stride) {
        tr.t.push_back(double(i) * d.dt);
        tr.pts.push_back(radial_trace_point(d, i));
    }
    return tr;
}

// ---------------------------------------------------------------------------
// Driving-term extraction and capacity (vertical-slit unzipping)
// ---------------------------------------------------------------------------

struct CurveCrossingError : std::runtime_error {
    std::size_t index;
    explicit CurveCrossingError(std::size_t i)
        : std::runtime_error("curve self-intersects at the sampled resolution"), index(i) {}
};

struct DriverSamples {
    std::vector<double> t;  // cumulative capacity
    std::vector<double> w;  // driver value after removing each segment
};

// Unzips a polyline in the closed upper half-plane by repeatedly removing the
// vertical slit through the first remaining point. Returns the (capacity,
// base-point) samples; capacity of the hull is t.back().
inline DriverSamples unzip_chordal(std::vector<Cx> pts) {
    if (pts.empty()) throw std::invalid_argument("unzip_chordal: empty polyline");
    DriverSamples out;
    out.t.push_back(0.0);
    out.w.push_back(pts.front().real());
    double cap = 0.0;
    for (std::size_t j = 1; j < pts.size(); ++j) {
        const Cx zj = pts[j];
        const double scale = 1.0 + std::abs(zj);
        if (zj.imag() < -1e-7 * scale) throw CurveCrossingError(j);
        const double c = zj.real();
        const double h = std::max(0.0, zj.imag());
        cap += h * h / 4.0;
        out.t.push_back(cap);
        out.w.push_back(c);
        if (h == 0.0) continue;
        for (std::size_t k = j + 1; k < pts.size(); ++k) {
            const Cx u = pts[k] - c;
            if (u.imag() < -1e-7 * (1.0 + std::abs(pts[k]))) throw CurveCrossingError(k);
            if (u.imag() <= 0.0) {
                const double root = std::sqrt(u.real() * u.real() + h * h);
                pts[k] = Cx(c + (u.real() >= 0.0 ? root : -root), 0.0);
            } else {
                pts[k] = c + detail::sqrt_upper(u * u + Cx(h * h, 0.0));
            }
        }
    }
    return out;
}

// Resamples a polyline to n points, uniformly in arclength.
inline std::vector<Cx> resample_polyline(const std::vector<Cx>& pts, std::size_t n) {
    std::vector<double> arc(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) arc[i] = arc[i - 1] + std::abs(pts[i] - pts[i - 1]);
    const double total = arc.back();
    std::vector<Cx> out;
    out.reserve(n + 1);
    std::size_t j = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double s = total * double(i) / double(n);
        while (j + 1 < pts.size() && arc[j + 1] < s) ++j;
        if (j + 1 >= pts.size()) {
            out.push_back(pts.back());
            continue;
        }
        const double seg = arc[j + 1] - arc[j];
        const double f = seg > 0.0 ? (s - arc[j]) / seg : 0.0;
        out.push_back(pts[j] + f * (pts[j + 1] - pts[j]));
    }
    return out;
}

// Half-plane capacity of the hull of a curve from the real line. The
// vertical-slit unzip converges at a fractional rate in the resolution, so
// the bias is removed by geometric (Aitken) extrapolation over three levels.
inline double capacity(const std::vector<Cx>& curve, std::size_t n = 4000) {
    for (const Cx& p : curve)
        if (p.imag() < -1e-9 * (1.0 + std::abs(p)))
            throw std::domain_error("capacity: curve leaves the closed half-plane");
    const double c1 = unzip_chordal(resample_polyline(curve, n / 4)).t.back();
    const double c2 = unzip_chordal(resample_polyline(curve, n / 2)).t.back();
    const double c3 = unzip_chordal(resample_polyline(curve, n)).t.back();
    const double d1 = c2 - c1, d2 = c3 - c2;
    if (std::fabs(d2) < 1e-15 * (1.0 + std::fabs(c3)) || d1 / d2 < 1.05) return c3;
    return c3 + d2 / (d1 / d2 - 1.0);
}

// Extracts the driving term of a curve (polyline from the real line) on a
// uniform capacity grid of spacing target_dt via vertical-slit unzipping.
inline Driver extract_driver(const std::vector<Cx>& curve, double target_dt) {
    if (target_dt <= 0.0) throw std::domain_error("extract_driver: dt must be positive");
    DriverSamples s = unzip_chordal(curve);
    const double total = s.t.back();
    const std::size_t n = std::size_t(std::floor(total / target_dt + 1e-9));
    Driver d;
    d.dt = target_dt;
    d.kind = DriverKind::chordal;
    d.w.reserve(n + 1);
    std::size_t j = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = double(i) * target_dt;
        while (j + 1 < s.t.size() && s.t[j + 1] < t) ++j;
        if (j + 1 >= s.t.size()) {
            d.w.push_back(s.w.back());
            continue;
        }
        const double seg = s.t[j + 1] - s.t[j];
        const double f = seg > 0.0 ? (t - s.t[j]) / seg : 1.0;
        d.w.push_back(s.w[j] + f * (s.w[j + 1] - s.w[j]));
    }
    return d;
}

// Radial analog: unzips a polyline in the closed unit disc that starts on the
// unit circle and heads toward 0, using exact radial slit maps. Returns
// samples of capacity time and the unwrapped driver phase.
inline DriverSamples unzip_radial(std::vector<Cx> pts) {
    if (pts.empty()) throw std::invalid_argument("unzip_radial: empty polyline");
    DriverSamples out;
    double cap = 0.0;
    double phase = std::arg(pts.front());
    out.t.push_back(0.0);
    out.w.push_back(phase);
    for (std::size_t j = 1; j < pts.size(); ++j) {
        const Cx zj = pts[j];
        const double r = std::abs(zj);
        if (r > 1.0 + 1e-7) throw CurveCrossingError(j);
        const double s = std::min(r, 1.0 - 1e-15);
        const double raw = std::arg(zj);
        // unwrap the driver phase
        double dphi = raw - std::fmod(phase, 2.0 * std::numbers::pi);
        while (dphi > std::numbers::pi) dphi -= 2.0 * std::numbers::pi;
        while (dphi < -std::numbers::pi) dphi += 2.0 * std::numbers::pi;
        phase += dphi;
        const auto m = detail::RadialSlitMap::for_depth(std::polar(1.0, raw), s);
        cap += m.dcap();
        out.t.push_back(cap);
        out.w.push_back(phase);
        for (std::size_t k = j + 1; k < pts.size(); ++k) {
            Cx img = m.apply(pts[k]);
            if (std::abs(img) > 1.0) img /= std::abs(img) * (1.0 + 1e-15);
            pts[k] = img;
        }
    }
    return out;
}

} // namespace slelab
