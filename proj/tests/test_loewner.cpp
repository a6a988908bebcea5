#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "slelab/loewner.hpp"
#include "slelab/rng.hpp"

using namespace slelab;
using Catch::Approx;

namespace {

Driver sine_driver(double dt, std::size_t n) {
    Driver d;
    d.dt = dt;
    d.kind = DriverKind::chordal;
    d.w.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) d.w[i] = std::sin(3.0 * double(i) * dt);
    return d;
}

std::vector<Cx> half_disc_curve(double r, std::size_t n) {
    std::vector<Cx> pts;
    pts.push_back(Cx(0.0, 0.0));
    pts.push_back(Cx(r, 0.0));
    for (std::size_t i = 1; i <= n; ++i) {
        const double th = std::numbers::pi * double(i) / double(n);
        pts.push_back(std::polar(r, th));
    }
    return pts;
}

} // namespace

TEST_CASE("chordal constant-driver closed forms", "[loewner]") {
    const Driver d = Driver::chordal_constant(0.0, 1e-3, 1000);

    auto r1 = chordal_forward(d, Cx(0.0, 3.0), 1.0);
    REQUIRE_FALSE(r1.swallowed);
    REQUIRE(std::abs(r1.value - Cx(0.0, std::sqrt(5.0))) < 1e-8);

    auto r2 = chordal_forward(d, Cx(2.0, 0.0), 1.0);
    REQUIRE_FALSE(r2.swallowed);
    REQUIRE(std::abs(r2.value - Cx(2.0 * std::sqrt(2.0), 0.0)) < 1e-8);

    // point on the slit line is swallowed at tau = y^2/4
    const double y = 1.2;
    auto r3 = chordal_forward(d, Cx(0.0, y), 1.0);
    REQUIRE(r3.swallowed);
    REQUIRE(r3.tau == Approx(y * y / 4.0).margin(2e-3));

    auto tau = chordal_swallow_time(d, Cx(0.0, 0.5));
    REQUIRE(tau.has_value());
    REQUIRE(*tau == Approx(0.0625).margin(1e-3));
}

TEST_CASE("chordal trace of constant drivers is the vertical slit", "[loewner]") {
    const Driver d0 = Driver::chordal_constant(0.0, 1e-3, 400);
    const Trace t0 = chordal_trace(d0, 50);
    for (std::size_t i = 0; i < t0.t.size(); ++i) {
        REQUIRE(std::abs(t0.pts[i] - Cx(0.0, 2.0 * std::sqrt(t0.t[i]))) < 1e-10);
    }

    const Driver dc = Driver::chordal_constant(1.7, 1e-3, 400);
    const Trace tc = chordal_trace(dc, 50);
    for (std::size_t i = 0; i < tc.t.size(); ++i) {
        REQUIRE(std::abs(tc.pts[i] - Cx(1.7, 2.0 * std::sqrt(tc.t[i]))) < 1e-10);
    }
    REQUIRE(std::abs(tc.pts.front() - Cx(1.7, 0.0)) < 1e-12);
}

TEST_CASE("trace self-convergence under dt refinement", "[loewner]") {
    // reference at 8x finer resolution; sup-distance at matched times must
    // decrease monotonically over three refinement levels
    const double T = 1.0;
    const std::size_t n_ref = 4096;
    const Driver ref = sine_driver(T / double(n_ref), n_ref);
    const Trace ref_tr = chordal_trace(ref, 64);

    double prev = 1e100;
    for (std::size_t n : {512u, 1024u, 2048u}) {
        const Driver d = sine_driver(T / double(n), n);
        const Trace tr = chordal_trace(d, n / 64);
        double sup = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            sup = std::max(sup, std::abs(tr.pts[i] - ref_tr.pts[i]));
        REQUIRE(sup < prev);
        prev = sup;
    }
}

TEST_CASE("forward-backward identity on a grid", "[loewner]") {
    const double T = 0.7;
    const std::size_t n = 700;
    const Driver d = sine_driver(T / double(n), n);
    for (double re : {-1.5, -0.4, 0.3, 1.1}) {
        for (double im : {0.4, 1.0, 2.5}) {
            // f_T(w) by inverse elementary maps, then g_T back
            Cx w(re, im);
            Cx z = w;
            for (std::size_t j = n; j-- > 0;) z = detail::chordal_step_inverse(z, d.w[j], d.dt);
            auto fwd = chordal_forward(d, z, T);
            REQUIRE_FALSE(fwd.swallowed);
            REQUIRE(std::abs(fwd.value - w) < 1e-7);
        }
    }
}

TEST_CASE("brownian scaling covariance of the chordal solver", "[loewner]") {
    const double lambda = 2.5;
    const std::size_t n = 300;
    const double dt = 1e-3;
    Driver d = sine_driver(dt, n);
    // W'_s = lambda * W_{s/lambda^2} on the refined grid
    Driver ds;
    ds.dt = dt * lambda * lambda;
    ds.kind = DriverKind::chordal;
    for (double v : d.w) ds.w.push_back(lambda * v);
    const Trace a = chordal_trace(d, 30);
    const Trace b = chordal_trace(ds, 30);
    for (std::size_t i = 0; i < a.pts.size(); ++i)
        REQUIRE(std::abs(b.pts[i] - lambda * a.pts[i]) < 1e-7);
}

TEST_CASE("swallow time is monotone under driver truncation", "[loewner]") {
    Driver d = sine_driver(1e-3, 2000);
    // a trace point is swallowed at its capacity time
    const std::size_t hit = 800;
    const Cx z = chordal_trace_point(d, hit);
    auto tau_full = chordal_swallow_time(d, z);
    REQUIRE(tau_full.has_value());
    REQUIRE(*tau_full == Approx(double(hit) * d.dt).margin(0.05));

    // truncating before the swallow time removes the event; truncating after
    // keeps it unchanged
    Driver quarter = d;
    quarter.w.resize(400);
    auto tau_quarter = chordal_swallow_time(quarter, z);
    if (tau_quarter.has_value()) REQUIRE(*tau_quarter >= *tau_full - 1e-12);

    Driver longer = d;
    longer.w.resize(1500);
    auto tau_longer = chordal_swallow_time(longer, z);
    REQUIRE(tau_longer.has_value());
    REQUIRE(*tau_longer == Approx(*tau_full).margin(1e-12));
}

TEST_CASE("capacity: vertical slit, scaling covariance, half-disc", "[loewner]") {
    const double L = 1.3;
    std::vector<Cx> slit{Cx(0.0, 0.0), Cx(0.0, L)};
    REQUIRE(capacity(slit) == Approx(L * L / 4.0).epsilon(1e-10));

    const double r = 0.8;
    auto hd = half_disc_curve(r, 3000);
    const double cap = capacity(hd, 4000);
    REQUIRE(cap == Approx(r * r / 2.0).epsilon(1e-6));

    const double lam = 3.0;
    std::vector<Cx> scaled;
    for (Cx p : hd) scaled.push_back(lam * p);
    REQUIRE(capacity(scaled, 4000) == Approx(lam * lam * cap).epsilon(1e-8));
}

TEST_CASE("extract_driver: vertical segments and translation", "[loewner]") {
    const double L = 2.0;
    std::vector<Cx> seg;
    for (int i = 0; i <= 100; ++i) seg.push_back(Cx(0.0, L * i / 100.0));
    Driver d = extract_driver(seg, 1e-2);
    REQUIRE(d.horizon() == Approx(L * L / 4.0).margin(1e-2));
    for (double w : d.w) REQUIRE(std::fabs(w) < 1e-12);

    std::vector<Cx> seg_c;
    for (int i = 0; i <= 100; ++i) seg_c.push_back(Cx(0.7, L * i / 100.0));
    Driver dc = extract_driver(seg_c, 1e-2);
    for (double w : dc.w) REQUIRE(w == Approx(0.7).margin(1e-12));
}

TEST_CASE("extract(trace(W)) roundtrip error shrinks with dt", "[loewner]") {
    const double T = 0.5;
    double prev = 1e100;
    for (std::size_t n : {250u, 500u, 1000u}) {
        const Driver d = sine_driver(T / double(n), n);
        const Trace tr = chordal_trace(d);
        Driver back = extract_driver(tr.pts, d.dt);
        double sup = 0.0;
        const std::size_t m = std::min(back.w.size(), d.w.size());
        for (std::size_t i = 0; i + 1 < m; ++i) sup = std::max(sup, std::fabs(back.w[i] - d.w[i]));
        REQUIRE(sup < prev);
        prev = sup;
    }
    REQUIRE(prev < 0.05);
}

TEST_CASE("self-intersecting curve is rejected with its index", "[loewner]") {
    // heads up, then dives below the real axis
    std::vector<Cx> bad{Cx(0.0, 0.0), Cx(0.0, 1.0), Cx(0.3, 0.5), Cx(0.3, -0.4)};
    bool threw = false;
    try {
        unzip_chordal(bad);
    } catch (const CurveCrossingError& e) {
        threw = true;
        REQUIRE(e.index == 3);
    }
    REQUIRE(threw);
}

TEST_CASE("radial solver keeps g'(0) = e^t", "[loewner]") {
    std::vector<double> phases;
    const double dt = 1e-3;
    const std::size_t n = 500;
    for (std::size_t i = 0; i <= n; ++i) phases.push_back(0.4 * std::sin(5.0 * i * dt));
    const Driver d = Driver::radial_from_phases(phases, dt);
    const double t = 0.5;
    const double h = 1e-6;
    // centered finite-difference derivative at 0 along two directions
    auto gp = radial_forward(d, Cx(h, 0.0), t);
    auto gm = radial_forward(d, Cx(-h, 0.0), t);
    REQUIRE_FALSE(gp.swallowed);
    const Cx deriv = (gp.value - gm.value) / (2.0 * h);
    REQUIRE(std::abs(deriv - std::exp(t)) / std::exp(t) < 1e-6);
}

TEST_CASE("radial flow: reality and rotation equivariance", "[loewner]") {
    std::vector<double> zero(301, 0.0);
    const Driver d = Driver::radial_from_phases(zero, 1e-3);
    // zeta == 1: negative real points stay real
    auto r = radial_forward(d, Cx(-0.5, 0.0), 0.3);
    REQUIRE_FALSE(r.swallowed);
    REQUIRE(std::fabs(r.value.imag()) < 1e-12);

    const double alpha = 0.9;
    std::vector<double> rot(301, alpha);
    const Driver drot = Driver::radial_from_phases(rot, 1e-3);
    const Cx z(0.2, 0.35);
    auto a = radial_forward(d, z, 0.3);
    auto b = radial_forward(drot, z * std::polar(1.0, alpha), 0.3);
    REQUIRE(std::abs(b.value - a.value * std::polar(1.0, alpha)) < 1e-9);
}

TEST_CASE("radial elementary slit map matches the RK4 flow", "[loewner]") {
    // constant driver at angle beta: composition of exact slit maps vs RK4
    const double beta = 0.7;
    const double T = 0.2;
    const std::size_t n = 200;
    std::vector<double> phases(n + 1, beta);
    const Driver d = Driver::radial_from_phases(phases, T / double(n));

    const Cx z(-0.3, 0.25);
    Cx g_exact = z;
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = detail::RadialSlitMap::for_capacity(std::polar(1.0, beta), T / double(n));
        g_exact = m.apply(g_exact);
    }
    auto g_rk = radial_forward(d, z, T);
    REQUIRE_FALSE(g_rk.swallowed);
    REQUIRE(std::abs(g_rk.value - g_exact) < 1e-6);

    // inverse undoes the removal map
    const auto m = detail::RadialSlitMap::for_capacity(std::polar(1.0, beta), 0.05);
    const Cx w(0.4, -0.2);
    REQUIRE(std::abs(m.apply(m.apply_inverse(w)) - w) < 1e-12);
    REQUIRE(std::abs(m.apply(Cx(0.0, 0.0))) < 1e-15);
}

TEST_CASE("radial trace of a constant driver is the radial segment", "[loewner]") {
    const std::size_t n = 300;
    const double dt = 1e-3;
    std::vector<double> phases(n + 1, 0.0);
    const Driver d = Driver::radial_from_phases(phases, dt);
    const Trace tr = radial_trace(d, 50);
    for (std::size_t i = 1; i < tr.pts.size(); ++i) {
        REQUIRE(std::fabs(tr.pts[i].imag()) < 1e-9);
        // tip depth s solves (1+s)^2/(4s) = e^t (conformal radius of D minus [s,1])
        const double t = tr.t[i];
        const double s = tr.pts[i].real();
        REQUIRE(s > 0.0);
        REQUIRE(s < 1.0);
        REQUIRE((1.0 + s) * (1.0 + s) / (4.0 * s) == Approx(std::exp(t)).epsilon(1e-6));
    }
}

TEST_CASE("radial unzip recovers driver of a radial segment", "[loewner]") {
    const double beta = -1.1;
    std::vector<Cx> seg;
    for (int i = 0; i <= 200; ++i) {
        const double s = 1.0 - 0.6 * double(i) / 200.0;
        seg.push_back(std::polar(s, beta));
    }
    DriverSamples ds = unzip_radial(seg);
    for (double w : ds.w) REQUIRE(w == Approx(beta).margin(1e-9));
    const double s_end = 0.4;
    REQUIRE(ds.t.back() == Approx(std::log((1.0 + s_end) * (1.0 + s_end) / (4.0 * s_end))).epsilon(1e-9));
}

TEST_CASE("radial roundtrip: unzip of the radial trace recovers phases", "[loewner]") {
    const std::size_t n = 400;
    const double dt = 5e-4;
    std::vector<double> phases(n + 1);
    for (std::size_t i = 0; i <= n; ++i) phases[i] = 0.8 * std::sin(7.0 * double(i) * dt);
    const Driver d = Driver::radial_from_phases(phases, dt);
    const Trace tr = radial_trace(d);
    DriverSamples back = unzip_radial(tr.pts);
    // compare phases at matched capacities
    double sup = 0.0;
    for (std::size_t i = 0; i < back.t.size(); ++i) {
        const double t = back.t[i];
        const std::size_t j = std::min<std::size_t>(std::size_t(std::round(t / dt)), n);
        sup = std::max(sup, std::fabs(back.w[i] - phases[j]));
    }
    REQUIRE(sup < 0.05);
}
