#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "slelab/sle.hpp"

using namespace slelab;
using Catch::Approx;

namespace {

// tanh-sinh quadrature on (0,1), robust to endpoint singularities
template <class F>
double tanh_sinh_01(const F& f) {
    const double h = 1.0 / 40.0;
    double sum = 0.0;
    for (int k = -2400; k <= 2400; ++k) {
        const double t = k * h;
        const double u = std::numbers::pi / 2.0 * std::sinh(t);
        const double x = 0.5 * (1.0 + std::tanh(u));
        const double w = std::numbers::pi / 2.0 * std::cosh(t) / (2.0 * std::cosh(u) * std::cosh(u));
        if (x <= 0.0 || x >= 1.0 || w < 1e-320) continue;
        sum += h * w * f(x);
    }
    return sum;
}

// independent oracle: Euler integral for 2F1(a,b;c;x), c > b > 0
double hyper_2f1_euler(double a, double b, double c, double x) {
    const double pref = std::exp(log_gamma(c) - log_gamma(b) - log_gamma(c - b));
    return pref * tanh_sinh_01([&](double t) {
               return std::pow(t, b - 1.0) * std::pow(1.0 - t, c - b - 1.0) * std::pow(1.0 - x * t, -a);
           });
}

double cardy_oracle(double kappa, double s) {
    const double a = 1.0 - 4.0 / kappa, b = 2.0 - 8.0 / kappa, c = 2.0 - 4.0 / kappa;
    const double pref = std::pow(4.0, (kappa - 4.0) / kappa) * std::sqrt(std::numbers::pi) /
                        (std::exp(log_gamma(2.0 - 4.0 / kappa) + log_gamma(4.0 / kappa - 0.5)));
    return pref * hyper_2f1_euler(a, b, c, 1.0 / s) * std::pow(s, (4.0 - kappa) / kappa);
}

double jarque_bera(const std::vector<double>& xs) {
    const double n = double(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2) - 3.0;
    return n / 6.0 * (skew * skew + kurt * kurt / 4.0);
}

} // namespace

TEST_CASE("log_gamma pins classical values", "[sle]") {
    REQUIRE(gamma_fn(0.5) == Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    REQUIRE(gamma_fn(1.0) == Approx(1.0).epsilon(1e-12));
    REQUIRE(gamma_fn(5.0) == Approx(24.0).epsilon(1e-12));
    REQUIRE(gamma_fn(1.0 / 3.0) == Approx(2.6789385347077476).epsilon(1e-12));
}

TEST_CASE("cardy: normalization, golden value, tail", "[sle]") {
    // the Gamma prefactor identity 4^{1/3} sqrt(pi) Gamma(1/3) = Gamma(1/6) Gamma(2/3)
    const double lhs = std::pow(4.0, 1.0 / 3.0) * std::sqrt(std::numbers::pi) * gamma_fn(1.0 / 3.0);
    const double rhs = gamma_fn(1.0 / 6.0) * gamma_fn(2.0 / 3.0);
    REQUIRE(lhs == Approx(rhs).epsilon(1e-10));
    REQUIRE(cardy(6.0, 1.0) == Approx(1.0).margin(1e-10));

    // golden value from the independent Euler-integral oracle
    const double oracle = cardy_oracle(6.0, 2.0);
    REQUIRE(cardy(6.0, 2.0) == Approx(oracle).epsilon(1e-8));
    REQUIRE(cardy(5.0, 3.0) == Approx(cardy_oracle(5.0, 3.0)).epsilon(1e-8));

    // continuous, strictly decreasing, correct tail exponent
    double prev = 1.0 + 1e-12;
    for (double s : {1.0, 1.2, 1.7, 2.5, 4.0, 8.0, 20.0, 100.0}) {
        const double v = cardy(6.0, s);
        REQUIRE(v < prev);
        REQUIRE(v >= 0.0);
        prev = v;
    }
    const double r = cardy(6.0, 400.0) / cardy(6.0, 100.0);
    REQUIRE(std::log(r) / std::log(4.0) == Approx((4.0 - 6.0) / 6.0).margin(0.02));

    REQUIRE_THROWS_AS(cardy(4.0, 2.0), std::domain_error);
    REQUIRE_THROWS_AS(cardy(8.5, 2.0), std::domain_error);
    REQUIRE_THROWS_AS(cardy(6.0, 0.5), std::domain_error);
}

TEST_CASE("driver sampling: zero kappa, determinism, variance, normality", "[sle]") {
    SleParams p0{0.0, 1.0, 1e-3, 1, 99};
    Driver z = sample_driver(p0);
    for (double w : z.w) REQUIRE(w == 0.0);

    SleParams p{6.0, 1.0, 1e-3, 1, 2024};
    Driver a = sample_driver(p, 5);
    Driver b = sample_driver(p, 5);
    REQUIRE(a.w == b.w); // bitwise reproducible
    Driver c = sample_driver(p, 6);
    REQUIRE(a.w != c.w);

    // empirical Var(W_T)/T over replicas
    const int N = 2000;
    SleParams pv{6.0, 0.25, 1e-3, N, 31337};
    double var = 0.0;
    for (int rep = 0; rep < N; ++rep) {
        const Driver d = sample_driver(pv, std::uint64_t(rep));
        var += d.w.back() * d.w.back();
    }
    var /= double(N) * pv.horizon;
    REQUIRE(var > 5.6);
    REQUIRE(var < 6.4);

    // increments pass Jarque-Bera at the 1% level (chi^2_2 cutoff 9.21)
    std::vector<double> inc;
    const Driver d = sample_driver(p, 0);
    for (std::size_t i = 1; i < d.w.size(); ++i) inc.push_back(d.w[i] - d.w[i - 1]);
    REQUIRE(jarque_bera(inc) < 9.21);
}

TEST_CASE("hit sampling: phases and rough law agreement", "[sle]") {
    REQUIRE_THROWS_AS(sample_hit(2.0, 1), std::domain_error);
    auto h8 = sample_hit(8.0, 1);
    REQUIRE(h8.x == 1.0);
    REQUIRE_FALSE(h8.censored);

    // quick Kolmogorov-Smirnov sanity at modest N; the tight test is in the
    // acceptance suite
    const int N = 300;
    std::vector<double> xs;
    int censored = 0;
    for (int i = 0; i < N; ++i) {
        auto h = sample_hit(6.0, 1000 + std::uint64_t(i), 100.0, 1.02, 0.1, 1e6);
        if (h.censored)
            ++censored;
        else
            xs.push_back(h.x);
    }
    REQUIRE(censored < N / 5);
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 50.0) break; // resolved window
        const double F = 1.0 - cardy(6.0, xs[i]);
        ks = std::max(ks, std::fabs(F - double(i) / double(N)));
        ks = std::max(ks, std::fabs(F - double(i + 1) / double(N)));
    }
    REQUIRE(ks < 0.12);
}

TEST_CASE("bessel phase marker at the probe x=1", "[sle]") {
    int swallowed2 = 0, swallowed6 = 0;
    for (int i = 0; i < 100; ++i) {
        if (probe_one_swallowed(2.0, 1.0, 1e-4, 500 + std::uint64_t(i))) ++swallowed2;
        if (probe_one_swallowed(6.0, 1.0, 1e-4, 500 + std::uint64_t(i))) ++swallowed6;
    }
    REQUIRE(swallowed2 == 0);
    REQUIRE(swallowed6 > 10);
}

TEST_CASE("slit tracker matches the closed-form slit map at t=0", "[sle]") {
    const double x = 1.3, L = 0.7;
    SlitTracker slit(x, L, 24);
    const auto e = slit.evaluate(0.0);
    const double r = std::hypot(x, L);
    REQUIRE(e.value == Approx(x - r).epsilon(1e-12));
    REQUIRE(e.d1 == Approx(x / r).epsilon(1e-12));
    REQUIRE(e.d2 == Approx(L * L / (r * r * r)).epsilon(1e-12));
}

TEST_CASE("locality: drift vanishes only at kappa 6", "[sle]") {
    SleParams p6{6.0, 0.2, 2e-4, 400, 777};
    auto d6 = locality_drift(p6, 1.0, 1.0);
    REQUIRE(d6.kept > 300);
    REQUIRE(std::fabs(d6.drift) <= 2.0 * d6.ci_half); // CI (doubled for the unit run) contains 0

    SleParams p2{2.0, 0.2, 2e-4, 400, 777};
    auto d2 = locality_drift(p2, 1.0, 1.0);
    REQUIRE(std::fabs(d2.drift) > d2.ci_half); // CI excludes 0
    REQUIRE(d2.drift < 0.0);                   // slit repels the image driver

    // moving the slit away shrinks the drift magnitude
    double prev = std::fabs(d2.drift);
    for (double xs : {2.0, 4.0}) {
        SleParams pp{2.0, 0.2, 2e-4, 200, 777};
        auto dd = locality_drift(pp, xs, 1.0);
        REQUIRE(std::fabs(dd.drift) < prev);
        prev = std::fabs(dd.drift);
    }
}

TEST_CASE("restriction probability at kappa 8/3 (smoke run)", "[sle]") {
    auto est = restriction_probability(1.0, 1.0, 600, 4242);
    REQUIRE(est.closed_form == Approx(std::pow(2.0, -5.0 / 16.0)).epsilon(1e-12));
    REQUIRE(est.censored < 30);
    REQUIRE(est.p_hat == Approx(est.closed_form).margin(0.06));
    // ensemble martingale: each checkpoint mean within its CI of the target
    for (std::size_t c = 0; c < est.checkpoint_mean.size(); ++c)
        REQUIRE(std::fabs(est.checkpoint_mean[c] - est.closed_form) <
                est.checkpoint_ci[c] + 0.03);
    // shrinking obstacle: probability goes to 1
    auto tiny = restriction_probability(1.0, 0.05, 300, 4242);
    REQUIRE(tiny.p_hat > 0.95);
}

TEST_CASE("winding variance grows like kappa log(1/eps) (smoke run)", "[sle]") {
    auto fit = winding_variance(2.0, {0.3, 0.15, 0.08}, 80, 5e-3, 1234);
    REQUIRE(fit.variance[0] < fit.variance[1]);
    REQUIRE(fit.variance[1] < fit.variance[2]);
    REQUIRE(fit.slope > 0.7);
    REQUIRE(fit.slope < 3.6);
}

TEST_CASE("closed-form exponent table", "[sle]") {
    REQUIRE(exponent_zeta(1, 1.0) == Approx(5.0 / 8.0).epsilon(1e-14));
    REQUIRE(exponent_zeta_tilde(1, 1.0) == Approx(5.0 / 3.0).epsilon(1e-14));
    REQUIRE(exponent_eta(1.0) == Approx(0.25).epsilon(1e-14));
    REQUIRE(exponent_eta(2.0) == Approx(2.0 / 3.0).epsilon(1e-14));
    REQUIRE(exponent_zeta_tilde_n(1) == Approx(0.5).epsilon(1e-14));
    REQUIRE(exponent_zeta_n(1) == Approx(1.0 / 16.0).epsilon(1e-14));
    // the two displayed formulas disagree by a factor 2 at the overlap; both
    // are evaluated verbatim
    REQUIRE(exponent_zeta(1, 0.0) == Approx(1.0 / 8.0).epsilon(1e-14));
    REQUIRE_THROWS_AS(exponent_closed_forms(0, 1.0, 1), std::domain_error);
}

TEST_CASE("phase diagnostics separate kappa 2 from kappa 6", "[sle]") {
    SleParams p2{2.0, 0.5, 2.5e-4, 1, 11};
    Trace t2 = chordal_trace(sample_driver(p2), 2);
    auto r2 = phase_diagnostics(t2);
    REQUIRE(r2.simple_at_resolution);
    REQUIRE_FALSE(r2.hits_positive_reals);

    SleParams p6{6.0, 0.5, 2.5e-4, 1, 11};
    Trace t6 = chordal_trace(sample_driver(p6), 2);
    auto r6 = phase_diagnostics(t6);
    REQUIRE(r6.hits_positive_reals);
    REQUIRE(r6.fill_fraction > r2.fill_fraction);
    REQUIRE(r6.max_radius > 0.0);
}
