// SLE sampling and the desk-scale checks built on it: Cardy's formula, the
// locality drift, restriction probabilities and their martingale, winding
// variance of the radial trace, closed-form exponent tables, and phase
// diagnostics of sampled traces.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "slelab/loewner.hpp"
#include "slelab/rng.hpp"

namespace slelab {

struct SleParams {
    double kappa = 6.0;
    double horizon = 1.0;
    double dt = 1e-4;
    int replicas = 1;
    std::uint64_t seed = 1;
};

// Chordal driver W_t = sqrt(kappa) B_t on a uniform grid, one Brownian path
// per (seed, replica) stream.
inline Driver sample_driver(const SleParams& p, std::uint64_t replica = 0) {
    if (p.kappa < 0.0) throw std::domain_error("sample_driver: kappa must be nonnegative");
    if (p.dt <= 0.0) throw std::domain_error("sample_driver: dt must be positive");
    Rng rng = replica_rng(p.seed, replica);
    const std::size_t n = std::size_t(std::llround(p.horizon / p.dt));
    Driver d;
    d.dt = p.dt;
    d.kind = DriverKind::chordal;
    d.w.resize(n + 1);
    d.w[0] = 0.0;
    const double sigma = std::sqrt(p.kappa * p.dt);
    for (std::size_t i = 1; i <= n; ++i) d.w[i] = d.w[i - 1] + sigma * rng.normal();
    return d;
}

inline std::vector<double> sample_radial_phases(const SleParams& p, std::uint64_t replica = 0) {
    Rng rng = replica_rng(p.seed, replica);
    const std::size_t n = std::size_t(std::llround(p.horizon / p.dt));
    std::vector<double> theta(n + 1, 0.0);
    const double sigma = std::sqrt(p.kappa * p.dt);
    for (std::size_t i = 1; i <= n; ++i) theta[i] = theta[i - 1] + sigma * rng.normal();
    return theta;
}

// ---------------------------------------------------------------------------
// Gamma, 2F1, Cardy's formula
// ---------------------------------------------------------------------------

// Lanczos approximation (g=7, n=9), |error| ~ 1e-13 on the positive axis.
inline double log_gamma(double x) {
    static const double coef[9] = {0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
                                   771.32342877765313,   -176.61502916214059, 12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5)
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    x -= 1.0;
    double a = coef[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coef[i] / (x + double(i));
    return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(a);
}

inline double gamma_fn(double x) { return std::exp(log_gamma(x)); }

// Gauss hypergeometric series for 0 <= x < 1 (terms k^{a+b-c-1} x^k).
inline double hyper_2f1(double a, double b, double c, double x) {
    if (x < 0.0 || x >= 1.0) throw std::domain_error("hyper_2f1: series needs 0 <= x < 1");
    double term = 1.0, sum = 1.0;
    const std::size_t kmax = std::size_t(std::min(2e6, std::max(2000.0, 200.0 / (1.0 - x))));
    for (std::size_t k = 0; k < kmax; ++k) {
        const double kk = double(k);
        term *= (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * x;
        sum += term;
        if (std::fabs(term) < 1e-16 * std::fabs(sum)) return sum;
    }
    throw std::runtime_error("hyper_2f1: series did not converge");
}

// Gauss value 2F1(a,b;c;1) = Gamma(c)Gamma(c-a-b)/(Gamma(c-a)Gamma(c-b)).
inline double hyper_2f1_at_one(double a, double b, double c) {
    return std::exp(log_gamma(c) + log_gamma(c - a - b) - log_gamma(c - a) - log_gamma(c - b));
}

// P[X >= s] for the first hit X of [1,infinity) by the chordal trace,
// 4 < kappa < 8.
inline double cardy(double kappa, double s) {
    if (!(kappa > 4.0 && kappa < 8.0)) throw std::domain_error("cardy: kappa must lie in (4,8)");
    if (!(s >= 1.0)) throw std::domain_error("cardy: s must be >= 1");
    const double a = 1.0 - 4.0 / kappa;
    const double b = 2.0 - 8.0 / kappa;
    const double c = 2.0 - 4.0 / kappa;
    const double pref = std::pow(4.0, (kappa - 4.0) / kappa) * std::sqrt(std::numbers::pi) /
                        (gamma_fn(2.0 - 4.0 / kappa) * gamma_fn(4.0 / kappa - 0.5));
    const double f = (s == 1.0) ? hyper_2f1_at_one(a, b, c) : hyper_2f1(a, b, c, 1.0 / s);
    const double val = pref * f * std::pow(s, (4.0 - kappa) / kappa);
    return std::clamp(val, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// First hit of [1,infinity): probe-point sampling
// ---------------------------------------------------------------------------

struct HitSample {
    double x = 1.0;
    bool censored = false;
};

// Evolves probe points of a geometric grid on [1, s_max] through the chordal
// flow (X_i = g_t(x_i) - W_t) with capacity steps tied to the nearest live
// probe; X is read off as the rightmost probe swallowed at the first swallow
// of the probe at 1 (the interval [1,X] collapses at once).
inline HitSample sample_hit(double kappa, std::uint64_t seed, double s_max = 300.0,
                            double grid_ratio = 1.015, double alpha = 0.08, double t_max = 1e7) {
    if (kappa >= 8.0) return HitSample{1.0, false}; // a.s. X = 1
    if (!(kappa > 4.0)) throw std::domain_error("sample_hit: trace avoids (0,inf) for kappa <= 4");
    std::vector<double> probes{1.0};
    while (probes.back() < s_max) probes.push_back(probes.back() * grid_ratio);
    std::vector<double> X = probes;
    std::vector<bool> dead(probes.size(), false);

    Rng rng(seed);
    double t = 0.0;
    bool first_dead = false;
    int extra = 0;
    double dt_frozen = 0.0;
    while (t < t_max) {
        double xmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < X.size(); ++i)
            if (!dead[i]) xmin = std::min(xmin, X[i]);
        if (!std::isfinite(xmin)) break;
        double dt = first_dead ? dt_frozen
                               : std::clamp(alpha * alpha * xmin * xmin / kappa, 1e-12, 5e3);
        const double dw = std::sqrt(kappa * dt) * rng.normal();
        for (std::size_t i = 0; i < X.size(); ++i) {
            if (dead[i]) continue;
            const double lifted = std::sqrt(X[i] * X[i] + 4.0 * dt);
            X[i] = lifted - dw;
            if (X[i] <= 1e-9) dead[i] = true;
        }
        t += dt;
        if (!first_dead && dead[0]) {
            first_dead = true;
            dt_frozen = dt;
        }
        if (first_dead && ++extra >= 50) break;
    }
    if (!first_dead) return HitSample{s_max, true};
    double xhat = 1.0;
    for (std::size_t i = 0; i < probes.size(); ++i)
        if (dead[i]) xhat = std::max(xhat, probes[i]);
    return HitSample{xhat, false};
}

// Bessel phase probe: whether g_t(1) - W_t reaches the swallow threshold
// before the horizon.
inline bool probe_one_swallowed(double kappa, double horizon, double dt, std::uint64_t seed) {
    Rng rng(seed);
    double X = 1.0;
    const double sigma = std::sqrt(kappa * dt);
    for (double t = 0.0; t < horizon; t += dt) {
        X = std::sqrt(X * X + 4.0 * dt) - sigma * rng.normal();
        if (X <= 1e-9) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Slit tracking: images of a boundary slit under the flow, and the
// hydrodynamically normalized removal map of the image arc
// ---------------------------------------------------------------------------

class SlitTracker {
public:
    SlitTracker(double x, double L, int segments = 32) {
        if (!(x > 0.0 && L > 0.0)) throw std::domain_error("SlitTracker: need x > 0, L > 0");
        for (int j = 0; j <= segments; ++j) pts_.push_back(Cx(x, L * double(j) / double(segments)));
    }

    // one chordal step with driver value c over duration dt
    void advance(double c, double dt) {
        for (auto& p : pts_) p = detail::chordal_step(p, c, dt);
    }

    double gap(double w) const {
        double g = std::numeric_limits<double>::infinity();
        for (const auto& p : pts_) g = std::min(g, std::abs(p - w));
        return g;
    }

    struct Eval {
        double value, d1, d2;
    };

    // h(z), h'(z), h''(z) for the normalized map removing the image arc,
    // evaluated at a real point z away from the arc. The arc is unzipped by
    // vertical slits; derivatives ride along by the chain rule.
    Eval evaluate(double z) const {
        std::vector<Cx> arc = pts_;
        double v = z, d1 = 1.0, d2 = 0.0;
        for (std::size_t j = 1; j < arc.size(); ++j) {
            const double c = arc[j].real();
            const double h = std::max(0.0, arc[j].imag());
            if (h > 0.0) {
                const double u = v - c;
                const double root = std::sqrt(u * u + h * h);
                const double s = u >= 0.0 ? 1.0 : -1.0;
                const double m1 = std::fabs(u) / root;                 // |m'|
                const double m2 = s * h * h / (root * root * root);    // m''
                v = c + s * root;
                d2 = m2 * d1 * d1 + m1 * d2;
                d1 = m1 * d1;
                for (std::size_t k = j + 1; k < arc.size(); ++k) {
                    const Cx w = arc[k] - c;
                    if (w.imag() <= 0.0) {
                        const double r = std::sqrt(w.real() * w.real() + h * h);
                        arc[k] = Cx(c + (w.real() >= 0.0 ? r : -r), 0.0);
                    } else {
                        arc[k] = c + detail::sqrt_upper(w * w + Cx(h * h, 0.0));
                    }
                }
            }
        }
        return Eval{v, d1, d2};
    }

    const std::vector<Cx>& points() const { return pts_; }

private:
    std::vector<Cx> pts_;
};

// ---------------------------------------------------------------------------
// Locality drift
// ---------------------------------------------------------------------------

struct DriftEstimate {
    double drift = 0.0;      // mean increment of h_t(W_t) per unit time
    double ci_half = 0.0;    // 95% confidence half-width
    double mean_time = 0.0;
    int kept = 0;
    int stopped_early = 0;   // stopped at the safety barrier before the horizon
    int discarded = 0;       // hulls that actually reached the slit
};

// Mean drift of the image driver h_t(W_t) for a slit at (x, x+iL). Replicas
// are stopped at the horizon or when the hull comes within `barrier` of the
// slit image, whichever is first (a genuine stopping time, so the martingale
// comparison is unbiased).
inline DriftEstimate locality_drift(const SleParams& p, double slit_x, double slit_L,
                                    double barrier_fraction = 0.25, int segments = 32) {
    DriftEstimate out;
    std::vector<double> increments, times;
    const std::size_t steps = std::size_t(std::llround(p.horizon / p.dt));
    const double barrier = barrier_fraction * slit_x;
    for (int rep = 0; rep < p.replicas; ++rep) {
        Rng rng = replica_rng(p.seed, std::uint64_t(rep));
        SlitTracker slit(slit_x, slit_L, segments);
        const double w0tilde = slit.evaluate(0.0).value;
        double w = 0.0;
        double t = 0.0;
        const double sigma = std::sqrt(p.kappa * p.dt);
        bool hit = false, early = false;
        for (std::size_t i = 0; i < steps; ++i) {
            if (slit.gap(w) < barrier) {
                early = true;
                break;
            }
            slit.advance(w, p.dt);
            w += sigma * rng.normal();
            t += p.dt;
            if (slit.gap(w) < 1e-7) {
                hit = true;
                break;
            }
        }
        if (hit) {
            ++out.discarded;
            continue;
        }
        if (early) ++out.stopped_early;
        increments.push_back(slit.evaluate(w).value - w0tilde);
        times.push_back(t);
    }
    out.kept = int(increments.size());
    if (out.kept == 0) return out;
    double mean_inc = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) {
        mean_inc += increments[i];
        mean_t += times[i];
    }
    mean_inc /= double(out.kept);
    mean_t /= double(out.kept);
    double var = 0.0;
    for (double d : increments) var += (d - mean_inc) * (d - mean_inc);
    var /= std::max(1.0, double(out.kept - 1));
    out.mean_time = mean_t;
    out.drift = mean_inc / mean_t;
    out.ci_half = 1.96 * std::sqrt(var / double(out.kept)) / mean_t;
    return out;
}

// ---------------------------------------------------------------------------
// Restriction probability for kappa = 8/3
// ---------------------------------------------------------------------------

struct RestrictionEstimate {
    double p_hat = 0.0;
    double ci_half = 0.0;
    double closed_form = 0.0; // (x/sqrt(x^2+L^2))^{5/8}
    int survived = 0, hit = 0, censored = 0;
    // ensemble means of h'(W_t)^{5/8} at checkpoint capacities (hit paths
    // contribute 0); each should match closed_form within its CI
    std::vector<double> checkpoint_t, checkpoint_mean, checkpoint_ci;
};

inline RestrictionEstimate restriction_probability(double slit_x, double slit_L, int replicas,
                                                   std::uint64_t seed, double t_max = 5e3,
                                                   double alpha = 0.08, int segments = 40) {
    const double kappa = 8.0 / 3.0;
    RestrictionEstimate out;
    out.closed_form = std::pow(slit_x / std::hypot(slit_x, slit_L), 5.0 / 8.0);
    out.checkpoint_t = {0.05, 0.2, 0.8};
    std::vector<std::vector<double>> mart(out.checkpoint_t.size());

    for (int rep = 0; rep < replicas; ++rep) {
        Rng rng = replica_rng(seed, std::uint64_t(rep));
        SlitTracker slit(slit_x, slit_L, segments);
        double w = 0.0, t = 0.0;
        std::size_t next_cp = 0;
        bool hit = false;
        double hprime_end = 0.0;
        while (t < t_max) {
            const double gap = slit.gap(w);
            if (gap < 1e-7 * (1.0 + std::fabs(w))) {
                hit = true;
                break;
            }
            double dt = std::clamp(alpha * alpha * gap * gap / kappa, 1e-10, 0.05 * (1.0 + 0.2 * t));
            if (next_cp < out.checkpoint_t.size()) dt = std::min(dt, out.checkpoint_t[next_cp] - t + 1e-12);
            slit.advance(w, dt);
            w += std::sqrt(kappa * dt) * rng.normal();
            t += dt;
            if (next_cp < out.checkpoint_t.size() && t >= out.checkpoint_t[next_cp] - 1e-9) {
                const auto e = slit.evaluate(w);
                mart[next_cp].push_back(std::pow(std::max(0.0, e.d1), 5.0 / 8.0));
                ++next_cp;
            }
        }
        if (hit) {
            for (std::size_t c = next_cp; c < mart.size(); ++c) mart[c].push_back(0.0);
            ++out.hit;
        } else {
            hprime_end = slit.evaluate(w).d1;
            if (hprime_end > 0.995)
                ++out.survived;
            else
                ++out.censored;
        }
    }
    const int decided = out.survived + out.hit;
    if (decided > 0) {
        out.p_hat = double(out.survived) / double(decided);
        out.ci_half = 1.96 * std::sqrt(out.p_hat * (1.0 - out.p_hat) / double(decided));
    }
    for (std::size_t c = 0; c < mart.size(); ++c) {
        double mean = 0.0;
        for (double v : mart[c]) mean += v;
        mean /= std::max<std::size_t>(1, mart[c].size());
        double var = 0.0;
        for (double v : mart[c]) var += (v - mean) * (v - mean);
        var /= std::max<std::size_t>(1, mart[c].size() - 1);
        out.checkpoint_mean.push_back(mean);
        out.checkpoint_ci.push_back(1.96 * std::sqrt(var / std::max<std::size_t>(1, mart[c].size())));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Winding variance of the radial trace
// ---------------------------------------------------------------------------

struct WindingFit {
    std::vector<double> eps;
    std::vector<double> variance;
    double slope = 0.0;
    double intercept = 0.0;
};

namespace detail {

// Unwinds the radial trace until |gamma| <= eps_min, recording the unwrapped
// argument at the first entry to each |z| = eps. Consecutive samples are
// refined until each argument step is below pi/2.
inline void radial_winding_one(const Driver& d, const std::vector<double>& eps,
                               std::vector<double>& theta_at_eps, std::size_t stride) {
    const std::size_t n = d.zeta.size();
    std::size_t next_eps = 0;
    double theta = 0.0;
    Cx prev = radial_trace_point(d, 0);
    std::size_t i = 0;
    while (i + 1 < n && next_eps < eps.size()) {
        std::size_t j = std::min(n - 1, i + stride);
        Cx cur = radial_trace_point(d, j);
        // refine until the argument increment is unambiguous
        while (j > i + 1 && std::fabs(std::arg(cur / prev)) >= std::numbers::pi / 2.0) {
            j = i + (j - i) / 2;
            cur = radial_trace_point(d, j);
        }
        if (j == i + 1 && std::fabs(std::arg(cur / prev)) >= std::numbers::pi / 2.0)
            throw std::runtime_error("winding: unwrap ambiguity, driver grid too coarse");
        theta += std::arg(cur / prev);
        while (next_eps < eps.size() && std::abs(cur) <= eps[next_eps]) {
            theta_at_eps[next_eps] = theta;
            ++next_eps;
        }
        prev = cur;
        i = j;
    }
    if (next_eps < eps.size()) throw std::runtime_error("winding: horizon too short for the ladder");
}

} // namespace detail

// Variance of the unwrapped trace argument at first entry to |z| = eps,
// regressed on log(1/eps) (with intercept; the o(1) constant is absorbed).
inline WindingFit winding_variance(double kappa, std::vector<double> eps_ladder, int replicas,
                                   double dt, std::uint64_t seed, std::size_t stride = 8) {
    std::sort(eps_ladder.begin(), eps_ladder.end(), std::greater<>());
    const double horizon = std::log(1.0 / eps_ladder.back()) + 3.0;
    SleParams p{kappa, horizon, dt, replicas, seed};
    WindingFit out;
    out.eps = eps_ladder;
    std::vector<std::vector<double>> winds(eps_ladder.size());
    for (int rep = 0; rep < replicas; ++rep) {
        const Driver d = Driver::radial_from_phases(sample_radial_phases(p, std::uint64_t(rep)), dt);
        std::vector<double> theta(eps_ladder.size(), 0.0);
        detail::radial_winding_one(d, eps_ladder, theta, stride);
        for (std::size_t e = 0; e < eps_ladder.size(); ++e) winds[e].push_back(theta[e]);
    }
    for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
        double mean = 0.0;
        for (double v : winds[e]) mean += v;
        mean /= double(winds[e].size());
        double var = 0.0;
        for (double v : winds[e]) var += (v - mean) * (v - mean);
        var /= double(winds[e].size() - 1);
        out.variance.push_back(var);
    }
    // least squares with intercept on x = log(1/eps)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = double(eps_ladder.size());
    for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
        const double x = std::log(1.0 / eps_ladder[e]);
        sx += x;
        sy += out.variance[e];
        sxx += x * x;
        sxy += x * out.variance[e];
    }
    out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    out.intercept = (sy - out.slope * sx) / m;
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form exponents (Brownian intersection exponents)
// ---------------------------------------------------------------------------

struct ExponentRecord {
    double zeta_jk, zeta_n, zeta_tilde_jk, zeta_tilde_n, eta_k;
};

inline double exponent_zeta(int j, double k) {
    const double s = std::sqrt(24.0 * j + 1.0) + std::sqrt(24.0 * k + 1.0) - 2.0;
    return (s * s - 4.0) / 96.0;
}
inline double exponent_zeta_n(int n) { return (4.0 * n * n - 1.0) / 48.0; }
inline double exponent_zeta_tilde(int j, double k) {
    const double s = std::sqrt(24.0 * j + 1.0) + std::sqrt(24.0 * k + 1.0) - 1.0;
    return (s * s - 1.0) / 48.0;
}
inline double exponent_zeta_tilde_n(int n) { return (2.0 * n * n + n) / 6.0; }
inline double exponent_eta(double k) {
    const double s = std::sqrt(24.0 * k + 1.0) - 1.0;
    return (s * s - 4.0) / 48.0;
}

inline ExponentRecord exponent_closed_forms(int j, double k, int n) {
    if (j < 1 || k < 0.0 || n < 1) throw std::domain_error("exponent_closed_forms: outside stated domain");
    return ExponentRecord{exponent_zeta(j, k), exponent_zeta_n(n), exponent_zeta_tilde(j, k),
                          exponent_zeta_tilde_n(n), exponent_eta(k)};
}

// ---------------------------------------------------------------------------
// Phase diagnostics of a sampled trace
// ---------------------------------------------------------------------------

struct PhaseReport {
    bool simple_at_resolution = true;
    bool hits_positive_reals = false;
    double fill_fraction = 0.0;  // fraction of coarse grid cells visited in a fixed box
    double max_radius = 0.0;     // transience proxy
};

inline PhaseReport phase_diagnostics(const Trace& tr, double box = 2.0, int grid = 32,
                                     std::size_t separation = 8) {
    PhaseReport rep;
    // resolution = typical consecutive gap
    double res = 0.0;
    for (std::size_t i = 1; i < tr.pts.size(); ++i) res += std::abs(tr.pts[i] - tr.pts[i - 1]);
    res /= double(tr.pts.size() - 1);

    for (std::size_t i = 0; i < tr.pts.size() && rep.simple_at_resolution; ++i)
        for (std::size_t j = i + separation; j < tr.pts.size(); ++j)
            if (std::abs(tr.pts[i] - tr.pts[j]) < 0.5 * res) {
                rep.simple_at_resolution = false;
                break;
            }

    for (const Cx& p : tr.pts) {
        if (p.real() > 4.0 * res && p.imag() < 2.0 * res) rep.hits_positive_reals = true;
        rep.max_radius = std::max(rep.max_radius, std::abs(p));
    }

    std::vector<bool> cells(std::size_t(grid) * std::size_t(grid), false);
    for (const Cx& p : tr.pts) {
        const int ix = int((p.real() + box) / (2.0 * box) * grid);
        const int iy = int(p.imag() / box * grid);
        if (ix >= 0 && ix < grid && iy >= 0 && iy < grid) cells[std::size_t(iy) * grid + ix] = true;
    }
    std::size_t visited = 0;
    for (bool b : cells) visited += b ? 1 : 0;
    rep.fill_fraction = double(visited) / double(cells.size());
    return rep;
}

} // namespace slelab
