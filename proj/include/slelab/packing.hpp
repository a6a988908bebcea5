// Circle packing: angle sums, the Euclidean boundary-value solver, layout,
// the maximal packing in the disc (hyperbolic radii), hexagonal domain
// approximation, and the discrete Riemann map built from them.
#pragma once

#include <cmath>
#include <complex>
#include <deque>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "slelab/complexfn.hpp"
#include "slelab/triangulation.hpp"

namespace slelab {

struct CirclePacking {
    std::vector<Cx> centers;
    std::vector<double> radii;
};

// Angle at the center of a circle of radius rho in the tangency triangle with
// neighbor radii r1, r2. Half-angle form of the law-of-cosines expression,
// stable for extreme radius ratios.
inline double tangency_angle(double rho, double r1, double r2) {
    if (rho <= 0.0 || r1 <= 0.0 || r2 <= 0.0)
        throw std::domain_error("tangency_angle: radii must be positive");
    const double s2 = (r1 / (rho + r1)) * (r2 / (rho + r2));
    return 2.0 * std::asin(std::sqrt(s2));
}

// Hyperbolic counterpart (Poincare disc metric).
inline double tangency_angle_h(double rho, double r1, double r2) {
    if (rho <= 0.0 || r1 <= 0.0 || r2 <= 0.0)
        throw std::domain_error("tangency_angle_h: radii must be positive");
    const double s2 = (std::sinh(r1) / std::sinh(rho + r1)) * (std::sinh(r2) / std::sinh(rho + r2));
    return 2.0 * std::asin(std::sqrt(std::min(1.0, s2)));
}

// Angle sum at an interior flower.
inline double angle_sum(const std::vector<double>& radii, const Flower& fl) {
    if (!fl.closed) throw std::invalid_argument("angle_sum: flower must be interior");
    const double rho = radii[fl.center];
    double sum = 0.0;
    const std::size_t k = fl.petals.size();
    for (std::size_t i = 0; i < k; ++i)
        sum += tangency_angle(rho, radii[fl.petals[i]], radii[fl.petals[(i + 1) % k]]);
    return sum;
}

inline double angle_sum_h(const std::vector<double>& radii, const Flower& fl) {
    const double rho = radii[fl.center];
    double sum = 0.0;
    const std::size_t k = fl.petals.size();
    for (std::size_t i = 0; i < k; ++i)
        sum += tangency_angle_h(rho, radii[fl.petals[i]], radii[fl.petals[(i + 1) % k]]);
    return sum;
}

struct PackingError : std::runtime_error {
    double residual;
    PackingError(const std::string& what, double res) : std::runtime_error(what), residual(res) {}
};

namespace detail {

// Solves angle_sum(rho) = 2*pi for one vertex by monotone bisection with a
// Newton-style warm start (the sum is strictly decreasing in rho).
template <class AngleSum>
double solve_vertex_radius(double rho, const AngleSum& f) {
    const double target = 2.0 * std::numbers::pi;
    double lo = rho, hi = rho;
    if (f(rho) > target) {
        do {
            hi *= 2.0;
        } while (f(hi) > target && hi < 1e12);
    } else {
        do {
            lo *= 0.5;
        } while (f(lo) <= target && lo > 1e-300);
    }
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16 * hi) break;
    }
    return 0.5 * (lo + hi);
}

template <class SumFn>
double sweep_radii(const Triangulation& tri, std::vector<double>& radii, const SumFn& sum_at,
                   double tol, int max_sweeps) {
    std::vector<int> interior;
    for (int v = 0; v < tri.n; ++v)
        if (!tri.on_boundary[v]) interior.push_back(v);
    const double target = 2.0 * std::numbers::pi;

    std::vector<double> prev_delta;
    double residual = 0.0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        std::vector<double> old = radii;
        for (int v : interior) {
            radii[v] = solve_vertex_radius(radii[v], [&](double rho) {
                const double keep = radii[v];
                radii[v] = rho;
                const double s = sum_at(v, radii);
                radii[v] = keep;
                return s;
            });
        }
        residual = 0.0;
        for (int v : interior) residual = std::max(residual, std::fabs(sum_at(v, radii) - target));
        if (residual < tol) return residual;

        // geometric (Aitken) superstep on the radius increments
        std::vector<double> delta(radii.size(), 0.0);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            delta[i] = radii[i] - old[i];
            if (!prev_delta.empty()) {
                num += delta[i] * delta[i];
                den += prev_delta[i] * delta[i];
            }
        }
        if (!prev_delta.empty() && den > 0.0) {
            const double lambda = num / den; // ~ contraction factor
            if (lambda > 0.2 && lambda < 50.0) {
                const double gain = std::min(lambda, 0.95 / (1.0 - std::min(lambda, 0.95)));
                std::vector<double> trial = radii;
                for (int v : interior) trial[v] = std::max(1e-12, trial[v] + gain * delta[v]);
                double trial_res = 0.0;
                for (int v : interior) trial_res = std::max(trial_res, std::fabs(sum_at(v, trial) - target));
                if (trial_res < residual) radii = trial;
            }
        }
        prev_delta = std::move(delta);
    }
    return residual;
}

} // namespace detail

// Euclidean packing solver with prescribed boundary radii (aligned with
// tri.boundary). Interior radii satisfy |angle_sum - 2pi| < tol.
inline std::vector<double> solve_packing_radii(const Triangulation& tri,
                                               const std::vector<double>& boundary_radii,
                                               double tol = 1e-10, int max_sweeps = 20000) {
    if (boundary_radii.size() != tri.boundary.size())
        throw std::invalid_argument("solve_packing_radii: boundary radius count mismatch");
    for (double r : boundary_radii)
        if (!(r > 0.0)) throw std::domain_error("solve_packing_radii: boundary radii must be positive");

    double mean = 0.0;
    for (double r : boundary_radii) mean += r;
    mean /= double(boundary_radii.size());

    std::vector<double> radii(tri.n, mean);
    for (std::size_t i = 0; i < tri.boundary.size(); ++i) radii[tri.boundary[i]] = boundary_radii[i];

    const double res = detail::sweep_radii(
        tri, radii,
        [&](int v, const std::vector<double>& r) { return angle_sum(r, tri.flowers[v]); }, tol,
        max_sweeps);
    if (res >= tol) throw PackingError("packing solver did not reach tolerance", res);
    return radii;
}

// Layout by breadth-first face traversal from a root edge; returns centers.
// Tangency residual beyond `tol` (relative) raises PackingError.
inline CirclePacking layout(const Triangulation& tri, const std::vector<double>& radii,
                            std::size_t root_face = 0, double tol = 1e-9) {
    if (radii.size() != std::size_t(tri.n)) throw std::invalid_argument("layout: radius count mismatch");
    std::vector<Cx> centers(tri.n);
    std::vector<bool> placed(tri.n, false);

    const auto& f0 = tri.faces.at(root_face);
    centers[f0[0]] = Cx(0.0, 0.0);
    centers[f0[1]] = Cx(radii[f0[0]] + radii[f0[1]], 0.0);
    placed[f0[0]] = placed[f0[1]] = true;

    // faces adjacent to each vertex, for the traversal
    std::vector<std::vector<int>> vfaces(tri.n);
    for (std::size_t fi = 0; fi < tri.faces.size(); ++fi)
        for (int k = 0; k < 3; ++k) vfaces[tri.faces[fi][k]].push_back(int(fi));

    std::deque<int> queue{int(root_face)};
    std::vector<bool> enqueued(tri.faces.size(), false);
    enqueued[root_face] = true;
    while (!queue.empty()) {
        const int fi = queue.front();
        queue.pop_front();
        const auto& f = tri.faces[fi];
        int known = (placed[f[0]] ? 1 : 0) + (placed[f[1]] ? 1 : 0) + (placed[f[2]] ? 1 : 0);
        if (known >= 2) {
            if (known == 2) {
                int k = 0;
                while (placed[f[k]]) ++k;
                const int w = f[k], u = f[(k + 1) % 3], v = f[(k + 2) % 3];
                // face is (u,v,w) up to rotation, counterclockwise; w sits to
                // the left of u->v
                const Cx base = centers[v] - centers[u];
                const double duv = std::abs(base);
                const double du = radii[u] + radii[w];
                const double dv = radii[v] + radii[w];
                const double c = std::clamp((duv * duv + du * du - dv * dv) / (2.0 * duv * du), -1.0, 1.0);
                const double theta = std::acos(c);
                centers[w] = centers[u] + du * (base / duv) * std::polar(1.0, theta);
                placed[w] = true;
            }
            for (int k = 0; k < 3; ++k)
                for (int nf : vfaces[f[k]])
                    if (!enqueued[nf]) {
                        enqueued[nf] = true;
                        queue.push_back(nf);
                    }
        } else {
            // revisit later once neighbors are placed
            if (!queue.empty()) queue.push_back(fi);
        }
    }
    for (int v = 0; v < tri.n; ++v)
        if (!placed[v]) throw PackingError("layout: traversal did not reach every vertex", 0.0);

    double worst = 0.0;
    for (auto [a, b] : tri.edges) {
        const double want = radii[a] + radii[b];
        worst = std::max(worst, std::fabs(std::abs(centers[a] - centers[b]) - want) / want);
    }
    if (worst > tol) throw PackingError("layout: tangency residual too large", worst);
    return CirclePacking{std::move(centers), radii};
}

inline CirclePacking solve_packing(const Triangulation& tri, const std::vector<double>& boundary_radii,
                                   double tol = 1e-10) {
    return layout(tri, solve_packing_radii(tri, boundary_radii, tol));
}

// ---------------------------------------------------------------------------
// Maximal packing in the unit disc (hyperbolic radii; boundary horocycles)
// ---------------------------------------------------------------------------

namespace detail {

// h-radius standing in for a horocycle; e^{-2*30} is far below double rounding
constexpr double kHorocycleRadius = 30.0;

struct HypLayout {
    std::vector<Cx> euclid_center;
    std::vector<double> euclid_radius;
};

inline Cx disc_translate(Cx z, Cx a) { return (z - a) / (1.0 - std::conj(a) * z); }
inline Cx disc_translate_inv(Cx w, Cx a) { return (w + a) / (1.0 + std::conj(a) * w); }

// Euclidean circle of the hyperbolic disc with h-center z0 and h-radius r.
inline void hyp_to_euclid(Cx z0, double r, Cx& center, double& radius) {
    const double t = std::tanh(0.5 * r);
    const double s2 = std::norm(z0);
    const double den = 1.0 - t * t * s2;
    center = z0 * (1.0 - t * t) / den;
    radius = t * (1.0 - s2) / den;
}

} // namespace detail

// Computes the maximal packing of a disc-type triangulation: boundary circles
// internally tangent to the unit circle, interior angle sums 2*pi in the
// hyperbolic metric.
inline CirclePacking maximal_disc_packing(const Triangulation& tri, double tol = 1e-10,
                                          int max_sweeps = 60000) {
    if (tri.boundary.empty()) throw std::invalid_argument("maximal_disc_packing: need a boundary");

    std::vector<double> radii(tri.n, 0.5);
    for (int v : tri.boundary) radii[v] = detail::kHorocycleRadius;
    const double res = detail::sweep_radii(
        tri, radii,
        [&](int v, const std::vector<double>& r) { return angle_sum_h(r, tri.flowers[v]); }, tol,
        max_sweeps);
    if (res >= tol) throw PackingError("maximal packing solver did not reach tolerance", res);

    // --- layout ---
    std::vector<Cx> hcenter(tri.n);       // interior vertices
    std::vector<Cx> ideal(tri.n);         // boundary vertices: tangency direction
    std::vector<Cx> ecenter(tri.n);
    std::vector<double> eradius(tri.n, 0.0);
    std::vector<bool> placed(tri.n, false);

    // root: interior vertex with maximal combinatorial distance from the boundary
    std::vector<int> dist(tri.n, -1);
    std::deque<int> bfs;
    for (int v : tri.boundary) {
        dist[v] = 0;
        bfs.push_back(v);
    }
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop_front();
        for (int u : tri.flowers[v].petals)
            if (dist[u] < 0) {
                dist[u] = dist[v] + 1;
                bfs.push_back(u);
            }
    }
    int root = 0;
    for (int v = 0; v < tri.n; ++v)
        if (dist[v] > dist[root]) root = v;
    if (tri.on_boundary[root]) throw std::invalid_argument("maximal_disc_packing: no interior vertex");

    hcenter[root] = Cx(0.0, 0.0);
    detail::hyp_to_euclid(hcenter[root], radii[root], ecenter[root], eradius[root]);
    placed[root] = true;
    {
        const int nb = tri.flowers[root].petals.front();
        if (!tri.on_boundary[nb]) {
            hcenter[nb] = Cx(std::tanh(0.5 * (radii[root] + radii[nb])), 0.0);
            detail::hyp_to_euclid(hcenter[nb], radii[nb], ecenter[nb], eradius[nb]);
        } else {
            // horocycle tangent to the root circle, placed on the positive axis
            const double rho = 0.5 * (1.0 - eradius[root]);
            eradius[nb] = rho;
            ecenter[nb] = Cx(1.0 - rho, 0.0);
            ideal[nb] = Cx(1.0, 0.0);
        }
        placed[nb] = true;
    }

    // direction of a placed vertex seen from the pivot's h-center
    auto direction_from = [&](int pivot, int other) -> Cx {
        const Cx zp = hcenter[pivot];
        Cx target = tri.on_boundary[other] ? ideal[other] : hcenter[other];
        Cx d = detail::disc_translate(target, zp);
        return d / std::abs(d);
    };

    // place interior w in face read as (pivot u, placed v, w) counterclockwise
    auto place_interior = [&](int u, int v, int w, bool w_follows_v) {
        const double alpha = tangency_angle_h(radii[u], radii[v], radii[w]);
        const Cx dir_v = direction_from(u, v);
        const Cx dir_w = dir_v * std::polar(1.0, w_follows_v ? alpha : -alpha);
        const double d = radii[u] + radii[w];
        hcenter[w] = detail::disc_translate_inv(std::tanh(0.5 * d) * dir_w, hcenter[u]);
        detail::hyp_to_euclid(hcenter[w], radii[w], ecenter[w], eradius[w]);
        placed[w] = true;
    };

    // place boundary w (horocycle) tangent to two placed circles; the center
    // sits at (1-rho) e^{i psi}. For a given tangency direction psi, tangency
    // to the first circle fixes rho in closed form; the second circle's
    // tangency residual is a 1-d root-finding problem in psi.
    auto place_boundary = [&](int w, int u, int v) -> bool {
        const Cx c1 = ecenter[u], c2 = ecenter[v];
        const double r1 = eradius[u], r2 = eradius[v];
        auto rho_for = [&](double psi) -> double {
            const double beta = c1.real() * std::cos(psi) + c1.imag() * std::sin(psi);
            const double den = 2.0 * (beta - 1.0 - r1);
            if (std::fabs(den) < 1e-300) return -1.0;
            return (r1 * r1 + 2.0 * beta - 1.0 - std::norm(c1)) / den;
        };
        auto G = [&](double psi) -> double {
            const double rho = rho_for(psi);
            if (!(rho > 0.0 && rho < 1.0)) return std::numeric_limits<double>::quiet_NaN();
            const Cx cw = (1.0 - rho) * Cx(std::cos(psi), std::sin(psi));
            return std::abs(cw - c2) - (rho + r2);
        };
        const int samples = 720;
        double best_res = 1e100, best_rho = -1.0, best_psi = 0.0;
        double prev_psi = 0.0, prev_G = G(0.0);
        for (int i = 1; i <= samples; ++i) {
            const double psi = 2.0 * std::numbers::pi * double(i) / double(samples);
            const double val = G(psi);
            if (std::isfinite(prev_G) && std::isfinite(val) && prev_G * val <= 0.0) {
                double lo = prev_psi, hi = psi, glo = prev_G;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = G(mid);
                    if (glo * gm <= 0.0)
                        hi = mid;
                    else {
                        lo = mid;
                        glo = gm;
                    }
                }
                const double psi_root = 0.5 * (lo + hi);
                const double rho = rho_for(psi_root);
                if (rho > 0.0 && rho < 1.0) {
                    const Cx omega(std::cos(psi_root), std::sin(psi_root));
                    const Cx cw = (1.0 - rho) * omega;
                    // orientation: face (u,v,w) ccw means w lies left of u->v
                    const Cx e1 = c2 - c1, e2 = cw - c1;
                    const double cross = e1.real() * e2.imag() - e1.imag() * e2.real();
                    const double res = std::fabs(std::abs(cw - c1) - (rho + r1)) +
                                       std::fabs(std::abs(cw - c2) - (rho + r2));
                    if (cross > 0.0 && res < best_res) {
                        best_res = res;
                        best_rho = rho;
                        best_psi = psi_root;
                    }
                }
            }
            prev_psi = psi;
            prev_G = val;
        }
        if (best_rho < 0.0) return false;
        eradius[w] = best_rho;
        ideal[w] = Cx(std::cos(best_psi), std::sin(best_psi));
        ecenter[w] = (1.0 - best_rho) * ideal[w];
        placed[w] = true;
        return true;
    };

    // sweep faces until everything is placed
    bool progress = true;
    while (progress) {
        progress = false;
        for (const auto& f : tri.faces) {
            int missing = -1, count = 0;
            for (int k = 0; k < 3; ++k)
                if (!placed[f[k]])
                    missing = k;
                else
                    ++count;
            if (count != 2) continue;
            const int w = f[missing], u = f[(missing + 1) % 3], v = f[(missing + 2) % 3];
            // cyclic order (u,v,w) is counterclockwise: around u, w follows v;
            // around v, w precedes u
            if (!tri.on_boundary[w]) {
                const int pivot = tri.on_boundary[u] ? v : u;
                if (tri.on_boundary[pivot]) continue;
                if (pivot == u)
                    place_interior(u, v, w, /*w_follows_v=*/true);
                else
                    place_interior(v, u, w, /*w_follows_v=*/false);
                progress = true;
            } else {
                if (place_boundary(w, u, v)) progress = true;
            }
        }
    }
    for (int v = 0; v < tri.n; ++v)
        if (!placed[v]) throw PackingError("maximal packing layout: unreached vertex", 0.0);

    double worst = 0.0;
    for (auto [a, b] : tri.edges) {
        const double want = eradius[a] + eradius[b];
        worst = std::max(worst, std::fabs(std::abs(ecenter[a] - ecenter[b]) - want) / want);
    }
    for (int v : tri.boundary)
        worst = std::max(worst, std::fabs(std::abs(ecenter[v]) + eradius[v] - 1.0));
    if (worst > 1e-6) throw PackingError("maximal packing layout: residual too large", worst);

    return CirclePacking{std::move(ecenter), std::move(eradius)};
}

// ---------------------------------------------------------------------------
// Hexagonal approximation of a domain and the discrete Riemann map
// ---------------------------------------------------------------------------

// A simply connected region, described by an exact disc-containment test.
struct Region {
    std::function<bool(Cx, double)> disc_inside;
    double xmin, xmax, ymin, ymax;
};

inline Region disc_region(Cx center, double R) {
    return Region{[center, R](Cx c, double r) { return std::abs(c - center) + r <= R; },
                  center.real() - R, center.real() + R, center.imag() - R, center.imag() + R};
}

inline Region rect_region(double x0, double x1, double y0, double y1) {
    return Region{[=](Cx c, double r) {
                      return c.real() - r >= x0 && c.real() + r <= x1 && c.imag() - r >= y0 &&
                             c.imag() + r <= y1;
                  },
                  x0, x1, y0, y1};
}

struct HexApproximation {
    Triangulation tri;       // disc-type complex of the kept lattice sites
    CirclePacking circles;   // lattice circles of radius eps
    std::vector<Cx> sites;   // centers, aligned with tri vertex ids
};

inline HexApproximation hex_approximation(const Region& region, double eps, Cx p) {
    const Cx e1(2.0 * eps, 0.0);
    const Cx e2(eps, std::numbers::sqrt3 * eps);
    const int imax = int((region.xmax - region.xmin) / eps) + 2;
    const int jmax = int((region.ymax - region.ymin) / (std::numbers::sqrt3 * eps)) + 2;

    auto site = [&](int i, int j) { return double(i) * e1 + double(j) * e2; };
    auto in_range = [&](int i, int j) {
        const Cx c = site(i, j);
        return c.real() > region.xmin - 3.0 * eps && c.real() < region.xmax + 3.0 * eps &&
               c.imag() > region.ymin - 3.0 * eps && c.imag() < region.ymax + 3.0 * eps;
    };
    static const int dirs[6][2] = {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}};

    auto keep = [&](int i, int j) {
        if (!in_range(i, j)) return false;
        for (const auto& d : dirs)
            if (!region.disc_inside(site(i + d[0], j + d[1]), eps)) return false;
        return true;
    };

    // nearest kept site to p
    int pi = 0, pj = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int i = -imax; i <= imax; ++i)
        for (int j = -jmax; j <= jmax; ++j)
            if (keep(i, j)) {
                const double d = std::abs(site(i, j) - p);
                if (d < best) {
                    best = d;
                    pi = i;
                    pj = j;
                    found = true;
                }
            }
    if (!found || best > 2.0 * eps * 2.0)
        throw std::domain_error("hex_approximation: p is not covered at this eps");

    // connected component of kept sites containing p (deterministic order)
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> sites_ij;
    std::deque<std::pair<int, int>> work{{pi, pj}};
    id[{pi, pj}] = 0;
    sites_ij.push_back({pi, pj});
    while (!work.empty()) {
        auto [i, j] = work.front();
        work.pop_front();
        for (const auto& d : dirs) {
            const int ni = i + d[0], nj = j + d[1];
            if (id.count({ni, nj}) || !keep(ni, nj)) continue;
            id[{ni, nj}] = int(sites_ij.size());
            sites_ij.push_back({ni, nj});
            work.push_back({ni, nj});
        }
    }
    // stable vertex numbering: sort sites lexicographically
    std::sort(sites_ij.begin(), sites_ij.end());
    id.clear();
    for (std::size_t k = 0; k < sites_ij.size(); ++k) id[sites_ij[k]] = int(k);

    HexApproximation out;
    out.tri.n = int(sites_ij.size());
    auto has = [&](int i, int j) { return id.count({i, j}) != 0; };
    for (auto [i, j] : sites_ij) {
        if (has(i + 1, j) && has(i, j + 1))
            out.tri.faces.push_back({id[{i, j}], id[{i + 1, j}], id[{i, j + 1}]});
        if (has(i, j + 1) && has(i - 1, j + 1))
            out.tri.faces.push_back({id[{i, j}], id[{i, j + 1}], id[{i - 1, j + 1}]});
    }
    out.tri.validate();
    for (auto [i, j] : sites_ij) out.sites.push_back(site(i, j));
    out.circles.centers = out.sites;
    out.circles.radii.assign(out.sites.size(), eps);
    return out;
}

// Completes a disc-type complex to a sphere by one exterior vertex whose
// flower is the boundary cycle.
inline Triangulation complete_with_exterior(const Triangulation& tri) {
    Triangulation out;
    out.n = tri.n + 1;
    out.faces = tri.faces;
    const int ext = tri.n;
    const auto& b = tri.boundary;
    for (std::size_t k = 0; k < b.size(); ++k)
        out.faces.push_back({b[k], b[(k + 1) % b.size()], ext});
    out.validate();
    return out;
}

// Piecewise-linear discrete Riemann map: lattice centers -> repacked centers.
struct DiscreteMap {
    HexApproximation approx;
    CirclePacking image; // normalized maximal packing
    int p_vertex = -1, q_vertex = -1;

    Cx vertex_value(int v) const { return image.centers[v]; }

    // PL extension: barycentric interpolation on the face containing z.
    Cx operator()(Cx z) const {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_face = 0;
        for (std::size_t fi = 0; fi < approx.tri.faces.size(); ++fi) {
            const auto& f = approx.tri.faces[fi];
            const Cx a = approx.sites[f[0]], b = approx.sites[f[1]], c = approx.sites[f[2]];
            const double d = std::abs(z - (a + b + c) / 3.0);
            if (d < best) {
                best = d;
                best_face = fi;
            }
        }
        const auto& f = approx.tri.faces[best_face];
        const Cx a = approx.sites[f[0]], b = approx.sites[f[1]], c = approx.sites[f[2]];
        const double det = (b - a).real() * (c - a).imag() - (b - a).imag() * (c - a).real();
        const double l1 = ((z - a).real() * (c - a).imag() - (z - a).imag() * (c - a).real()) / det;
        const double l2 = ((b - a).real() * (z - a).imag() - (b - a).imag() * (z - a).real()) / det;
        return (1.0 - l1 - l2) * image.centers[f[0]] + l1 * image.centers[f[1]] +
               l2 * image.centers[f[2]];
    }
};

// Moebius image of a circle under a disc automorphism, via three points.
inline void map_circle(const std::function<Cx(Cx)>& m, Cx c, double r, Cx& c_out, double& r_out) {
    const Cx p1 = m(c + r), p2 = m(c - r), p3 = m(c + Cx(0.0, r));
    // circumcenter of p1,p2,p3
    const Cx a = p1 - p3, b = p2 - p3;
    const double det = 2.0 * (a.real() * b.imag() - a.imag() * b.real());
    const double na = std::norm(p1) - std::norm(p3), nb = std::norm(p2) - std::norm(p3);
    c_out = Cx((b.imag() * na - a.imag() * nb) / det, (a.real() * nb - b.real() * na) / det);
    r_out = std::abs(p1 - c_out);
}

// Rodin-Sullivan style discrete Riemann map of a simply connected region.
inline DiscreteMap discrete_riemann_map(const Region& region, double eps, Cx p, Cx q) {
    DiscreteMap dm;
    dm.approx = hex_approximation(region, eps, p);
    CirclePacking packed = maximal_disc_packing(dm.approx.tri);

    // nearest lattice circles to p and q (ties: lowest index)
    auto nearest = [&](Cx target) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < dm.approx.sites.size(); ++v) {
            const double d = std::abs(dm.approx.sites[v] - target);
            if (d < bd - 1e-15) {
                bd = d;
                best = int(v);
            }
        }
        return best;
    };
    dm.p_vertex = nearest(p);
    dm.q_vertex = nearest(q);

    // center the p-circle at 0, then rotate the q-circle center to arg 0
    const Cx a = packed.centers[dm.p_vertex];
    auto shift = [a](Cx z) { return (z - a) / (1.0 - std::conj(a) * z); };
    std::vector<Cx> centers(packed.centers.size());
    std::vector<double> radii(packed.radii.size());
    for (std::size_t v = 0; v < centers.size(); ++v)
        map_circle(shift, packed.centers[v], packed.radii[v], centers[v], radii[v]);
    const Cx rot = std::polar(1.0, -std::arg(centers[dm.q_vertex]));
    for (auto& c : centers) c *= rot;

    dm.image.centers = std::move(centers);
    dm.image.radii = std::move(radii);
    return dm;
}

// ---------------------------------------------------------------------------
// Packing certificates
// ---------------------------------------------------------------------------

struct PackingCheck {
    double worst_tangency = 0.0;   // relative, over edges
    double worst_overlap = 0.0;    // positive if two non-adjacent circles overlap
    bool ok(double tol = 1e-8) const { return worst_tangency < tol && worst_overlap < tol; }
};

inline PackingCheck check_packing(const Triangulation& tri, const CirclePacking& pk, double tol = 1e-8) {
    PackingCheck out;
    std::set<std::pair<int, int>> edge_set(tri.edges.begin(), tri.edges.end());
    for (auto [a, b] : tri.edges) {
        const double want = pk.radii[a] + pk.radii[b];
        out.worst_tangency =
            std::max(out.worst_tangency, std::fabs(std::abs(pk.centers[a] - pk.centers[b]) - want) / want);
    }
    for (int a = 0; a < tri.n; ++a)
        for (int b = a + 1; b < tri.n; ++b) {
            if (edge_set.count({a, b})) continue;
            const double sum = pk.radii[a] + pk.radii[b];
            const double gap = std::abs(pk.centers[a] - pk.centers[b]) - sum;
            if (gap < 0.0) out.worst_overlap = std::max(out.worst_overlap, -gap / sum);
        }
    (void)tol;
    return out;
}

} // namespace slelab
