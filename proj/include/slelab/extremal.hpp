// Discrete (vertex) extremal length of the crossing family of a combinatorial
// quadrilateral, the associated square tiling, and the axis-rectangle Helly
// check used to certify tilings.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace slelab {

// Graph with four marked disjoint boundary arcs p1p2, p2p3, p3p4, p4p1.
// The crossing family joins arc 0 (p1p2) to arc 2 (p3p4).
struct QuadGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;
    std::array<std::vector<int>, 4> arcs;

    void add_edge(int a, int b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }

    void validate() const {
        if (n <= 0 || int(adj.size()) != n) throw std::invalid_argument("quadgraph: bad vertex count");
        if (arcs[0].empty() || arcs[2].empty())
            throw std::invalid_argument("quadgraph: crossing arcs must be nonempty");
        std::vector<int> mark(n, -1);
        for (int a = 0; a < 4; ++a)
            for (int v : arcs[a]) {
                if (v < 0 || v >= n) throw std::invalid_argument("quadgraph: arc vertex out of range");
                // opposite crossing arcs may meet in a degenerate quadrilateral;
                // any other overlap is invalid
                if (mark[v] >= 0 && !(mark[v] == 0 && a == 2))
                    throw std::invalid_argument("quadgraph: arcs are not disjoint");
                mark[v] = a;
            }
    }
};

struct VertexMetric {
    std::vector<double> rho;
    double area = 0.0;        // sum rho^2
    double lambda = 0.0;      // extremal length of the crossing family, 1/area
    bool infinite = false;    // no joining path
    double kkt_residual = 0.0;
};

namespace detail {

// Multi-source shortest path with vertex weights; the length of a path
// includes the weights of both endpoints.
inline std::vector<double> vertex_dijkstra(const QuadGraph& g, const std::vector<double>& rho,
                                           const std::vector<int>& sources,
                                           std::vector<int>* parent = nullptr) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.n, inf);
    if (parent) parent->assign(g.n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (int s : sources) {
        if (rho[s] < dist[s]) {
            dist[s] = rho[s];
            pq.push({dist[s], s});
        }
    }
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v] + 1e-18) continue;
        for (int u : g.adj[v]) {
            const double cand = d + rho[u];
            if (cand < dist[u] - 1e-18) {
                dist[u] = cand;
                if (parent) (*parent)[u] = v;
                pq.push({cand, u});
            }
        }
    }
    return dist;
}

inline std::vector<int> shortest_crossing_path(const QuadGraph& g, const std::vector<double>& rho,
                                               double* length_out) {
    std::vector<int> parent;
    auto dist = vertex_dijkstra(g, rho, g.arcs[0], &parent);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int v : g.arcs[2])
        if (dist[v] < best_d) {
            best_d = dist[v];
            best = v;
        }
    if (best < 0) {
        if (length_out) *length_out = std::numeric_limits<double>::infinity();
        return {};
    }
    std::vector<int> path;
    for (int v = best; v >= 0; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    if (length_out) *length_out = best_d;
    return path;
}

} // namespace detail

// Solves  min sum rho(v)^2  s.t.  sum_{v in gamma} rho(v) >= 1  for every path
// gamma joining arc p1p2 to arc p3p4, by cutting planes on shortest paths with
// an active-set least-squares subproblem (rho = A^T lambda, lambda >= 0).
inline VertexMetric discrete_extremal_length(const QuadGraph& g, double tol = 1e-9) {
    g.validate();
    VertexMetric out;
    out.rho.assign(g.n, 0.0);

    {
        // reachability: lambda = infinity when the arcs are not joined
        std::vector<double> hop(g.n, 1.0);
        auto d = detail::vertex_dijkstra(g, hop, g.arcs[0]);
        bool reachable = false;
        for (int v : g.arcs[2]) reachable = reachable || std::isfinite(d[v]);
        if (!reachable) {
            out.infinite = true;
            out.lambda = std::numeric_limits<double>::infinity();
            return out;
        }
    }

    std::vector<std::vector<int>> paths;     // active constraints
    std::vector<Eigen::VectorXd> indicators; // 0/1 columns of A^T
    Eigen::VectorXd lambda;

    auto resolve = [&]() {
        // solve G mu = 1 on the active set, dropping negative multipliers
        for (int guard = 0; guard < 400; ++guard) {
            const int k = int(paths.size());
            Eigen::MatrixXd G(k, k);
            for (int i = 0; i < k; ++i)
                for (int j = i; j < k; ++j) {
                    const double dot = indicators[i].dot(indicators[j]);
                    G(i, j) = dot;
                    G(j, i) = dot;
                }
            G.diagonal().array() += 1e-12;
            lambda = G.ldlt().solve(Eigen::VectorXd::Ones(k));
            int worst = -1;
            double worst_val = -1e-12;
            for (int i = 0; i < k; ++i)
                if (lambda(i) < worst_val) {
                    worst_val = lambda(i);
                    worst = i;
                }
            if (worst < 0) return;
            paths.erase(paths.begin() + worst);
            indicators.erase(indicators.begin() + worst);
        }
        throw std::runtime_error("extremal length: active-set dropping did not settle");
    };

    const int max_cuts = 20 * g.n + 200;
    for (int iter = 0; iter < max_cuts; ++iter) {
        double len = 0.0;
        std::vector<int> gamma;
        if (paths.empty()) {
            std::vector<double> hop(g.n, 1.0);
            gamma = detail::shortest_crossing_path(g, hop, &len);
            len = 0.0; // force the first cut
        } else {
            gamma = detail::shortest_crossing_path(g, out.rho, &len);
        }
        if (len >= 1.0 - tol) {
            out.area = 0.0;
            for (double r : out.rho) out.area += r * r;
            out.lambda = 1.0 / out.area;
            // certificate: primal feasibility + complementary slackness
            double comp = 0.0;
            for (std::size_t i = 0; i < paths.size(); ++i) {
                double plen = 0.0;
                for (int v : paths[i]) plen += out.rho[v];
                comp = std::max(comp, std::fabs(lambda(int(i))) * std::fabs(plen - 1.0));
            }
            out.kkt_residual = std::max(std::max(0.0, 1.0 - len), comp);
            return out;
        }
        Eigen::VectorXd ind = Eigen::VectorXd::Zero(g.n);
        for (int v : gamma) ind(v) = 1.0;
        bool duplicate = false;
        for (const auto& existing : indicators)
            if ((existing - ind).cwiseAbs().maxCoeff() < 0.5) duplicate = true;
        if (duplicate)
            throw std::runtime_error("extremal length: separation returned an active path");
        paths.push_back(gamma);
        indicators.push_back(ind);
        resolve();
        for (int v = 0; v < g.n; ++v) {
            double r = 0.0;
            for (std::size_t i = 0; i < indicators.size(); ++i) r += lambda(int(i)) * indicators[i](v);
            out.rho[v] = std::max(0.0, r);
        }
    }
    throw std::runtime_error("extremal length: cutting-plane iteration cap reached");
}

// ---------------------------------------------------------------------------
// Square tiling
// ---------------------------------------------------------------------------

struct SquareTiling {
    double width = 0.0; // M = sum s(v)^2, height is normalized to 1
    std::vector<double> x, y, side; // square of v is [x-s, x] x [y-s, y]
};

// Squares with sides s(v) = rho*(v); the vertical position is the rho-distance
// from arc p1p2, the horizontal position the rho-distance from the left side
// p4p1 (the open arc together with its corner endpoints p4 and p1, which by
// convention belong to the crossing arcs).
inline SquareTiling square_tiling(const QuadGraph& g, const VertexMetric& metric) {
    if (metric.infinite) throw std::invalid_argument("square_tiling: crossing family is empty");
    SquareTiling t;
    t.width = metric.area;
    t.side = metric.rho;
    const auto ydist = detail::vertex_dijkstra(g, metric.rho, g.arcs[0]);
    std::vector<int> xs = g.arcs[3];
    xs.push_back(g.arcs[0].front()); // p1
    xs.push_back(g.arcs[2].back());  // p4
    const auto xdist = detail::vertex_dijkstra(g, metric.rho, xs);
    t.x.assign(g.n, 0.0);
    t.y.assign(g.n, 0.0);
    for (int v = 0; v < g.n; ++v) {
        t.y[v] = std::min(ydist[v], 1.0);
        t.x[v] = std::min(xdist[v], t.width);
    }
    return t;
}

inline SquareTiling square_tiling(const QuadGraph& g) {
    return square_tiling(g, discrete_extremal_length(g));
}

struct AxisRect {
    double x0, x1, y0, y1;
};

// Three axis-parallel rectangles with pairwise nonempty intersections share a
// common point; this is the check itself.
inline bool rect_triple_common_point(const AxisRect& a, const AxisRect& b, const AxisRect& c) {
    const double x0 = std::max({a.x0, b.x0, c.x0});
    const double x1 = std::min({a.x1, b.x1, c.x1});
    const double y0 = std::max({a.y0, b.y0, c.y0});
    const double y1 = std::min({a.y1, b.y1, c.y1});
    return x0 <= x1 && y0 <= y1;
}

struct TilingCheck {
    double area_defect = 0.0;     // |sum s^2 - width|
    double worst_overlap = 0.0;   // interior overlap depth between two squares
    double worst_contact = 0.0;   // largest gap on a graph edge
    std::pair<int, int> offending{-1, -1};
    bool ok(double area_tol = 1e-8, double geom_tol = 1e-7) const {
        return area_defect < area_tol && worst_overlap < geom_tol && worst_contact < geom_tol;
    }
};

inline TilingCheck check_tiling(const QuadGraph& g, const SquareTiling& t) {
    TilingCheck c;
    double area = 0.0;
    for (double s : t.side) area += s * s;
    c.area_defect = std::fabs(area - t.width);
    for (int a = 0; a < g.n; ++a)
        for (int b = a + 1; b < g.n; ++b) {
            if (t.side[a] == 0.0 || t.side[b] == 0.0) continue;
            const double ox = std::min(t.x[a], t.x[b]) - std::max(t.x[a] - t.side[a], t.x[b] - t.side[b]);
            const double oy = std::min(t.y[a], t.y[b]) - std::max(t.y[a] - t.side[a], t.y[b] - t.side[b]);
            if (ox > 0.0 && oy > 0.0) {
                const double depth = std::min(ox, oy);
                if (depth > c.worst_overlap) {
                    c.worst_overlap = depth;
                    c.offending = {a, b};
                }
            }
        }
    for (int a = 0; a < g.n; ++a)
        for (int b : g.adj[a]) {
            if (b <= a) continue;
            const double gx = std::max(t.x[a] - t.side[a], t.x[b] - t.side[b]) - std::min(t.x[a], t.x[b]);
            const double gy = std::max(t.y[a] - t.side[a], t.y[b] - t.side[b]) - std::min(t.y[a], t.y[b]);
            const double gap = std::max(gx, gy);
            if (gap > c.worst_contact) {
                c.worst_contact = gap;
                c.offending = {a, b};
            }
        }
    return c;
}

} // namespace slelab
