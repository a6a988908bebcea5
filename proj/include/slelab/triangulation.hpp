// Combinatorial nerves: oriented triangulations of a disc (or sphere), with
// derived flowers (cyclic neighbor lists) and validation.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

namespace slelab {

struct Flower {
    int center = -1;
    std::vector<int> petals; // cyclic for interior vertices, a chain on the boundary
    bool closed = false;
};

struct Triangulation {
    int n = 0;
    std::vector<std::array<int, 3>> faces; // counterclockwise vertex triples
    std::vector<int> boundary;             // boundary cycle (empty for a sphere)

    // derived by validate()
    std::vector<Flower> flowers;
    std::vector<bool> on_boundary;
    std::vector<std::pair<int, int>> edges;

    int degree(int v) const { return int(flowers[v].petals.size()); }

    void validate();
};

inline void Triangulation::validate() {
    if (n <= 0) throw std::invalid_argument("triangulation: no vertices");
    std::map<std::pair<int, int>, int> directed; // (a,b) -> opposite vertex
    for (const auto& f : faces) {
        const int a = f[0], b = f[1], c = f[2];
        if (a == b || b == c || a == c) throw std::invalid_argument("triangulation: degenerate face");
        if (a < 0 || b < 0 || c < 0 || a >= n || b >= n || c >= n)
            throw std::invalid_argument("triangulation: vertex index out of range");
        for (auto [u, v, w] : {std::array<int, 3>{a, b, c}, {b, c, a}, {c, a, b}}) {
            if (!directed.emplace(std::make_pair(u, v), w).second)
                throw std::invalid_argument("triangulation: edge with two coherently oriented faces");
        }
    }

    std::set<std::pair<int, int>> undirected;
    std::vector<std::pair<int, int>> boundary_directed;
    for (const auto& [e, w] : directed) {
        auto [a, b] = e;
        undirected.insert({std::min(a, b), std::max(a, b)});
        if (!directed.count({b, a})) boundary_directed.push_back({b, a});
    }
    edges.assign(undirected.begin(), undirected.end());

    const std::size_t E = undirected.size();
    const std::size_t F = faces.size();
    if (boundary_directed.empty()) {
        if (int(E) != int(F) * 3 / 2 || n - int(E) + int(F) != 2)
            throw std::invalid_argument("triangulation: sphere Euler relation violated");
        if (!boundary.empty()) throw std::invalid_argument("triangulation: closed complex with boundary list");
    } else {
        // disc type: V - E + F = 1
        if (n - int(E) + int(F) != 1)
            throw std::invalid_argument("triangulation: Euler relation violated (holes or disconnection)");
        // walk the boundary cycle; boundary_directed edges run with the domain on the left
        std::map<int, int> next;
        for (auto [a, b] : boundary_directed) {
            if (!next.emplace(a, b).second) throw std::invalid_argument("triangulation: boundary not simple");
        }
        std::vector<int> cycle;
        int start = boundary_directed.front().first;
        int v = start;
        do {
            cycle.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) throw std::invalid_argument("triangulation: boundary walk broke");
            v = it->second;
        } while (v != start && cycle.size() <= next.size());
        if (cycle.size() != next.size()) throw std::invalid_argument("triangulation: boundary has several cycles");
        if (!boundary.empty()) {
            // accept any rotation of the given cycle, either direction
            if (boundary.size() != cycle.size())
                throw std::invalid_argument("triangulation: boundary list size mismatch");
        }
        boundary = cycle;
    }

    on_boundary.assign(n, false);
    for (int v : boundary) on_boundary[v] = true;

    // flowers: around v the face (v,a,b) makes b the ccw successor of a
    std::vector<std::map<int, int>> succ(n);
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k) {
            const int v = f[k], a = f[(k + 1) % 3], b = f[(k + 2) % 3];
            succ[v][a] = b;
        }
    }
    flowers.assign(n, Flower{});
    for (int v = 0; v < n; ++v) {
        flowers[v].center = v;
        auto& m = succ[v];
        if (m.empty()) throw std::invalid_argument("triangulation: isolated vertex");
        int start = m.begin()->first;
        if (on_boundary[v]) {
            // start from the petal with no predecessor
            std::set<int> has_pred;
            for (auto [a, b] : m) has_pred.insert(b);
            for (auto [a, b] : m)
                if (!has_pred.count(a)) start = a;
        }
        std::vector<int> petals{start};
        int cur = start;
        while (true) {
            auto it = m.find(cur);
            if (it == m.end()) break;
            cur = it->second;
            if (cur == start) break;
            petals.push_back(cur);
            if (petals.size() > m.size() + 1)
                throw std::invalid_argument("triangulation: flower does not close into a single fan");
        }
        flowers[v].petals = petals;
        flowers[v].closed = !on_boundary[v];
        if (flowers[v].closed) {
            if (petals.size() != m.size())
                throw std::invalid_argument("triangulation: interior flower is not a single cycle");
            if (petals.size() < 3)
                throw std::invalid_argument("triangulation: interior vertex of degree < 3");
        }
    }
}

// One interior vertex (index 0) surrounded by k boundary petals.
inline Triangulation make_wheel(int k) {
    Triangulation t;
    t.n = k + 1;
    for (int i = 0; i < k; ++i) t.faces.push_back({0, 1 + i, 1 + (i + 1) % k});
    t.validate();
    return t;
}

// Hexagonal patch of combinatorial radius m (axial coordinates |i|,|j|,|i+j| <= m).
inline Triangulation make_hex_patch(int m) {
    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> sites;
    for (int i = -m; i <= m; ++i)
        for (int j = -m; j <= m; ++j)
            if (std::abs(i + j) <= m) {
                id[{i, j}] = int(sites.size());
                sites.push_back({i, j});
            }
    Triangulation t;
    t.n = int(sites.size());
    auto has = [&](int i, int j) { return id.count({i, j}) != 0; };
    for (auto [i, j] : sites) {
        if (has(i + 1, j) && has(i, j + 1)) t.faces.push_back({id[{i, j}], id[{i + 1, j}], id[{i, j + 1}]});
        if (has(i, j + 1) && has(i - 1, j + 1)) t.faces.push_back({id[{i, j}], id[{i, j + 1}], id[{i - 1, j + 1}]});
    }
    t.validate();
    return t;
}

} // namespace slelab
