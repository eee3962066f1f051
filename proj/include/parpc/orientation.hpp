#pragma once

#include "parpc/error.hpp"
#include "parpc/graph.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace parpc {

/// Orients i -> k <- j for every unshielded triple i - k - j whose middle node
/// is outside sepset(i, j). Triples are scanned in ascending (i, k, j) order
/// with i < j; a later triple overwrites an earlier orientation of the same edge.
inline Cpdag orient_v_structures(const SkeletonGraph& skel, const SepsetMap& seps) {
    const int p = skel.p();
    for (const auto& [pair, set] : seps.entries()) {
        if (pair.first >= p || pair.second >= p) throw InputError("sepset refers to a variable outside the graph");
        if (skel.adjacent(pair.first, pair.second))
            throw InputError("sepset recorded for present edge " + std::to_string(pair.first) + "-" +
                             std::to_string(pair.second));
    }
    Cpdag g = Cpdag::from_skeleton(skel);
    for (int i = 0; i < p; ++i) {
        for (int k : skel.neighbors(i)) {
            for (int j : skel.neighbors(k)) {
                if (j <= i || skel.adjacent(i, j)) continue;
                const auto* s = seps.find(i, j);
                if (!s)
                    throw InputError("no sepset for non-adjacent pair " + std::to_string(i) + "," + std::to_string(j));
                if (std::find(s->begin(), s->end(), k) != s->end()) continue;
                g.orient(i, k);
                g.orient(j, k);
            }
        }
    }
    return g;
}

namespace detail {

// Each rule tries to orient the undirected edge x - y as x -> y.

inline bool meek_r1(const Cpdag& g, int x, int y) {
    for (int a = 0; a < g.p(); ++a)
        if (a != y && g.directed(a, x) && !g.adjacent(a, y)) return true;
    return false;
}

inline bool meek_r2(const Cpdag& g, int x, int y) {
    for (int z = 0; z < g.p(); ++z)
        if (g.directed(x, z) && g.directed(z, y)) return true;
    return false;
}

inline bool meek_r3(const Cpdag& g, int x, int y) {
    const int p = g.p();
    for (int c = 0; c < p; ++c) {
        if (c == y || !g.undirected(x, c) || !g.directed(c, y)) continue;
        for (int d = c + 1; d < p; ++d)
            if (d != y && g.undirected(x, d) && g.directed(d, y) && !g.adjacent(c, d)) return true;
    }
    return false;
}

// x - c -> d -> y, x adjacent to d, c and y non-adjacent.
inline bool meek_r4(const Cpdag& g, int x, int y) {
    const int p = g.p();
    for (int c = 0; c < p; ++c) {
        if (c == y || !g.undirected(x, c) || g.adjacent(c, y)) continue;
        for (int d = 0; d < p; ++d)
            if (d != x && g.directed(c, d) && g.directed(d, y) && g.adjacent(x, d)) return true;
    }
    return false;
}

}  // namespace detail

/// Applies Meek's four rules until no undirected edge changes. Pairs are
/// scanned in ascending (x, y) order and orientations take effect immediately.
inline Cpdag meek_closure(Cpdag g) {
    const int p = g.p();
    using Rule = bool (*)(const Cpdag&, int, int);
    const Rule rules[] = {detail::meek_r1, detail::meek_r2, detail::meek_r3, detail::meek_r4};
    bool changed = true;
    while (changed) {
        changed = false;
        for (Rule rule : rules) {
            for (int x = 0; x < p; ++x)
                for (int y = 0; y < p; ++y) {
                    if (x == y || !g.undirected(x, y)) continue;
                    if (rule(g, x, y)) {
                        g.orient(x, y);
                        changed = true;
                    }
                }
        }
    }
    return g;
}

/// A separating set for each non-adjacent pair: the parents of whichever
/// endpoint is not an ancestor of the other.
inline SepsetMap dag_sepsets(const Dag& d) {
    const int p = d.p();
    std::vector<std::vector<char>> desc(p, std::vector<char>(p, 0));
    const auto& order = d.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        for (int c : d.children(*it)) {
            desc[*it][c] = 1;
            for (int v = 0; v < p; ++v)
                if (desc[c][v]) desc[*it][v] = 1;
        }
    SkeletonGraph skel = d.skeleton();
    SepsetMap seps;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) {
            if (skel.adjacent(i, j)) continue;
            seps.set(i, j, desc[i][j] ? d.parents(j) : d.parents(i));
        }
    return seps;
}

inline Cpdag cpdag_from_dag(const Dag& d) { return meek_closure(orient_v_structures(d.skeleton(), dag_sepsets(d))); }

}  // namespace parpc
