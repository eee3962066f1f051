#pragma once

#include "parpc/error.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parpc {

/// Symmetric adjacency over p variables, stored as one bit row per variable.
class SkeletonGraph {
public:
    explicit SkeletonGraph(int p = 0) : p_(p), words_((p + 63) / 64), bits_(static_cast<std::size_t>(p) * words_, 0) {}

    int p() const noexcept { return p_; }

    bool adjacent(int i, int j) const noexcept {
        return (bits_[row(i) + (j >> 6)] >> (j & 63)) & 1u;
    }

    void add_edge(int i, int j) {
        check(i), check(j);
        if (i == j) throw InputError("self-loop on variable " + std::to_string(i));
        set(i, j, true), set(j, i, true);
    }

    void remove_edge(int i, int j) {
        check(i), check(j);
        set(i, j, false), set(j, i, false);
    }

    std::vector<int> neighbors(int v) const {
        check(v);
        std::vector<int> out;
        for (int w = 0; w < words_; ++w) {
            std::uint64_t word = bits_[row(v) + w];
            while (word) {
                int b = __builtin_ctzll(word);
                out.push_back(w * 64 + b);
                word &= word - 1;
            }
        }
        return out;
    }

    int degree(int v) const {
        check(v);
        int d = 0;
        for (int w = 0; w < words_; ++w) d += __builtin_popcountll(bits_[row(v) + w]);
        return d;
    }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (auto word : bits_) twice += static_cast<std::size_t>(__builtin_popcountll(word));
        return twice / 2;
    }

    /// Edges as (i, j) with i < j, ascending.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < p_; ++i)
            for (int j : neighbors(i))
                if (i < j) out.emplace_back(i, j);
        return out;
    }

    /// Walks both triangles; true iff adj is symmetric with an empty diagonal.
    bool audit() const {
        for (int i = 0; i < p_; ++i) {
            if (adjacent(i, i)) return false;
            for (int j = i + 1; j < p_; ++j)
                if (adjacent(i, j) != adjacent(j, i)) return false;
        }
        return true;
    }

    bool operator==(const SkeletonGraph&) const = default;

private:
    std::size_t row(int i) const noexcept { return static_cast<std::size_t>(i) * words_; }

    void check(int v) const {
        if (v < 0 || v >= p_) throw InputError("variable index " + std::to_string(v) + " out of range [0, " +
                                               std::to_string(p_) + ")");
    }

    void set(int i, int j, bool on) {
        auto& word = bits_[row(i) + (j >> 6)];
        std::uint64_t mask = std::uint64_t{1} << (j & 63);
        word = on ? (word | mask) : (word & ~mask);
    }

    int p_;
    int words_;
    std::vector<std::uint64_t> bits_;
};

inline SkeletonGraph complete_graph(int p) {
    if (p < 2) throw InputError("complete graph needs p >= 2, got " + std::to_string(p));
    SkeletonGraph g(p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) g.add_edge(i, j);
    return g;
}

inline std::vector<int> neighbors(const SkeletonGraph& g, int v) { return g.neighbors(v); }

/// Mark at the column endpoint: mark(i, j) is the symbol drawn at j on the edge i-j.
enum class EdgeMark : std::uint8_t { None, Tail, Arrow };

class Cpdag {
public:
    explicit Cpdag(int p = 0) : p_(p), marks_(static_cast<std::size_t>(p) * p, EdgeMark::None) {}

    static Cpdag from_skeleton(const SkeletonGraph& g) {
        Cpdag c(g.p());
        for (auto [i, j] : g.edges()) c.set_undirected(i, j);
        return c;
    }

    int p() const noexcept { return p_; }

    EdgeMark mark(int i, int j) const noexcept { return marks_[idx(i, j)]; }

    bool adjacent(int i, int j) const noexcept { return mark(i, j) != EdgeMark::None; }
    bool undirected(int i, int j) const noexcept {
        return mark(i, j) == EdgeMark::Tail && mark(j, i) == EdgeMark::Tail;
    }
    /// i -> j
    bool directed(int i, int j) const noexcept {
        return mark(i, j) == EdgeMark::Arrow && mark(j, i) == EdgeMark::Tail;
    }

    void set_undirected(int i, int j) {
        marks_[idx(i, j)] = EdgeMark::Tail;
        marks_[idx(j, i)] = EdgeMark::Tail;
    }
    /// Orient i -> j, overwriting whatever marks the edge had.
    void orient(int i, int j) {
        marks_[idx(i, j)] = EdgeMark::Arrow;
        marks_[idx(j, i)] = EdgeMark::Tail;
    }
    void remove(int i, int j) {
        marks_[idx(i, j)] = EdgeMark::None;
        marks_[idx(j, i)] = EdgeMark::None;
    }

    SkeletonGraph skeleton() const {
        SkeletonGraph g(p_);
        for (int i = 0; i < p_; ++i)
            for (int j = i + 1; j < p_; ++j)
                if (adjacent(i, j)) g.add_edge(i, j);
        return g;
    }

    std::vector<int> parents(int v) const {
        std::vector<int> out;
        for (int u = 0; u < p_; ++u)
            if (directed(u, v)) out.push_back(u);
        return out;
    }
    std::vector<int> siblings(int v) const {
        std::vector<int> out;
        for (int u = 0; u < p_; ++u)
            if (u != v && undirected(u, v)) out.push_back(u);
        return out;
    }

    /// Kahn's algorithm over the directed edges only.
    bool directed_part_acyclic() const {
        std::vector<int> indeg(p_, 0);
        for (int u = 0; u < p_; ++u)
            for (int v = 0; v < p_; ++v)
                if (directed(u, v)) ++indeg[v];
        std::vector<int> stack;
        for (int v = 0; v < p_; ++v)
            if (!indeg[v]) stack.push_back(v);
        int seen = 0;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            ++seen;
            for (int v = 0; v < p_; ++v)
                if (directed(u, v) && --indeg[v] == 0) stack.push_back(v);
        }
        return seen == p_;
    }

    bool has_bidirected() const {
        for (int i = 0; i < p_; ++i)
            for (int j = i + 1; j < p_; ++j)
                if (mark(i, j) == EdgeMark::Arrow && mark(j, i) == EdgeMark::Arrow) return true;
        return false;
    }

    bool operator==(const Cpdag&) const = default;

private:
    std::size_t idx(int i, int j) const noexcept { return static_cast<std::size_t>(i) * p_ + j; }

    int p_;
    std::vector<EdgeMark> marks_;
};

/// Separating sets keyed by unordered pair, stored with the smaller index first.
class SepsetMap {
public:
    void set(int i, int j, std::vector<int> s) {
        if (i == j) throw InputError("sepset for a self pair");
        for (int k : s)
            if (k == i || k == j) throw InputError("sepset contains an endpoint of its own pair");
        entries_[key(i, j)] = std::move(s);
    }

    const std::vector<int>* find(int i, int j) const {
        auto it = entries_.find(key(i, j));
        return it == entries_.end() ? nullptr : &it->second;
    }

    bool contains(int i, int j) const { return find(i, j) != nullptr; }
    std::size_t size() const noexcept { return entries_.size(); }

    const std::map<std::pair<int, int>, std::vector<int>>& entries() const noexcept { return entries_; }

    bool operator==(const SepsetMap&) const = default;

private:
    static std::pair<int, int> key(int i, int j) { return i < j ? std::pair{i, j} : std::pair{j, i}; }

    std::map<std::pair<int, int>, std::vector<int>> entries_;
};

class Dag {
public:
    Dag() = default;

    /// parents[v] lists the parents of v; sorted and validated for acyclicity.
    explicit Dag(std::vector<std::vector<int>> parents) : parents_(std::move(parents)) {
        const int p = static_cast<int>(parents_.size());
        children_.assign(p, {});
        for (int v = 0; v < p; ++v) {
            auto& pa = parents_[v];
            std::sort(pa.begin(), pa.end());
            if (std::adjacent_find(pa.begin(), pa.end()) != pa.end())
                throw InputError("duplicate parent of variable " + std::to_string(v));
            for (int u : pa) {
                if (u < 0 || u >= p) throw InputError("parent index " + std::to_string(u) + " out of range");
                if (u == v) throw InputError("variable " + std::to_string(v) + " is its own parent");
                children_[u].push_back(v);
            }
        }
        order_ = compute_order();
        if (static_cast<int>(order_.size()) != p) throw InputError("graph contains a directed cycle");
    }

    static Dag from_edges(int p, const std::vector<std::pair<int, int>>& edges) {
        std::vector<std::vector<int>> pa(p);
        for (auto [u, v] : edges) {
            if (v < 0 || v >= p) throw InputError("edge endpoint out of range");
            pa[v].push_back(u);
        }
        return Dag(std::move(pa));
    }

    int p() const noexcept { return static_cast<int>(parents_.size()); }
    const std::vector<int>& parents(int v) const { return parents_.at(v); }
    const std::vector<int>& children(int v) const { return children_.at(v); }
    const std::vector<int>& topological_order() const noexcept { return order_; }

    bool has_edge(int u, int v) const {
        const auto& pa = parents_.at(v);
        return std::binary_search(pa.begin(), pa.end(), u);
    }

    /// Edges (u, v) meaning u -> v, ascending by (u, v).
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int v = 0; v < p(); ++v)
            for (int u : parents_[v]) out.emplace_back(u, v);
        std::sort(out.begin(), out.end());
        return out;
    }

    SkeletonGraph skeleton() const {
        SkeletonGraph g(p());
        for (auto [u, v] : edges()) g.add_edge(u, v);
        return g;
    }

    bool operator==(const Dag& o) const { return parents_ == o.parents_; }

private:
    std::vector<int> compute_order() const {
        const int p = static_cast<int>(parents_.size());
        std::vector<int> indeg(p);
        for (int v = 0; v < p; ++v) indeg[v] = static_cast<int>(parents_[v].size());
        std::vector<int> ready, order;
        for (int v = p - 1; v >= 0; --v)
            if (!indeg[v]) ready.push_back(v);
        while (!ready.empty()) {
            int u = ready.back();
            ready.pop_back();
            order.push_back(u);
            for (int c : children_[u])
                if (--indeg[c] == 0) ready.push_back(c);
        }
        return order;
    }

    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::vector<int> order_;
};

/// d-separation via the moralized ancestral graph of {i, j} ∪ s with s removed.
inline bool d_separated(const Dag& dag, int i, int j, std::span<const int> s) {
    const int p = dag.p();
    auto check = [p](int v) {
        if (v < 0 || v >= p) throw InputError("variable index " + std::to_string(v) + " out of range");
    };
    check(i), check(j);
    if (i == j) throw InputError("d-separation query needs distinct endpoints");
    std::vector<char> in_s(p, 0);
    for (int k : s) {
        check(k);
        if (k == i || k == j) throw InputError("conditioning set overlaps the query endpoints");
        in_s[k] = 1;
    }

    std::vector<char> anc(p, 0);
    std::vector<int> stack{i, j};
    stack.insert(stack.end(), s.begin(), s.end());
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (anc[v]) continue;
        anc[v] = 1;
        for (int u : dag.parents(v))
            if (!anc[u]) stack.push_back(u);
    }

    std::vector<std::vector<int>> moral(p);
    for (int v = 0; v < p; ++v) {
        if (!anc[v]) continue;
        const auto& pa = dag.parents(v);
        for (std::size_t a = 0; a < pa.size(); ++a) {
            moral[v].push_back(pa[a]);
            moral[pa[a]].push_back(v);
            for (std::size_t b = a + 1; b < pa.size(); ++b) {
                moral[pa[a]].push_back(pa[b]);
                moral[pa[b]].push_back(pa[a]);
            }
        }
    }

    std::vector<char> seen(p, 0);
    stack.assign(1, i);
    seen[i] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (v == j) return false;
        for (int w : moral[v]) {
            if (seen[w] || in_s[w]) continue;
            seen[w] = 1;
            stack.push_back(w);
        }
    }
    return true;
}

inline bool d_separated(const Dag& dag, int i, int j, std::initializer_list<int> s) {
    return d_separated(dag, i, j, std::span<const int>(s.begin(), s.size()));
}

}  // namespace parpc
