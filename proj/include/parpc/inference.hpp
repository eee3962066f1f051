#pragma once

#include "parpc/citest.hpp"
#include "parpc/error.hpp"
#include "parpc/executor.hpp"
#include "parpc/graph.hpp"
#include "parpc/skeleton.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <optional>
#include <span>
#include <vector>

namespace parpc {

struct PcSimpleResult {
    int target = 0;
    std::vector<int> members;
    std::vector<double> p_values;  // per member: largest p-value seen across its tests
    LevelStats stats;
};

namespace detail {

struct CandidateDecision {
    bool removed = false;
    double max_p = 0.0;
    std::size_t tests = 0;
};

template <CiTest Test>
CandidateDecision evaluate_candidate(int x, int target, std::span<const int> snapshot, const Test& test,
                                     double alpha, int level) {
    CandidateDecision d;
    std::vector<int> scratch;
    auto pool = without(snapshot, x);
    for_each_subset(pool, level, scratch, [&](std::span<const int> s) {
        ++d.tests;
        try {
            double pv = test(x, target, s).p_value;
            d.max_p = std::max(d.max_p, pv);
            if (pv > alpha) return d.removed = true;
        } catch (const DegenerateConditioning&) {
        }
        return false;
    });
    return d;
}

template <CiTest Test>
PcSimpleResult pc_simple_local(const Test& test, int target, const SkeletonConfig& cfg, ForkJoinPool& pool) {
    const int p = test.num_variables();
    PcSimpleResult res;
    res.target = target;
    std::vector<int> cand;
    for (int v = 0; v < p; ++v)
        if (v != target) cand.push_back(v);
    std::vector<double> max_p(p, 0.0);
    const CostModel model = test.cost_model();

    for (int level = 0; level < static_cast<int>(cand.size()); ++level) {
        if (cfg.max_level && level > *cfg.max_level) break;
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<int> snapshot = cand;
        std::vector<CandidateDecision> decisions(snapshot.size());

        const BatchPlan plan = plan_batches(snapshot.size(), cfg, estimate_task_cost(level, model));
        LevelStat stat{level, 0, 0, snapshot.size(), plan.batches.size(), plan.largest(), 0.0};
        for (auto b : plan.batches) {
            try {
                pool.run(b.end - b.begin, [&](Slice s) {
                    for (std::size_t k = b.begin + s.begin; k < b.begin + s.end; ++k)
                        decisions[k] = evaluate_candidate(snapshot[k], target, snapshot, test, cfg.alpha, level);
                });
            } catch (const std::exception& e) {
                throw LevelAborted(level, e.what());
            }
        }

        cand.clear();
        for (std::size_t k = 0; k < snapshot.size(); ++k) {
            const auto& d = decisions[k];
            stat.tests += d.tests;
            max_p[snapshot[k]] = std::max(max_p[snapshot[k]], d.max_p);
            if (d.removed)
                ++stat.removals;
            else
                cand.push_back(snapshot[k]);
        }
        stat.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        res.stats.levels.push_back(stat);
    }
    res.members = cand;
    for (int m : cand) res.p_values.push_back(max_p[m]);
    return res;
}

}  // namespace detail

struct PcSimpleOptions {
    /// Keep a member x only if `target` also survives the search run from x.
    /// Without it, a descendant of a child that shares a parent with that
    /// child can survive, since separating it needs a non-candidate.
    bool symmetric_check = true;
};

/// Local search for the parents and children of `target`. Candidates start as
/// every other variable; at level l each candidate is tested against all size-l
/// subsets of the other candidates from the level snapshot, and removals are
/// applied when the level ends.
template <CiTest Test>
PcSimpleResult pc_simple(const Test& test, int target, const SkeletonConfig& cfg, PcSimpleOptions opts = {}) {
    cfg.validate();
    const int p = test.num_variables();
    if (target < 0 || target >= p) throw InputError("target index " + std::to_string(target) + " out of range");
    ForkJoinPool pool(cfg.num_workers);
    PcSimpleResult res = detail::pc_simple_local(test, target, cfg, pool);
    if (!opts.symmetric_check) return res;

    PcSimpleResult kept{res.target, {}, {}, res.stats};
    for (std::size_t k = 0; k < res.members.size(); ++k) {
        const int x = res.members[k];
        PcSimpleResult back = detail::pc_simple_local(test, x, cfg, pool);
        for (const auto& l : back.stats.levels) kept.stats.levels.push_back(l);
        if (std::binary_search(back.members.begin(), back.members.end(), target)) {
            kept.members.push_back(x);
            kept.p_values.push_back(res.p_values[k]);
        }
    }
    return kept;
}

/// Local IDA enumeration: D plus every subset S of the siblings of x such that
/// orienting S into x forms no new collider at x. Subsets are listed by size,
/// then lexicographically; each returned set is sorted.
inline std::vector<std::vector<int>> admissible_parent_sets(const Cpdag& g, int x) {
    if (x < 0 || x >= g.p()) throw InputError("variable index " + std::to_string(x) + " out of range");
    const std::vector<int> certain = g.parents(x);
    const std::vector<int> sib = g.siblings(x);
    std::vector<std::vector<int>> out;
    std::vector<int> scratch;
    for (int k = 0; k <= static_cast<int>(sib.size()); ++k) {
        detail::for_each_subset(sib, k, scratch, [&](std::span<const int> s) {
            std::vector<int> cand(certain);
            cand.insert(cand.end(), s.begin(), s.end());
            std::sort(cand.begin(), cand.end());
            bool ok = true;
            for (int u : s) {
                for (int v : cand)
                    if (v != u && !g.adjacent(u, v)) {
                        ok = false;
                        break;
                    }
                if (!ok) break;
            }
            if (ok) out.push_back(std::move(cand));
            return false;
        });
    }
    return out;
}

struct EffectEntry {
    std::vector<int> parents;
    double effect = 0.0;

    bool operator==(const EffectEntry&) const = default;
};

struct EffectMultiset {
    int cause = 0;
    int outcome = 0;
    std::vector<EffectEntry> effects;
    std::vector<std::vector<int>> degenerate;  // parent sets whose regression was singular
};

/// Coefficient of `x` in the regression of `y` on {x} ∪ parents, from covariances.
/// Empty when the system is singular.
inline std::optional<double> regression_coefficient(const Eigen::MatrixXd& cov, int x, int y,
                                                    std::span<const int> parents) {
    const int m = static_cast<int>(parents.size()) + 1;
    std::vector<int> z{x};
    z.insert(z.end(), parents.begin(), parents.end());
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd b(m);
    for (int r = 0; r < m; ++r) {
        b(r) = cov(z[r], y);
        for (int c = 0; c < m; ++c) a(r, c) = cov(z[r], z[c]);
    }
    const double scale = a.diagonal().cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return std::nullopt;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        const auto& l = llt.matrixLLT();
        bool well_posed = true;
        for (int k = 0; k < m; ++k) well_posed = well_posed && l(k, k) * l(k, k) > 1e-12 * scale;
        if (well_posed) return llt.solve(b)(0);
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-10);
    if (cod.rank() < m) return std::nullopt;
    return cod.solve(b)(0);
}

/// Possible total effects of x on y, one per admissible parent set of x.
/// A set containing y yields effect 0.
inline EffectMultiset ida_effects(const Cpdag& g, const Eigen::MatrixXd& cov, int x, int y,
                                  std::size_t num_workers = 1) {
    const int p = g.p();
    if (x < 0 || x >= p || y < 0 || y >= p) throw InputError("IDA index out of range");
    if (x == y) throw InputError("IDA needs distinct cause and outcome");
    if (cov.rows() != p || cov.cols() != p) throw InputError("covariance dimension does not match the graph");

    const auto sets = admissible_parent_sets(g, x);
    std::vector<std::optional<double>> effect(sets.size());
    ForkJoinPool pool(num_workers);
    pool.run(sets.size(), [&](Slice s) {
        for (std::size_t k = s.begin; k < s.end; ++k) {
            const auto& pa = sets[k];
            if (std::binary_search(pa.begin(), pa.end(), y))
                effect[k] = 0.0;
            else
                effect[k] = regression_coefficient(cov, x, y, pa);
        }
    });

    EffectMultiset out{x, y, {}, {}};
    for (std::size_t k = 0; k < sets.size(); ++k) {
        if (effect[k])
            out.effects.push_back({sets[k], *effect[k]});
        else
            out.degenerate.push_back(sets[k]);
    }
    return out;
}

}  // namespace parpc
