#pragma once

#include "parpc/citest.hpp"
#include "parpc/error.hpp"
#include "parpc/executor.hpp"
#include "parpc/graph.hpp"
#include "parpc/memory.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace parpc {

struct SkeletonConfig {
    double alpha = 0.01;
    std::optional<int> max_level;
    std::size_t num_workers = 1;
    bool mem_efficient = false;
    std::optional<std::uint64_t> mem_budget_bytes;
    bool mem_auto_probe = false;
    /// Forces every batch to this many tasks regardless of mem_efficient.
    std::optional<std::size_t> forced_batch_size;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
        if (num_workers < 1) throw InputError("num_workers must be at least 1");
        if (max_level && *max_level < 0) throw InputError("max_level must be non-negative");
        if (mem_budget_bytes && *mem_budget_bytes == 0) throw InputError("memory budget must be positive");
        if (forced_batch_size && *forced_batch_size == 0) throw InputError("forced batch size must be positive");
    }
};

/// One edge's work for a level. Neighbour lists view the level snapshot.
struct EdgeTask {
    int i = 0;
    int j = 0;
    std::span<const int> neighbors_i;
    std::span<const int> neighbors_j;
};

struct EdgeDecision {
    int i = 0;
    int j = 0;
    bool removed = false;
    std::vector<int> sepset;
    std::size_t tests_performed = 0;

    bool operator==(const EdgeDecision&) const = default;
};

/// Contiguous chunks of a level's task list, executed one after another.
struct BatchPlan {
    std::vector<Slice> batches;

    std::size_t largest() const {
        std::size_t m = 0;
        for (auto b : batches) m = std::max(m, b.end - b.begin);
        return m;
    }
};

struct LevelStat {
    int level = 0;
    std::size_t tests = 0;
    std::size_t removals = 0;
    std::size_t tasks = 0;
    std::size_t batches = 0;
    std::size_t max_batch = 0;
    double wall_ms = 0.0;
};

struct LevelStats {
    std::vector<LevelStat> levels;

    std::size_t peak_tasks_in_flight() const {
        std::size_t m = 0;
        for (const auto& l : levels) m = std::max(m, l.max_batch);
        return m;
    }
    std::size_t total_tests() const {
        std::size_t t = 0;
        for (const auto& l : levels) t += l.tests;
        return t;
    }
};

struct SkeletonResult {
    SkeletonGraph graph;
    SepsetMap sepsets;
    LevelStats stats;
};

// Per-task memory model (bytes). Measured once on the Gaussian path: the
// correlation submatrix, its factor and inverse, plus the task's decision and
// candidate scratch; the discrete path is dominated by the contingency counts.
inline constexpr std::uint64_t kTaskCostBase = 1024;
inline constexpr std::uint64_t kGaussianCostPerCell = 256;
inline constexpr std::uint64_t kDiscreteCostPerStratum = 16;
inline constexpr std::uint64_t kDiscreteStrataCap = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kDefaultMemBudget = std::uint64_t{512} << 20;

inline std::uint64_t estimate_task_cost(int level, const CostModel& model) {
    const auto l = static_cast<std::uint64_t>(std::max(level, 0));
    if (model.kind == SuffKind::Gaussian) return kTaskCostBase + kGaussianCostPerCell * (l + 2) * (l + 2);
    std::uint64_t strata = 1;
    for (std::uint64_t k = 0; k < l; ++k) {
        // beyond the known variables, reuse the smallest arity
        std::uint64_t a = model.arities_desc.empty()
                              ? 2
                              : static_cast<std::uint64_t>(
                                    model.arities_desc[std::min<std::size_t>(k, model.arities_desc.size() - 1)]);
        strata = std::min(kDiscreteStrataCap, strata * std::max<std::uint64_t>(a, 1));
    }
    return kTaskCostBase + kDiscreteCostPerStratum * strata;
}

inline std::uint64_t resolve_mem_budget(const SkeletonConfig& cfg) {
    if (cfg.mem_budget_bytes) return *cfg.mem_budget_bytes;
    if (cfg.mem_auto_probe)
        if (auto avail = probe_available_memory()) return *avail;
    return kDefaultMemBudget;
}

/// Partition `task_count` tasks into contiguous batches. Unbatched unless
/// mem_efficient is on (or a batch size is forced).
inline BatchPlan plan_batches(std::size_t task_count, const SkeletonConfig& cfg, std::uint64_t per_task_cost) {
    BatchPlan plan;
    if (task_count == 0) return plan;
    std::size_t size = task_count;
    if (cfg.forced_batch_size) {
        size = std::min(*cfg.forced_batch_size, task_count);
    } else if (cfg.mem_efficient) {
        const std::uint64_t workers = std::max<std::size_t>(cfg.num_workers, 1);
        const std::uint64_t cost = std::max<std::uint64_t>(per_task_cost, 1);
        std::uint64_t per_worker = resolve_mem_budget(cfg) / (cost * workers);
        per_worker = std::clamp<std::uint64_t>(per_worker, 1, task_count);
        size = static_cast<std::size_t>(std::min<std::uint64_t>(per_worker * workers, task_count));
    }
    for (std::size_t at = 0; at < task_count; at += size) plan.batches.push_back({at, std::min(at + size, task_count)});
    return plan;
}

template <class Task>
BatchPlan plan_batches(std::span<const Task> tasks, const SkeletonConfig& cfg, std::uint64_t per_task_cost) {
    return plan_batches(tasks.size(), cfg, per_task_cost);
}

namespace detail {

/// Advance `idx` (strictly increasing indices into a pool of size n) to the
/// next lexicographic combination. False when exhausted.
inline bool next_combination(std::vector<int>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    int pos = k - 1;
    while (pos >= 0 && idx[pos] == n - k + pos) --pos;
    if (pos < 0) return false;
    ++idx[pos];
    for (int q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
    return true;
}

/// Calls visit(subset) for each size-k subset of pool in lexicographic order
/// until visit returns true. Returns whether it stopped early.
template <class Visit>
bool for_each_subset(std::span<const int> pool, int k, std::vector<int>& scratch, Visit&& visit) {
    const int n = static_cast<int>(pool.size());
    if (k > n) return false;
    std::vector<int> idx(k);
    for (int q = 0; q < k; ++q) idx[q] = q;
    scratch.resize(k);
    do {
        for (int q = 0; q < k; ++q) scratch[q] = pool[idx[q]];
        if (visit(std::span<const int>(scratch))) return true;
    } while (next_combination(idx, n));
    return false;
}

inline std::vector<int> without(std::span<const int> list, int drop) {
    std::vector<int> out;
    out.reserve(list.size());
    for (int v : list)
        if (v != drop) out.push_back(v);
    return out;
}

}  // namespace detail

/// Runs every CI test of one edge at `level`: subsets of the i side first,
/// then subsets of the j side not already covered by the i side.
template <CiTest Test>
EdgeDecision evaluate_edge(const EdgeTask& task, const SkeletonGraph& snapshot, const Test& test, double alpha,
                           int level) {
    EdgeDecision d{task.i, task.j, false, {}, 0};
    std::vector<int> scratch;
    auto try_set = [&](std::span<const int> s) {
        ++d.tests_performed;
        try {
            if (test(task.i, task.j, s).p_value > alpha) {
                d.removed = true;
                d.sepset.assign(s.begin(), s.end());
                return true;
            }
        } catch (const DegenerateConditioning&) {
            // numerically singular: treat as dependence for this set
        }
        return false;
    };

    auto side_i = detail::without(task.neighbors_i, task.j);
    if (detail::for_each_subset(side_i, level, scratch, try_set)) return d;
    if (level == 0) return d;

    auto side_j = detail::without(task.neighbors_j, task.i);
    detail::for_each_subset(side_j, level, scratch, [&](std::span<const int> s) {
        bool covered = std::all_of(s.begin(), s.end(), [&](int k) { return snapshot.adjacent(task.i, k); });
        return covered ? false : try_set(s);
    });
    return d;
}

/// Evaluates a batch of tasks from one level snapshot on `pool`. Decisions come
/// back in task order and do not depend on how the slices were scheduled.
template <CiTest Test>
std::vector<EdgeDecision> run_level_parallel(std::span<const EdgeTask> tasks, const SkeletonGraph& snapshot,
                                             const Test& test, double alpha, int level, ForkJoinPool& pool) {
    std::vector<EdgeDecision> out(tasks.size());
    if (tasks.empty()) return out;
    try {
        pool.run(tasks.size(), [&](Slice s) {
            for (std::size_t k = s.begin; k < s.end; ++k) out[k] = evaluate_edge(tasks[k], snapshot, test, alpha, level);
        });
    } catch (const std::exception& e) {
        throw LevelAborted(level, e.what());
    }
    return out;
}

template <CiTest Test>
std::vector<EdgeDecision> run_level_parallel(std::span<const EdgeTask> tasks, const SkeletonGraph& snapshot,
                                             const Test& test, double alpha, int level, const SkeletonConfig& cfg) {
    if (tasks.empty()) return {};
    ForkJoinPool pool(cfg.num_workers);
    return run_level_parallel(tasks, snapshot, test, alpha, level, pool);
}

/// Order-independent skeleton search. Each level tests every surviving edge
/// against the snapshot taken at level start; removals are applied together
/// once the level finishes.
template <CiTest Test>
SkeletonResult skeleton_stable(const Test& test, int p, const SkeletonConfig& cfg) {
    cfg.validate();
    if (test.num_variables() != p)
        throw InputError("test covers " + std::to_string(test.num_variables()) + " variables, expected " +
                         std::to_string(p));
    SkeletonResult res{complete_graph(p), {}, {}};
    const CostModel model = test.cost_model();
    ForkJoinPool pool(cfg.num_workers);

    for (int level = 0;; ++level) {
        if (cfg.max_level && level > *cfg.max_level) break;
        const auto t0 = std::chrono::steady_clock::now();

        const SkeletonGraph snapshot = res.graph;
        std::vector<std::vector<int>> nbrs(p);
        for (int v = 0; v < p; ++v) nbrs[v] = snapshot.neighbors(v);

        std::vector<EdgeTask> tasks;
        for (int i = 0; i < p; ++i)
            for (int j : nbrs[i]) {
                if (j <= i) continue;
                const int room = static_cast<int>(std::max(nbrs[i].size(), nbrs[j].size())) - 1;
                if (room >= level) tasks.push_back({i, j, nbrs[i], nbrs[j]});
            }
        if (tasks.empty()) break;

        const BatchPlan plan = plan_batches(tasks.size(), cfg, estimate_task_cost(level, model));
        LevelStat stat{level, 0, 0, tasks.size(), plan.batches.size(), plan.largest(), 0.0};
        std::vector<EdgeDecision> decisions;
        decisions.reserve(tasks.size());
        for (auto b : plan.batches) {
            auto part = run_level_parallel(std::span<const EdgeTask>(tasks).subspan(b.begin, b.end - b.begin),
                                           snapshot, test, cfg.alpha, level, pool);
            for (auto& d : part) decisions.push_back(std::move(d));
        }

        for (auto& d : decisions) {
            stat.tests += d.tests_performed;
            if (!d.removed) continue;
            ++stat.removals;
            res.graph.remove_edge(d.i, d.j);
            res.sepsets.set(d.i, d.j, std::move(d.sepset));
        }
        stat.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        res.stats.levels.push_back(stat);
    }
    return res;
}

}  // namespace parpc
