#pragma once

#include "parpc/parpc.hpp"

#include <memory>
#include <random>

namespace fixtures {

struct GaussianCase {
    parpc::WeightedDag truth;
    std::shared_ptr<const parpc::GaussianSuffStat> stat;
};

inline GaussianCase gaussian_case(int p, int n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto truth = parpc::random_weighted_dag(p, density, rng);
    auto data = parpc::linear_sem_sample(truth.dag, truth.weights, n, seed * 7919 + 1);
    return {truth, std::make_shared<const parpc::GaussianSuffStat>(parpc::gaussian_suffstat(data))};
}

inline std::shared_ptr<const parpc::DiscreteSuffStat> binary_case(int p, int n, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto truth = parpc::random_weighted_dag(p, density, rng);
    auto data = parpc::binary_sem_sample(truth.dag, truth.weights, n, seed * 104729 + 3);
    return std::make_shared<const parpc::DiscreteSuffStat>(parpc::discrete_suffstat(data));
}

/// Correlation statistic of `stat` with variables relabelled: new k is old order[k].
inline parpc::GaussianSuffStat permute(const parpc::GaussianSuffStat& stat, const std::vector<int>& order) {
    const int p = stat.p();
    parpc::GaussianSuffStat out{Eigen::MatrixXd(p, p), stat.n};
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) out.corr(a, b) = stat.corr(order[a], order[b]);
    return out;
}

/// Relabel a CPDAG from permuted indices back to the original ones.
inline parpc::Cpdag unpermute(const parpc::Cpdag& g, const std::vector<int>& order) {
    parpc::Cpdag out(g.p());
    for (int a = 0; a < g.p(); ++a)
        for (int b = 0; b < g.p(); ++b) {
            if (a < b && g.undirected(a, b)) out.set_undirected(order[a], order[b]);
            if (g.directed(a, b)) out.orient(order[a], order[b]);
        }
    return out;
}

/// Discrete statistic with columns (x, y) filled from a 2-D count table.
inline parpc::DiscreteSuffStat from_table(const std::vector<std::vector<int>>& table) {
    std::vector<std::pair<int, int>> rows;
    for (int x = 0; x < static_cast<int>(table.size()); ++x)
        for (int y = 0; y < static_cast<int>(table[x].size()); ++y)
            for (int c = 0; c < table[x][y]; ++c) rows.emplace_back(x, y);
    parpc::DiscreteSuffStat s;
    s.codes.resize(rows.size(), 2);
    for (std::size_t r = 0; r < rows.size(); ++r) s.codes(r, 0) = rows[r].first, s.codes(r, 1) = rows[r].second;
    s.arities = {static_cast<int>(table.size()), static_cast<int>(table[0].size())};
    return s;
}

}  // namespace fixtures
