#pragma once

#include "parpc/data.hpp"
#include "parpc/error.hpp"
#include "parpc/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace parpc {

using EdgeWeights = std::map<std::pair<int, int>, double>;

struct WeightedDag {
    Dag dag;
    EdgeWeights weights;
};

/// Random DAG: a uniformly random topological order, then each forward pair
/// is an edge independently with probability `density`.
template <class Rng>
Dag random_dag(int p, double density, Rng& rng) {
    if (p < 1) throw InputError("random DAG needs p >= 1");
    if (!(density >= 0.0 && density <= 1.0)) throw InputError("edge density must lie in [0, 1]");
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution coin(density);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (coin(rng)) edges.emplace_back(order[a], order[b]);
    return Dag::from_edges(p, edges);
}

/// Weights drawn uniformly from [-2, -0.5] ∪ [0.5, 2].
template <class Rng>
EdgeWeights random_weights(const Dag& dag, Rng& rng) {
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::bernoulli_distribution sign(0.5);
    EdgeWeights w;
    for (auto e : dag.edges()) {
        double m = mag(rng);
        w[e] = sign(rng) ? m : -m;
    }
    return w;
}

template <class Rng>
WeightedDag random_weighted_dag(int p, double density, Rng& rng) {
    Dag d = random_dag(p, density, rng);
    EdgeWeights w = random_weights(d, rng);
    return {std::move(d), std::move(w)};
}

namespace detail {

inline Eigen::MatrixXd weight_matrix(const Dag& dag, const EdgeWeights& weights) {
    const auto edges = dag.edges();
    if (edges.size() != weights.size()) throw InputError("weights must cover exactly the DAG's edges");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dag.p(), dag.p());
    for (auto e : edges) {
        auto it = weights.find(e);
        if (it == weights.end())
            throw InputError("missing weight for edge " + std::to_string(e.first) + "->" + std::to_string(e.second));
        w(e.first, e.second) = it->second;
    }
    return w;
}

inline std::vector<std::string> default_names(int p) {
    std::vector<std::string> names(p);
    for (int v = 0; v < p; ++v) names[v] = "X" + std::to_string(v + 1);
    return names;
}

}  // namespace detail

/// X_v = sum of w * X_parent + e, e ~ N(0, 1), drawn variable by variable in
/// topological order from a mt19937_64 seeded with `seed`.
inline Dataset linear_sem_sample(const Dag& dag, const EdgeWeights& weights, int n, std::uint64_t seed) {
    if (n < 1) throw InputError("sample size must be positive");
    const Eigen::MatrixXd w = detail::weight_matrix(dag, weights);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd x(n, dag.p());
    for (int v : dag.topological_order()) {
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (int u : dag.parents(v)) acc += w(u, v) * x(r, u);
            x(r, v) = acc + noise(rng);
        }
    }
    return Dataset(std::move(x), detail::default_names(dag.p()),
                   std::vector<VarKind>(dag.p(), VarKind::continuous()));
}

/// Binary analogue: P(X_v = 1) = logistic(sum of w * (2 X_parent - 1)).
inline Dataset binary_sem_sample(const Dag& dag, const EdgeWeights& weights, int n, std::uint64_t seed) {
    if (n < 1) throw InputError("sample size must be positive");
    const Eigen::MatrixXd w = detail::weight_matrix(dag, weights);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd x(n, dag.p());
    for (int v : dag.topological_order()) {
        for (int r = 0; r < n; ++r) {
            double logit = 0.0;
            for (int u : dag.parents(v)) logit += w(u, v) * (2.0 * x(r, u) - 1.0);
            x(r, v) = unit(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1.0 : 0.0;
        }
    }
    std::vector<VarKind> kinds(dag.p(), VarKind::discrete(2));
    return Dataset(std::move(x), detail::default_names(dag.p()), std::move(kinds));
}

/// Sigma = (I - W)^{-T} (I - W)^{-1} with W(u, v) the weight of u -> v, unit noise.
inline Eigen::MatrixXd linear_sem_population_cov(const Dag& dag, const EdgeWeights& weights) {
    const int p = dag.p();
    const Eigen::MatrixXd w = detail::weight_matrix(dag, weights);
    Eigen::MatrixXd a = (Eigen::MatrixXd::Identity(p, p) - w).inverse();
    Eigen::MatrixXd cov = a.transpose() * a;
    return (cov + cov.transpose()) * 0.5;
}

}  // namespace parpc
