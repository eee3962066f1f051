// Learn a CPDAG from simulated Gaussian data with 4 workers, then estimate the
// possible effects of one variable on another.

#include "parpc/parpc.hpp"

#include <iostream>
#include <random>

int main() {
    using namespace parpc;

    std::mt19937_64 rng(42);
    WeightedDag truth = random_weighted_dag(12, 0.25, rng);
    Dataset data = linear_sem_sample(truth.dag, truth.weights, 2000, 7);

    auto stat = std::make_shared<const GaussianSuffStat>(gaussian_suffstat(data));
    SkeletonConfig cfg;
    cfg.alpha = 0.01;
    cfg.num_workers = 4;
    cfg.mem_efficient = true;

    SkeletonResult skel = skeleton_stable(FisherZTest(stat), data.p(), cfg);
    Cpdag cpdag = meek_closure(orient_v_structures(skel.graph, skel.sepsets));

    std::cout << "learned:\n" << io::to_edge_list(cpdag);
    std::cout << "truth:\n" << io::to_edge_list(cpdag_from_dag(truth.dag));
    for (const auto& l : skel.stats.levels)
        std::cout << "level " << l.level << ": " << l.tests << " tests, " << l.removals << " removals\n";

    EffectMultiset effects = ida_effects(cpdag, sample_covariance(data), 0, 1);
    std::cout << io::to_json(effects).dump(2) << "\n";
}
