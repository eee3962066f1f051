#include "oracles.hpp"
#include "parpc/graph.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace parpc;

TEST(CompleteGraph, SmallCases) {
    auto g3 = complete_graph(3);
    EXPECT_EQ(g3.edges(), (std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}}));
    EXPECT_EQ(complete_graph(2).edges(), (std::vector<std::pair<int, int>>{{0, 1}}));
    EXPECT_THROW(complete_graph(1), InputError);
}

TEST(CompleteGraph, WideGraphsCrossWordBoundaries) {
    auto g = complete_graph(130);
    EXPECT_EQ(g.edge_count(), 130u * 129u / 2u);
    EXPECT_EQ(g.degree(64), 129);
    EXPECT_TRUE(g.audit());
}

TEST(Neighbors, Examples) {
    auto g = complete_graph(3);
    EXPECT_EQ(neighbors(g, 1), (std::vector<int>{0, 2}));
    EXPECT_TRUE(neighbors(SkeletonGraph(4), 2).empty());
    g.remove_edge(0, 1);
    EXPECT_EQ(neighbors(g, 0), (std::vector<int>{2}));
    EXPECT_THROW(neighbors(g, 3), InputError);
    EXPECT_THROW(neighbors(g, -1), InputError);
}

TEST(SkeletonGraph, SymmetricUnderRandomMutation) {
    std::mt19937 rng(5);
    SkeletonGraph g(70);
    for (int step = 0; step < 3000; ++step) {
        int i = rng() % 70, j = rng() % 70;
        if (i == j) {
            EXPECT_THROW(g.add_edge(i, j), InputError);
            continue;
        }
        if (rng() % 2)
            g.add_edge(i, j);
        else
            g.remove_edge(j, i);
        EXPECT_EQ(g.adjacent(i, j), g.adjacent(j, i));
    }
    EXPECT_TRUE(g.audit());
}

TEST(Dag, RejectsCyclesAndSelfLoops) {
    EXPECT_THROW(Dag::from_edges(3, {{0, 1}, {1, 2}, {2, 0}}), InputError);
    EXPECT_THROW(Dag::from_edges(2, {{1, 1}}), InputError);
    EXPECT_THROW(Dag::from_edges(2, {{0, 1}, {0, 1}}), InputError);
    Dag d = Dag::from_edges(3, {{2, 0}, {0, 1}});
    EXPECT_EQ(d.topological_order(), (std::vector<int>{2, 0, 1}));
}

TEST(DSeparation, ChainAndCollider) {
    Dag chain = Dag::from_edges(3, {{0, 1}, {1, 2}});
    EXPECT_TRUE(d_separated(chain, 0, 2, {1}));
    EXPECT_FALSE(d_separated(chain, 0, 2, {}));
    Dag collider = Dag::from_edges(3, {{0, 2}, {1, 2}});
    EXPECT_TRUE(d_separated(collider, 0, 1, {}));
    EXPECT_FALSE(d_separated(collider, 0, 1, {2}));
}

TEST(DSeparation, ConditioningOnDescendantOfColliderOpensPath) {
    Dag d = Dag::from_edges(4, {{0, 2}, {1, 2}, {2, 3}});
    EXPECT_TRUE(d_separated(d, 0, 1, {}));
    EXPECT_FALSE(d_separated(d, 0, 1, {3}));
}

TEST(DSeparation, RejectsBadQueries) {
    Dag d = Dag::from_edges(3, {{0, 1}});
    EXPECT_THROW(d_separated(d, 0, 0, {}), InputError);
    EXPECT_THROW(d_separated(d, 0, 1, {1}), InputError);
    EXPECT_THROW(d_separated(d, 0, 5, {}), InputError);
}

TEST(DSeparation, AgreesWithPathEnumerationOnRandomDags) {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto wd = oracle::random_small_dag(rng, 6);
        const Dag& dag = wd.dag;
        const int p = dag.p();
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                if (i == j) continue;
                std::vector<int> rest;
                for (int v = 0; v < p; ++v)
                    if (v != i && v != j) rest.push_back(v);
                for (unsigned mask = 0; mask < (1u << rest.size()); ++mask) {
                    std::vector<int> s;
                    for (std::size_t b = 0; b < rest.size(); ++b)
                        if (mask >> b & 1u) s.push_back(rest[b]);
                    bool fast = d_separated(dag, i, j, s);
                    ASSERT_EQ(fast, oracle::d_separated_by_paths(dag, i, j, s));
                    ASSERT_EQ(fast, d_separated(dag, j, i, s));
                    ++checked;
                }
            }
    }
    EXPECT_GT(checked, 1000);
}

TEST(Cpdag, MarksAndAcyclicity) {
    Cpdag g(3);
    g.orient(0, 1);
    g.set_undirected(1, 2);
    EXPECT_TRUE(g.directed(0, 1));
    EXPECT_FALSE(g.directed(1, 0));
    EXPECT_EQ(g.mark(0, 1), EdgeMark::Arrow);
    EXPECT_EQ(g.mark(1, 0), EdgeMark::Tail);
    EXPECT_TRUE(g.undirected(2, 1));
    EXPECT_EQ(g.parents(1), (std::vector<int>{0}));
    EXPECT_EQ(g.siblings(1), (std::vector<int>{2}));
    EXPECT_TRUE(g.directed_part_acyclic());
    g.orient(1, 2);
    g.orient(2, 0);
    EXPECT_FALSE(g.directed_part_acyclic());
    EXPECT_FALSE(g.has_bidirected());
}

TEST(SepsetMap, UnorderedKeysAndEndpointCheck) {
    SepsetMap m;
    m.set(3, 1, {0, 2});
    ASSERT_NE(m.find(1, 3), nullptr);
    EXPECT_EQ(*m.find(1, 3), (std::vector<int>{0, 2}));
    EXPECT_EQ(m.entries().begin()->first, (std::pair{1, 3}));
    EXPECT_THROW(m.set(0, 1, {1}), InputError);
    EXPECT_FALSE(m.contains(0, 1));
}
