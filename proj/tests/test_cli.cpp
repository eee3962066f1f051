#include "oracles.hpp"
#include "parpc_app.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace parpc;
using testutil::read_file;
using testutil::tmp_path;

namespace {

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
    args.insert(args.begin(), "parpc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err;
    int rc = cli::run(static_cast<int>(argv.size()), argv.data(), err);
    if (err_text) *err_text = err.str();
    return rc;
}

std::string chain_csv() {
    Dag chain = Dag::from_edges(3, {{0, 1}, {1, 2}});
    auto data = linear_sem_sample(chain, {{{0, 1}, 0.8}, {{1, 2}, -0.7}}, 5000, 2024);
    auto path = tmp_path("chain.csv");
    save_csv(path, data);
    return path;
}

}  // namespace

TEST(Cli, PcOnChainGivesUndirectedChain) {
    auto csv = chain_csv();
    auto out = tmp_path("chain_pc.json");
    auto stats = tmp_path("chain_stats.json");
    ASSERT_EQ(run_cli({"pc", "--input", csv, "--output", out, "--stats", stats}), cli::kExitOk);
    auto j = io::read_json_file(out);
    Cpdag got = io::cpdag_from_json(j.at("cpdag"));
    EXPECT_EQ(got, cpdag_from_dag(Dag::from_edges(3, {{0, 1}, {1, 2}})));
    EXPECT_TRUE(got.undirected(0, 1));
    EXPECT_TRUE(got.undirected(1, 2));
    EXPECT_FALSE(got.adjacent(0, 2));
    ASSERT_EQ(j.at("sepsets").size(), 1u);
    EXPECT_EQ(j.at("sepsets")[0].at("sepset"), io::json::array({1}));
    EXPECT_FALSE(io::read_json_file(stats).empty());
}

TEST(Cli, RerunsAndWorkerCountsAreByteIdentical) {
    auto csv = tmp_path("rerun.csv");
    ASSERT_EQ(run_cli({"gen", "--p", "25", "--n", "300", "--density", "0.15", "--seed", "9", "--output", csv}), 0);
    auto a = tmp_path("rerun_a.json"), b = tmp_path("rerun_b.json"), c = tmp_path("rerun_c.json");
    ASSERT_EQ(run_cli({"pc", "--input", csv, "--output", a, "--num-workers", "1"}), 0);
    ASSERT_EQ(run_cli({"pc", "--input", csv, "--output", b, "--num-workers", "1"}), 0);
    ASSERT_EQ(run_cli({"pc", "--input", csv, "--output", c, "--num-workers", "4", "--mem-efficient", "--mem-budget",
                       "20000"}),
              0);
    EXPECT_EQ(read_file(a), read_file(b));
    EXPECT_EQ(read_file(a), read_file(c));
}

TEST(Cli, GenIsDeterministicAndEmptyAtZeroDensity) {
    auto c1 = tmp_path("gen1.csv"), c2 = tmp_path("gen2.csv"), d1 = tmp_path("gen1.json"), d2 = tmp_path("gen2.json");
    ASSERT_EQ(run_cli({"gen", "--p", "10", "--density", "0.3", "--seed", "4", "--output", c1, "--dag-output", d1}), 0);
    ASSERT_EQ(run_cli({"gen", "--p", "10", "--density", "0.3", "--seed", "4", "--output", c2, "--dag-output", d2}), 0);
    EXPECT_EQ(read_file(c1), read_file(c2));
    EXPECT_EQ(read_file(d1), read_file(d2));
    auto dj = io::read_json_file(d1);
    EXPECT_EQ(dj.at("weights").size(), dj.at("edges").size());

    ASSERT_EQ(run_cli({"gen", "--p", "10", "--density", "0", "--output", c1, "--dag-output", d1}), 0);
    EXPECT_TRUE(io::read_json_file(d1).at("edges").empty());
    EXPECT_EQ(load_csv(c1).p(), 10);
}

TEST(Cli, GenSampleCovarianceNearPopulation) {
    auto csv = tmp_path("gencov.csv"), dag = tmp_path("gencov.json");
    ASSERT_EQ(run_cli({"gen", "--p", "10", "--n", "10000", "--density", "0.3", "--seed", "12", "--output", csv,
                       "--dag-output", dag}),
              0);
    auto dj = io::read_json_file(dag);
    Dag d = io::dag_from_json(dj);
    EdgeWeights w;
    auto edges = d.edges();
    for (std::size_t k = 0; k < edges.size(); ++k) w[edges[k]] = dj.at("weights")[k].get<double>();
    Eigen::MatrixXd pop = linear_sem_population_cov(d, w);
    Eigen::MatrixXd emp = sample_covariance(load_csv(csv));
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) EXPECT_LE(std::abs(emp(i, j) - pop(i, j)), 0.05 * std::sqrt(pop(i, i) * pop(j, j)));
}

TEST(Cli, GenRejectsBadDensity) {
    std::string err;
    EXPECT_EQ(run_cli({"gen", "--p", "5", "--density", "1.5", "--output", tmp_path("bad.csv")}, &err), cli::kExitInput);
    EXPECT_NE(err.find("density"), std::string::npos);
}

TEST(Cli, BenchRowsAndDigests) {
    auto json_out = tmp_path("bench.json"), tsv = tmp_path("bench.tsv");
    ASSERT_EQ(run_cli({"bench", "--p", "200", "--n", "50", "--density", "0.01", "--seed", "3", "--num-workers", "2",
                       "--algorithms", "skeleton,pc", "--output", json_out, "--tsv", tsv, "--mem-budget", "1000000"}),
              cli::kExitOk);
    auto j = io::read_json_file(json_out);
    EXPECT_TRUE(j.at("digests_agree").get<bool>());
    ASSERT_EQ(j.at("rows").size(), 6u);
    std::map<std::string, std::set<std::string>> digests;
    std::map<std::string, int> count;
    for (const auto& r : j.at("rows")) {
        digests[r.at("algorithm")].insert(r.at("result_digest").get<std::string>());
        ++count[r.at("algorithm")];
    }
    EXPECT_EQ(count["skeleton"], 3);
    EXPECT_EQ(count["pc"], 3);
    for (const auto& [alg, set] : digests) EXPECT_EQ(set.size(), 1u) << alg;
    auto text = read_file(tsv);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
    EXPECT_EQ(text.rfind("algorithm\tvariant\tworkers\twall_ms\tpeak_tasks_in_flight\tresult_digest\n", 0), 0u);
}

TEST(BenchReport, DigestMismatchDetected) {
    cli::BenchReport r;
    r.rows.push_back({"pc", "sequential", 1, 1.0, 10, "aa"});
    r.rows.push_back({"pc", "parallel", 2, 1.0, 10, "aa"});
    EXPECT_TRUE(r.digests_agree());
    r.rows.push_back({"pc", "parallel-mem", 2, 1.0, 5, "ab"});
    EXPECT_FALSE(r.digests_agree());
    EXPECT_NE(r.find("pc", "parallel-mem"), nullptr);
}

TEST(Cli, InputErrorsExitTwo) {
    std::string err;
    auto ragged = testutil::write_file("ragged.csv", "a,b\n1,2\n3\n");
    EXPECT_EQ(run_cli({"pc", "--input", ragged}, &err), cli::kExitInput);
    EXPECT_NE(err.find("line 3"), std::string::npos);
    EXPECT_EQ(run_cli({"pc", "--input", tmp_path("missing.csv")}), cli::kExitInput);
    EXPECT_EQ(run_cli({"pc", "--input", chain_csv(), "--alpha", "2"}), cli::kExitInput);
    EXPECT_EQ(run_cli({"pc", "--input", chain_csv(), "--indep-test", "nope"}), cli::kExitInput);
    EXPECT_EQ(run_cli({"pc", "--input", chain_csv(), "--mem-budget", "lots"}), cli::kExitInput);
    EXPECT_EQ(run_cli({"pc", "--input", chain_csv(), "--indep-test", "g-sq"}), cli::kExitInput);
    EXPECT_EQ(run_cli({"pcsimple", "--input", chain_csv(), "--target", "9"}), cli::kExitInput);
    EXPECT_EQ(run_cli({"frobnicate"}), cli::kExitInput);
}

TEST(Cli, ZeroVarianceExitsThree) {
    std::string err;
    auto flat = testutil::write_file("flat.csv", "a,b,c\n1.5,2,0.1\n2.5,2,0.7\n0.5,2,0.3\n");
    EXPECT_EQ(run_cli({"pc", "--input", flat, "--kind", "continuous"}, &err), cli::kExitNumeric);
    EXPECT_NE(err.find("'b'"), std::string::npos);
}

TEST(Cli, EdgeListFormat) {
    auto out = tmp_path("chain.edges");
    ASSERT_EQ(run_cli({"pc", "--input", chain_csv(), "--format", "edges", "--output", out}), 0);
    EXPECT_EQ(read_file(out), "0 -- 1\n1 -- 2\n");
    std::istringstream in(read_file(out));
    EXPECT_EQ(io::cpdag_from_edge_list(in, 3), cpdag_from_dag(Dag::from_edges(3, {{0, 1}, {1, 2}})));
}

TEST(Cli, SkeletonCommandWritesSepsets) {
    auto out = tmp_path("skeleton.json");
    ASSERT_EQ(run_cli({"skeleton", "--input", chain_csv(), "--output", out}), 0);
    auto j = io::read_json_file(out);
    EXPECT_EQ(j.at("skeleton").at("edges").size(), 2u);
    EXPECT_EQ(j.at("sepsets").size(), 1u);
}

TEST(Cli, OracleTestUsesTheDag) {
    // a collider 0 -> 2 <- 1 plus 2 -> 3; the data file only supplies the shape
    Dag d = Dag::from_edges(4, {{0, 2}, {1, 2}, {2, 3}});
    auto dag_path = testutil::write_file("oracle_dag.json", io::to_json(d).dump());
    auto data = linear_sem_sample(Dag::from_edges(4, {}), {}, 20, 1);
    auto csv = tmp_path("oracle_shape.csv");
    save_csv(csv, data);
    auto out = tmp_path("oracle_pc.json");
    ASSERT_EQ(run_cli({"pc", "--input", csv, "--indep-test", "oracle", "--dag", dag_path, "--output", out}), 0);
    EXPECT_EQ(io::cpdag_from_json(io::read_json_file(out).at("cpdag")), cpdag_from_dag(d));
    EXPECT_EQ(run_cli({"pc", "--input", csv, "--indep-test", "oracle"}), cli::kExitInput);
}

TEST(Cli, PcSimpleAndIdaJson) {
    auto csv = chain_csv();
    auto ps = tmp_path("ps.json");
    ASSERT_EQ(run_cli({"pcsimple", "--input", csv, "--target", "1", "--output", ps}), 0);
    auto pj = io::read_json_file(ps);
    EXPECT_EQ(pj.at("target"), 1);
    EXPECT_EQ(pj.at("members"), io::json::array({0, 2}));

    auto ida = tmp_path("ida.json");
    ASSERT_EQ(run_cli({"ida", "--input", csv, "--cause", "0", "--outcome", "2", "--output", ida}), 0);
    auto ij = io::read_json_file(ida);
    EXPECT_EQ(ij.at("cause"), 0);
    EXPECT_EQ(ij.at("outcome"), 2);
    // X1 has a single sibling: parent sets {} and {1}; the second adjusts away the whole effect
    ASSERT_EQ(ij.at("effects").size(), 2u);
    EXPECT_NEAR(ij.at("effects")[0].at("effect").get<double>(), 0.8 * -0.7, 0.05);
    EXPECT_NEAR(ij.at("effects")[1].at("effect").get<double>(), 0.0, 0.05);

    Cpdag given(3);
    given.orient(0, 1);
    given.orient(1, 2);
    auto cp = testutil::write_file("given.json", io::to_json(given).dump());
    ASSERT_EQ(run_cli({"ida", "--input", csv, "--cause", "0", "--outcome", "2", "--cpdag", cp, "--output", ida}), 0);
    ij = io::read_json_file(ida);
    ASSERT_EQ(ij.at("effects").size(), 1u);
    EXPECT_NEAR(ij.at("effects")[0].at("effect").get<double>(), 0.8 * -0.7, 0.05);
}
