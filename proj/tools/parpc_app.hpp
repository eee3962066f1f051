#pragma once

// Command-line front end. Kept in a header so the test suites can drive the
// exact command code paths in-process.

#include "parpc/parpc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace parpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitEquivalence = 4;

class EquivalenceViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string stats_output;
    std::string tsv_output;
    std::string dag_path;
    std::string cpdag_path;
    std::string format = "json";
    std::string kind_hint = "auto";
    std::string indep_test = "fisher-z";
    double alpha = 0.01;
    std::size_t num_workers = 2;
    bool mem_efficient = false;
    std::string mem_budget;  // bytes or "auto"; empty = default
    std::optional<int> max_level;
    int target = 0;
    int cause = 0;
    int outcome = 1;
    std::uint64_t seed = 1;
    // gen / bench generator
    int gen_p = 10;
    int gen_n = 1000;
    double density = 0.1;
    std::string gen_kind = "gaussian";
    std::vector<std::string> algorithms{"pc"};
    int repeat = 1;

    SkeletonConfig skeleton_config() const {
        SkeletonConfig c;
        c.alpha = alpha;
        c.max_level = max_level;
        c.num_workers = num_workers;
        c.mem_efficient = mem_efficient;
        if (mem_budget == "auto") {
            c.mem_auto_probe = true;
        } else if (!mem_budget.empty()) {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(mem_budget.data(), mem_budget.data() + mem_budget.size(), v);
            if (ec != std::errc() || ptr != mem_budget.data() + mem_budget.size() || v == 0)
                throw InputError("--mem-budget must be a positive byte count or 'auto'");
            c.mem_budget_bytes = v;
        }
        c.validate();
        return c;
    }
};

/// Everything a CI test may be closed over, loaded once per command.
struct Inputs {
    std::optional<Dataset> data;
    std::shared_ptr<const GaussianSuffStat> gauss;
    std::shared_ptr<const DiscreteSuffStat> disc;
    std::shared_ptr<const Dag> dag;

    AnyCiTest make_test(const std::string& id) const { return make_ci_test(id, gauss, disc, dag); }
    int p() const { return data ? data->p() : dag ? dag->p() : 0; }
};

inline KindHint parse_kind_hint(const std::string& s) {
    if (s == "auto") return KindHint::Auto;
    if (s == "continuous") return KindHint::Continuous;
    if (s == "discrete") return KindHint::Discrete;
    throw InputError("--kind must be auto, continuous or discrete");
}

inline Inputs prepare_inputs(const Dataset* data, const std::string& test_id, const std::string& dag_path) {
    Inputs in;
    if (test_id == "oracle") {
        if (dag_path.empty()) throw InputError("--indep-test oracle requires --dag");
        in.dag = std::make_shared<const Dag>(io::dag_from_json(io::read_json_file(dag_path)));
        if (data && data->p() != in.dag->p()) throw InputError("--dag and --input disagree on the variable count");
    } else if (!data) {
        throw InputError("--input is required");
    }
    if (data) {
        in.data = *data;
        if (test_id == "fisher-z" || test_id == "mi-g")
            in.gauss = std::make_shared<const GaussianSuffStat>(gaussian_suffstat(*data));
        else if (ci_test_needs_discrete(test_id))
            in.disc = std::make_shared<const DiscreteSuffStat>(discrete_suffstat(*data));
    }
    return in;
}

inline void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.output.empty() || cfg.output == "-")
        std::cout << text;
    else
        io::write_text_file(cfg.output, text);
}

inline void emit_stats(const RunConfig& cfg, const LevelStats& stats) {
    if (!cfg.stats_output.empty()) io::write_text_file(cfg.stats_output, io::to_json(stats).dump(2) + "\n");
}

inline Inputs load_inputs(const RunConfig& cfg) {
    std::optional<Dataset> data;
    if (!cfg.input.empty()) data = load_csv(cfg.input, parse_kind_hint(cfg.kind_hint));
    return prepare_inputs(data ? &*data : nullptr, cfg.indep_test, cfg.dag_path);
}

struct PcOutput {
    SkeletonResult skeleton;
    Cpdag cpdag;
};

inline PcOutput run_pc(const AnyCiTest& test, int p, const SkeletonConfig& sc) {
    PcOutput out{skeleton_stable(test, p, sc), Cpdag()};
    out.cpdag = meek_closure(orient_v_structures(out.skeleton.graph, out.skeleton.sepsets));
    return out;
}

inline int cmd_skeleton(const RunConfig& cfg) {
    const Inputs in = load_inputs(cfg);
    const auto sc = cfg.skeleton_config();
    auto res = skeleton_stable(in.make_test(cfg.indep_test), in.p(), sc);
    if (cfg.format == "edges")
        emit(cfg, io::to_edge_list(Cpdag::from_skeleton(res.graph)));
    else
        emit(cfg, io::json{{"skeleton", io::to_json(res.graph)}, {"sepsets", io::to_json(res.sepsets)}}.dump(2) + "\n");
    emit_stats(cfg, res.stats);
    return kExitOk;
}

inline int cmd_pc(const RunConfig& cfg) {
    const Inputs in = load_inputs(cfg);
    auto out = run_pc(in.make_test(cfg.indep_test), in.p(), cfg.skeleton_config());
    if (cfg.format == "edges")
        emit(cfg, io::to_edge_list(out.cpdag));
    else
        emit(cfg, io::json{{"cpdag", io::to_json(out.cpdag)}, {"sepsets", io::to_json(out.skeleton.sepsets)}}.dump(2) +
                      "\n");
    emit_stats(cfg, out.skeleton.stats);
    return kExitOk;
}

inline int cmd_pcsimple(const RunConfig& cfg) {
    const Inputs in = load_inputs(cfg);
    auto res = pc_simple(in.make_test(cfg.indep_test), cfg.target, cfg.skeleton_config());
    emit(cfg, io::to_json(res).dump(2) + "\n");
    emit_stats(cfg, res.stats);
    return kExitOk;
}

inline EffectMultiset run_ida(const Inputs& in, const RunConfig& cfg, const SkeletonConfig& sc,
                              LevelStats* stats = nullptr) {
    if (!in.data) throw InputError("ida needs --input data for the covariance");
    const Eigen::MatrixXd cov = sample_covariance(*in.data);
    Cpdag g;
    if (!cfg.cpdag_path.empty()) {
        g = io::cpdag_from_json(io::read_json_file(cfg.cpdag_path));
        if (g.p() != in.data->p()) throw InputError("--cpdag and --input disagree on the variable count");
    } else {
        auto out = run_pc(in.make_test(cfg.indep_test), in.p(), sc);
        g = out.cpdag;
        if (stats) *stats = out.skeleton.stats;
    }
    return ida_effects(g, cov, cfg.cause, cfg.outcome, sc.num_workers);
}

inline int cmd_ida(const RunConfig& cfg) {
    const Inputs in = load_inputs(cfg);
    LevelStats stats;
    auto res = run_ida(in, cfg, cfg.skeleton_config(), &stats);
    emit(cfg, io::to_json(res).dump(2) + "\n");
    emit_stats(cfg, stats);
    return kExitOk;
}

struct Generated {
    WeightedDag truth;
    Dataset data;
};

/// Random DAG, weights in ±[0.5, 2], then a sample; everything derives from `seed`.
inline Generated generate(int p, int n, double density, const std::string& kind, std::uint64_t seed) {
    if (!(density >= 0.0 && density <= 1.0)) throw InputError("--density must lie in [0, 1]");
    if (p < 2) throw InputError("--p must be at least 2");
    std::mt19937_64 rng(seed);
    WeightedDag truth = random_weighted_dag(p, density, rng);
    const std::uint64_t sample_seed = rng();
    if (kind == "gaussian") return {truth, linear_sem_sample(truth.dag, truth.weights, n, sample_seed)};
    if (kind == "binary") return {truth, binary_sem_sample(truth.dag, truth.weights, n, sample_seed)};
    throw InputError("--kind must be gaussian or binary");
}

inline io::json weighted_dag_json(const WeightedDag& wd) {
    io::json j = io::to_json(wd.dag);
    io::json w = io::json::array();
    for (auto e : wd.dag.edges()) w.push_back(wd.weights.at(e));
    j["weights"] = w;
    return j;
}

inline int cmd_gen(const RunConfig& cfg) {
    auto g = generate(cfg.gen_p, cfg.gen_n, cfg.density, cfg.gen_kind, cfg.seed);
    std::ostringstream csv;
    write_csv(csv, g.data);
    emit(cfg, csv.str());
    if (!cfg.dag_path.empty()) io::write_text_file(cfg.dag_path, weighted_dag_json(g.truth).dump(2) + "\n");
    return kExitOk;
}

// ---- benchmark harness ----

struct BenchRow {
    std::string algorithm;
    std::string variant;
    std::size_t workers = 1;
    double wall_ms = 0.0;
    std::size_t peak_tasks_in_flight = 0;
    std::string result_digest;
};

struct BenchReport {
    std::vector<BenchRow> rows;

    bool digests_agree() const {
        std::map<std::string, std::string> first;
        for (const auto& r : rows) {
            auto [it, fresh] = first.try_emplace(r.algorithm, r.result_digest);
            if (!fresh && it->second != r.result_digest) return false;
        }
        return true;
    }

    const BenchRow* find(const std::string& algorithm, const std::string& variant) const {
        for (const auto& r : rows)
            if (r.algorithm == algorithm && r.variant == variant) return &r;
        return nullptr;
    }

    std::string tsv() const {
        std::ostringstream out;
        out << "algorithm\tvariant\tworkers\twall_ms\tpeak_tasks_in_flight\tresult_digest\n";
        for (const auto& r : rows)
            out << r.algorithm << '\t' << r.variant << '\t' << r.workers << '\t' << r.wall_ms << '\t'
                << r.peak_tasks_in_flight << '\t' << r.result_digest << '\n';
        return out.str();
    }

    io::json to_json() const {
        io::json rows_json = io::json::array();
        for (const auto& r : rows)
            rows_json.push_back({{"algorithm", r.algorithm},
                                 {"variant", r.variant},
                                 {"workers", r.workers},
                                 {"wall_ms", r.wall_ms},
                                 {"peak_tasks_in_flight", r.peak_tasks_in_flight},
                                 {"result_digest", r.result_digest}});
        return {{"rows", rows_json}, {"digests_agree", digests_agree()}};
    }
};

/// Runs each algorithm as sequential (1 worker), parallel (N workers) and
/// parallel-mem (N workers, batched under the budget). Wall time is the best of `repeat` runs.
inline BenchReport bench(const Inputs& in, const RunConfig& cfg) {
    BenchReport report;
    SkeletonConfig base = cfg.skeleton_config();
    struct Variant {
        const char* name;
        std::size_t workers;
        bool mem;
    };
    const Variant variants[] = {{"sequential", 1, false}, {"parallel", base.num_workers, false},
                                {"parallel-mem", base.num_workers, true}};
    const AnyCiTest test = in.make_test(cfg.indep_test);

    for (const auto& alg : cfg.algorithms) {
        for (const auto& v : variants) {
            SkeletonConfig sc = base;
            sc.num_workers = v.workers;
            sc.mem_efficient = v.mem;
            BenchRow row{alg, v.name, v.workers, 0.0, 0, {}};
            for (int rep = 0; rep < std::max(cfg.repeat, 1); ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                std::string canon;
                std::size_t peak = 0;
                if (alg == "skeleton") {
                    auto r = skeleton_stable(test, in.p(), sc);
                    canon = io::canonical(r.graph, r.sepsets);
                    peak = r.stats.peak_tasks_in_flight();
                } else if (alg == "pc") {
                    auto r = run_pc(test, in.p(), sc);
                    canon = io::canonical(r.cpdag, r.skeleton.sepsets);
                    peak = r.skeleton.stats.peak_tasks_in_flight();
                } else if (alg == "pcsimple") {
                    auto r = pc_simple(test, cfg.target, sc);
                    canon = io::canonical(r);
                    peak = r.stats.peak_tasks_in_flight();
                } else if (alg == "ida") {
                    LevelStats stats;
                    auto r = run_ida(in, cfg, sc, &stats);
                    canon = io::canonical(r);
                    peak = stats.peak_tasks_in_flight();
                } else {
                    throw InputError("unknown bench algorithm '" + alg + "'");
                }
                const double ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                row.wall_ms = rep == 0 ? ms : std::min(row.wall_ms, ms);
                row.peak_tasks_in_flight = peak;
                std::string d = io::digest(canon);
                if (rep > 0 && d != row.result_digest)
                    throw EquivalenceViolation(alg + " " + v.name + ": digest changed between repeats");
                row.result_digest = d;
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

inline int cmd_bench(const RunConfig& cfg) {
    std::optional<Dataset> data;
    if (!cfg.input.empty())
        data = load_csv(cfg.input, parse_kind_hint(cfg.kind_hint));
    else
        data = generate(cfg.gen_p, cfg.gen_n, cfg.density, cfg.gen_kind, cfg.seed).data;
    const Inputs in = prepare_inputs(&*data, cfg.indep_test, cfg.dag_path);
    BenchReport report = bench(in, cfg);
    if (!cfg.tsv_output.empty()) io::write_text_file(cfg.tsv_output, report.tsv());
    if (cfg.output.empty())
        std::cout << report.tsv();
    else
        io::write_text_file(cfg.output, report.to_json().dump(2) + "\n");
    if (!report.digests_agree()) {
        std::cerr << "error: result digests differ across variants\n";
        return kExitEquivalence;
    }
    return kExitOk;
}

inline void add_compute_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--input", cfg.input, "CSV dataset");
    sub->add_option("--output", cfg.output, "Result file (stdout when absent)");
    sub->add_option("--stats", cfg.stats_output, "LevelStats JSON file");
    sub->add_option("--indep-test", cfg.indep_test, "CI test")->check(CLI::IsMember(ci_test_ids()));
    sub->add_option("--dag", cfg.dag_path, "Ground-truth DAG JSON (oracle test)");
    sub->add_option("--kind", cfg.kind_hint, "Column kind detection")->check(CLI::IsMember({"auto", "continuous", "discrete"}));
    sub->add_option("--alpha", cfg.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--num-workers", cfg.num_workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--mem-efficient", cfg.mem_efficient, "Batch each level under a memory budget");
    sub->add_option("--mem-budget", cfg.mem_budget, "Budget in bytes, or 'auto' to probe free memory");
    sub->add_option("--max-level", cfg.max_level, "Largest conditioning-set size")->check(CLI::NonNegativeNumber);
}

/// Entry point shared by the executable and the tests. Returns the exit status.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"Parallel order-independent PC structure learning and IDA"};
    app.require_subcommand(1);

    auto* skel = app.add_subcommand("skeleton", "Learn the skeleton and sepsets");
    add_compute_flags(skel, cfg);
    skel->add_option("--format", cfg.format)->check(CLI::IsMember({"json", "edges"}));

    auto* pc = app.add_subcommand("pc", "Learn a CPDAG (skeleton, v-structures, Meek rules)");
    add_compute_flags(pc, cfg);
    pc->add_option("--format", cfg.format)->check(CLI::IsMember({"json", "edges"}));

    auto* pcs = app.add_subcommand("pcsimple", "Parents and children of one target");
    add_compute_flags(pcs, cfg);
    pcs->add_option("--target", cfg.target)->required()->check(CLI::NonNegativeNumber);

    auto* ida = app.add_subcommand("ida", "Possible causal effects of --cause on --outcome");
    add_compute_flags(ida, cfg);
    ida->add_option("--cause", cfg.cause)->required()->check(CLI::NonNegativeNumber);
    ida->add_option("--outcome", cfg.outcome)->required()->check(CLI::NonNegativeNumber);
    ida->add_option("--cpdag", cfg.cpdag_path, "Use this CPDAG JSON instead of learning one");

    auto* bn = app.add_subcommand("bench", "Sequential vs parallel runtimes with a digest check");
    add_compute_flags(bn, cfg);
    bn->add_option("--tsv", cfg.tsv_output, "BenchReport TSV file");
    bn->add_option("--algorithms", cfg.algorithms, "Any of skeleton, pc, pcsimple, ida")->delimiter(',');
    bn->add_option("--target", cfg.target);
    bn->add_option("--cause", cfg.cause);
    bn->add_option("--outcome", cfg.outcome);
    bn->add_option("--repeat", cfg.repeat)->check(CLI::PositiveNumber);
    bn->add_option("--p", cfg.gen_p, "Generated variable count (no --input)");
    bn->add_option("--n", cfg.gen_n, "Generated sample count");
    bn->add_option("--density", cfg.density);
    bn->add_option("--data-kind", cfg.gen_kind)->check(CLI::IsMember({"gaussian", "binary"}));
    bn->add_option("--seed", cfg.seed);

    auto* gen = app.add_subcommand("gen", "Sample a random DAG and a dataset from it");
    gen->add_option("--p", cfg.gen_p)->required();
    gen->add_option("--n", cfg.gen_n);
    gen->add_option("--density", cfg.density)->required();
    gen->add_option("--seed", cfg.seed);
    gen->add_option("--data-kind", cfg.gen_kind)->check(CLI::IsMember({"gaussian", "binary"}));
    gen->add_option("--output", cfg.output, "CSV output (stdout when absent)");
    gen->add_option("--dag-output", cfg.dag_path, "Ground-truth DAG JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (*skel) return cmd_skeleton(cfg);
        if (*pc) return cmd_pc(cfg);
        if (*pcs) return cmd_pcsimple(cfg);
        if (*ida) return cmd_ida(cfg);
        if (*bn) return cmd_bench(cfg);
        if (*gen) return cmd_gen(cfg);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DegenerateStatistics& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DegenerateConditioning& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const EquivalenceViolation& e) {
        err << "error: " << e.what() << "\n";
        return kExitEquivalence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitInput;
}

}  // namespace parpc::cli
