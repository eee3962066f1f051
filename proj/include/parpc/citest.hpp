#pragma once

#include "parpc/data.hpp"
#include "parpc/distributions.hpp"
#include "parpc/error.hpp"
#include "parpc/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace parpc {

struct CiTestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
    double dof = 0.0;

    bool operator==(const CiTestOutcome&) const = default;
};

enum class SuffKind { Gaussian, Discrete };

/// What the batch planner needs to price one edge task.
struct CostModel {
    SuffKind kind = SuffKind::Gaussian;
    std::vector<int> arities_desc;  // discrete only: arities sorted descending
};

/// A conditional-independence test closed over its sufficient statistic.
template <class T>
concept CiTest = requires(const T& t, int i, int j, std::span<const int> s) {
    { t(i, j, s) } -> std::same_as<CiTestOutcome>;
    { t.num_variables() } -> std::convertible_to<int>;
    { t.cost_model() } -> std::same_as<CostModel>;
};

namespace detail {

inline void check_query(int p, int i, int j, std::span<const int> s) {
    auto in_range = [p](int v) { return v >= 0 && v < p; };
    if (!in_range(i) || !in_range(j))
        throw InputError("CI query index out of range (p = " + std::to_string(p) + ")");
    if (i == j) throw InputError("CI query needs distinct variables");
    for (int k : s) {
        if (!in_range(k)) throw InputError("conditioning index " + std::to_string(k) + " out of range");
        if (k == i || k == j) throw InputError("conditioning set contains a query variable");
    }
}

}  // namespace detail

/// Partial correlation of i and j given s via the inverse of the correlation
/// submatrix over {i, j} ∪ s. The pair is canonicalised to i < j so that the
/// result is bitwise symmetric.
inline double partial_correlation(const GaussianSuffStat& stat, int i, int j, std::span<const int> s) {
    detail::check_query(stat.p(), i, j, s);
    if (s.empty()) return stat.corr(i, j);
    if (i > j) std::swap(i, j);

    const int m = static_cast<int>(s.size()) + 2;
    std::vector<int> vars;
    vars.reserve(m);
    vars.push_back(i);
    vars.push_back(j);
    vars.insert(vars.end(), s.begin(), s.end());

    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) sub(a, b) = stat.corr(vars[a], vars[b]);

    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
        const auto& l = llt.matrixLLT();
        for (int a = 0; a < m && !singular; ++a) singular = !(l(a, a) * l(a, a) > 1e-12);
    }
    if (singular) throw DegenerateConditioning("degenerate conditioning: singular correlation submatrix", vars);

    Eigen::MatrixXd prec = llt.solve(Eigen::MatrixXd::Identity(m, 2));
    double r = -prec(0, 1) / std::sqrt(prec(0, 0) * prec(1, 1));
    return std::clamp(r, -1.0, 1.0);
}

inline constexpr double kFisherClamp = 1.0 - 1e-12;

/// Fisher z from a partial correlation; p = 1 when n - |s| - 3 <= 0.
inline CiTestOutcome fisher_z_from_r(double r, int n, std::size_t cond_size) {
    const double eff = static_cast<double>(n) - static_cast<double>(cond_size) - 3.0;
    if (eff <= 0.0) return {0.0, 1.0, 0.0};
    double rc = std::copysign(std::min(std::fabs(r), kFisherClamp), r);
    double z = std::sqrt(eff) * std::atanh(rc);
    return {z, std::clamp(dist::normal_two_sided(z), 0.0, 1.0), 0.0};
}

/// Gaussian mutual-information likelihood ratio G = -n ln(1 - r^2), chi-squared(1).
inline CiTestOutcome gaussian_mi_from_r(double r, int n) {
    double rc = std::min(std::fabs(r), kFisherClamp);
    double g = -static_cast<double>(n) * std::log1p(-rc * rc);
    if (g < 0.0) g = 0.0;
    return {g, std::clamp(dist::chi2_sf(g, 1.0), 0.0, 1.0), 1.0};
}

inline CiTestOutcome fisher_z_test(const GaussianSuffStat& stat, int i, int j, std::span<const int> s) {
    return fisher_z_from_r(partial_correlation(stat, i, j, s), stat.n, s.size());
}

inline CiTestOutcome gaussian_mi_test(const GaussianSuffStat& stat, int i, int j, std::span<const int> s) {
    return gaussian_mi_from_r(partial_correlation(stat, i, j, s), stat.n);
}

namespace detail {

enum class DiscreteStatistic { GSquared, PearsonChi2 };

// Walks the strata of s in ascending mixed-radix order (first conditioning
// variable most significant) and accumulates the chosen statistic.
inline CiTestOutcome discrete_test(const DiscreteSuffStat& stat, int i, int j, std::span<const int> s,
                                   DiscreteStatistic which) {
    check_query(stat.p(), i, j, s);
    if (i > j) std::swap(i, j);
    const int n = stat.n();
    const int ai = stat.arities[i], aj = stat.arities[j];
    const int cells = ai * aj;

    double strata = 1.0;
    for (int k : s) strata *= stat.arities[k];
    const double dof = static_cast<double>(ai - 1) * static_cast<double>(aj - 1) * strata;

    auto ci = stat.codes.col(i);
    auto cj = stat.codes.col(j);

    double total_stat = 0.0;
    std::vector<double> table(cells), rows(ai), cols(aj);
    auto accumulate = [&](double tot) {
        if (tot <= 0.0) return;
        std::fill(rows.begin(), rows.end(), 0.0);
        std::fill(cols.begin(), cols.end(), 0.0);
        for (int x = 0; x < ai; ++x)
            for (int y = 0; y < aj; ++y) {
                rows[x] += table[x * aj + y];
                cols[y] += table[x * aj + y];
            }
        for (int x = 0; x < ai; ++x)
            for (int y = 0; y < aj; ++y) {
                double obs = table[x * aj + y];
                double expected = rows[x] * cols[y] / tot;
                if (which == DiscreteStatistic::GSquared) {
                    if (obs > 0.0) total_stat += 2.0 * obs * std::log(obs / expected);
                } else if (expected > 0.0) {
                    double d = obs - expected;
                    total_stat += d * d / expected;
                }
            }
    };

    constexpr double kDenseCellLimit = 65536.0;
    if (strata * cells <= kDenseCellLimit) {
        const std::size_t k_strata = static_cast<std::size_t>(strata);
        std::vector<int> counts(k_strata * cells, 0);
        for (int r = 0; r < n; ++r) {
            std::size_t key = 0;
            for (int k : s) key = key * stat.arities[k] + stat.codes(r, k);
            ++counts[key * cells + ci(r) * aj + cj(r)];
        }
        for (std::size_t st = 0; st < k_strata; ++st) {
            double tot = 0.0;
            for (int c = 0; c < cells; ++c) tot += (table[c] = counts[st * cells + c]);
            accumulate(tot);
        }
    } else {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        auto less = [&](int a, int b) {
            for (int k : s)
                if (stat.codes(a, k) != stat.codes(b, k)) return stat.codes(a, k) < stat.codes(b, k);
            return false;
        };
        std::stable_sort(order.begin(), order.end(), less);
        for (int start = 0; start < n;) {
            int end = start + 1;
            while (end < n && !less(order[start], order[end])) ++end;
            std::fill(table.begin(), table.end(), 0.0);
            for (int q = start; q < end; ++q) table[ci(order[q]) * aj + cj(order[q])] += 1.0;
            accumulate(static_cast<double>(end - start));
            start = end;
        }
    }

    if (total_stat < 0.0) total_stat = 0.0;
    double pv = dof > 0.0 ? std::clamp(dist::chi2_sf(total_stat, dof), 0.0, 1.0) : 1.0;
    return {total_stat, pv, dof};
}

}  // namespace detail

inline CiTestOutcome g_squared_test(const DiscreteSuffStat& stat, int i, int j, std::span<const int> s) {
    return detail::discrete_test(stat, i, j, s, detail::DiscreteStatistic::GSquared);
}

inline CiTestOutcome chi_squared_test(const DiscreteSuffStat& stat, int i, int j, std::span<const int> s) {
    return detail::discrete_test(stat, i, j, s, detail::DiscreteStatistic::PearsonChi2);
}

inline CiTestOutcome oracle_test(const Dag& dag, int i, int j, std::span<const int> s) {
    return {0.0, d_separated(dag, i, j, s) ? 1.0 : 0.0, 0.0};
}

// Test objects: each holds its statistic by shared pointer so copies are cheap
// and safe to hand to workers.

class FisherZTest {
public:
    explicit FisherZTest(std::shared_ptr<const GaussianSuffStat> stat) : stat_(std::move(stat)) {}
    CiTestOutcome operator()(int i, int j, std::span<const int> s) const { return fisher_z_test(*stat_, i, j, s); }
    int num_variables() const { return stat_->p(); }
    CostModel cost_model() const { return {SuffKind::Gaussian, {}}; }

private:
    std::shared_ptr<const GaussianSuffStat> stat_;
};

class GaussianMiTest {
public:
    explicit GaussianMiTest(std::shared_ptr<const GaussianSuffStat> stat) : stat_(std::move(stat)) {}
    CiTestOutcome operator()(int i, int j, std::span<const int> s) const {
        return gaussian_mi_test(*stat_, i, j, s);
    }
    int num_variables() const { return stat_->p(); }
    CostModel cost_model() const { return {SuffKind::Gaussian, {}}; }

private:
    std::shared_ptr<const GaussianSuffStat> stat_;
};

class DiscreteTest {
public:
    DiscreteTest(std::shared_ptr<const DiscreteSuffStat> stat, detail::DiscreteStatistic which)
        : stat_(std::move(stat)), which_(which) {}
    CiTestOutcome operator()(int i, int j, std::span<const int> s) const {
        return detail::discrete_test(*stat_, i, j, s, which_);
    }
    int num_variables() const { return stat_->p(); }
    CostModel cost_model() const {
        CostModel m{SuffKind::Discrete, stat_->arities};
        std::sort(m.arities_desc.begin(), m.arities_desc.end(), std::greater<>());
        return m;
    }

private:
    std::shared_ptr<const DiscreteSuffStat> stat_;
    detail::DiscreteStatistic which_;
};

inline DiscreteTest GSquaredTest(std::shared_ptr<const DiscreteSuffStat> stat) {
    return DiscreteTest(std::move(stat), detail::DiscreteStatistic::GSquared);
}
inline DiscreteTest ChiSquaredTest(std::shared_ptr<const DiscreteSuffStat> stat) {
    return DiscreteTest(std::move(stat), detail::DiscreteStatistic::PearsonChi2);
}

class OracleTest {
public:
    explicit OracleTest(std::shared_ptr<const Dag> dag) : dag_(std::move(dag)) {}
    CiTestOutcome operator()(int i, int j, std::span<const int> s) const { return oracle_test(*dag_, i, j, s); }
    int num_variables() const { return dag_->p(); }
    CostModel cost_model() const { return {SuffKind::Gaussian, {}}; }

private:
    std::shared_ptr<const Dag> dag_;
};

/// Type-erased CI test, for selection at run time.
class AnyCiTest {
public:
    template <CiTest T>
        requires(!std::same_as<std::remove_cvref_t<T>, AnyCiTest>)
    AnyCiTest(T test, std::string id = {})
        : impl_(std::make_shared<Model<T>>(std::move(test))), id_(std::move(id)) {}

    CiTestOutcome operator()(int i, int j, std::span<const int> s) const { return impl_->test(i, j, s); }
    int num_variables() const { return impl_->num_variables(); }
    CostModel cost_model() const { return impl_->cost_model(); }
    const std::string& id() const noexcept { return id_; }

private:
    struct Concept {
        virtual ~Concept() = default;
        virtual CiTestOutcome test(int i, int j, std::span<const int> s) const = 0;
        virtual int num_variables() const = 0;
        virtual CostModel cost_model() const = 0;
    };
    template <class T>
    struct Model final : Concept {
        explicit Model(T t) : test_(std::move(t)) {}
        CiTestOutcome test(int i, int j, std::span<const int> s) const override { return test_(i, j, s); }
        int num_variables() const override { return test_.num_variables(); }
        CostModel cost_model() const override { return test_.cost_model(); }
        T test_;
    };

    std::shared_ptr<const Concept> impl_;
    std::string id_;
};

inline const std::vector<std::string>& ci_test_ids() {
    static const std::vector<std::string> ids{"fisher-z", "mi-g", "g-sq", "x-sq", "oracle"};
    return ids;
}

inline bool ci_test_needs_discrete(std::string_view id) { return id == "g-sq" || id == "x-sq"; }

/// Build a test by id. Gaussian ids read `gauss`, discrete ids read `disc`, "oracle" reads `dag`.
inline AnyCiTest make_ci_test(std::string_view id, std::shared_ptr<const GaussianSuffStat> gauss,
                              std::shared_ptr<const DiscreteSuffStat> disc, std::shared_ptr<const Dag> dag) {
    auto need = [&](const auto& ptr, const char* what) {
        if (!ptr) throw InputError("test '" + std::string(id) + "' needs " + what);
    };
    if (id == "fisher-z") return need(gauss, "continuous data"), AnyCiTest(FisherZTest(gauss), "fisher-z");
    if (id == "mi-g") return need(gauss, "continuous data"), AnyCiTest(GaussianMiTest(gauss), "mi-g");
    if (id == "g-sq") return need(disc, "discrete data"), AnyCiTest(GSquaredTest(disc), "g-sq");
    if (id == "x-sq") return need(disc, "discrete data"), AnyCiTest(ChiSquaredTest(disc), "x-sq");
    if (id == "oracle") return need(dag, "a ground-truth DAG"), AnyCiTest(OracleTest(dag), "oracle");
    throw InputError("unknown CI test '" + std::string(id) + "'");
}

}  // namespace parpc
