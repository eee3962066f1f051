#pragma once

#include "parpc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace parpc {

struct VarKind {
    enum class Tag { Continuous, Discrete };
    Tag tag = Tag::Continuous;
    int arity = 0;  // meaningful only for Discrete

    static VarKind continuous() { return {}; }
    static VarKind discrete(int arity) { return {Tag::Discrete, arity}; }

    bool is_discrete() const noexcept { return tag == Tag::Discrete; }
    bool operator==(const VarKind&) const = default;
};

/// Column-oriented sample matrix: rows are samples, columns are variables.
/// Discrete columns hold dense 0-based integer codes stored as doubles.
class Dataset {
public:
    Dataset(Eigen::MatrixXd values, std::vector<std::string> names, std::vector<VarKind> kinds)
        : values_(std::move(values)), names_(std::move(names)), kinds_(std::move(kinds)) {
        validate();
    }

    int n() const noexcept { return static_cast<int>(values_.rows()); }
    int p() const noexcept { return static_cast<int>(values_.cols()); }

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<VarKind>& kinds() const noexcept { return kinds_; }

    /// Dataset with columns reordered so that new column k is old column order[k].
    Dataset permuted(const std::vector<int>& order) const {
        if (static_cast<int>(order.size()) != p()) throw InputError("permutation size mismatch");
        Eigen::MatrixXd v(n(), p());
        std::vector<std::string> nm(p());
        std::vector<VarKind> kd(p());
        for (int k = 0; k < p(); ++k) {
            v.col(k) = values_.col(order[k]);
            nm[k] = names_[order[k]];
            kd[k] = kinds_[order[k]];
        }
        return Dataset(std::move(v), std::move(nm), std::move(kd));
    }

private:
    void validate() const {
        if (values_.rows() < 1) throw InputError("dataset needs at least one sample");
        if (values_.cols() < 2) throw InputError("dataset needs at least two variables");
        if (names_.size() != static_cast<std::size_t>(values_.cols()) ||
            kinds_.size() != static_cast<std::size_t>(values_.cols()))
            throw InputError("names/kinds do not match column count");
        std::unordered_set<std::string> seen;
        for (const auto& nm : names_)
            if (!seen.insert(nm).second) throw InputError("duplicate variable name '" + nm + "'");
        for (int c = 0; c < values_.cols(); ++c) {
            if (!kinds_[c].is_discrete()) continue;
            if (kinds_[c].arity < 1) throw InputError("discrete column '" + names_[c] + "' has arity < 1");
            for (int r = 0; r < values_.rows(); ++r) {
                double v = values_(r, c);
                if (v != std::floor(v) || v < 0 || v >= kinds_[c].arity)
                    throw InputError("column '" + names_[c] + "' row " + std::to_string(r + 1) +
                                     ": code outside [0, arity)");
            }
        }
    }

    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
    std::vector<VarKind> kinds_;
};

struct GaussianSuffStat {
    Eigen::MatrixXd corr;
    int n = 0;

    int p() const noexcept { return static_cast<int>(corr.rows()); }
};

struct DiscreteSuffStat {
    // codes(s, v), column-major so one variable's samples are contiguous
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> codes;
    std::vector<int> arities;

    int n() const noexcept { return static_cast<int>(codes.rows()); }
    int p() const noexcept { return static_cast<int>(codes.cols()); }
};

enum class KindHint { Auto, Continuous, Discrete };

inline constexpr int kMaxAutoDiscreteLevels = 32;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_integer(std::string_view s, long long& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string location(std::size_t line_no, std::size_t col, const std::string& name) {
    return "line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

}  // namespace detail

/// Parse CSV text. Under Auto a column is discrete iff every cell is an integer
/// and it has at most 32 distinct values; discrete codes are re-coded densely
/// in order of first appearance.
inline Dataset parse_csv(std::istream& in, KindHint hint = KindHint::Auto) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        for (auto cell : detail::split_row(line)) names.emplace_back(cell);
        break;
    }
    if (names.empty()) throw InputError("empty CSV: missing header row");
    const std::size_t p = names.size();
    if (p < 2) throw InputError("CSV has " + std::to_string(p) + " column(s); at least 2 required");

    std::vector<std::vector<std::string>> raw(p);
    std::vector<std::size_t> row_lines;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_row(line);
        if (cells.size() != p)
            throw InputError("ragged row at line " + std::to_string(line_no) + ": expected " + std::to_string(p) +
                             " cells, found " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < p; ++c) {
            if (cells[c].empty()) throw InputError("missing value at " + detail::location(line_no, c, names[c]));
            raw[c].emplace_back(cells[c]);
        }
        row_lines.push_back(line_no);
    }
    const std::size_t n = row_lines.size();
    if (n < 1) throw InputError("CSV has no data rows");

    Eigen::MatrixXd values(n, p);
    std::vector<VarKind> kinds(p);
    for (std::size_t c = 0; c < p; ++c) {
        bool all_int = hint != KindHint::Continuous;
        std::vector<long long> ints;
        if (all_int) {
            ints.resize(n);
            for (std::size_t r = 0; r < n && all_int; ++r) all_int = detail::parse_integer(raw[c][r], ints[r]);
        }
        bool discrete = false;
        std::unordered_map<long long, int> recode;
        std::vector<int> codes;
        if (all_int) {
            codes.resize(n);
            for (std::size_t r = 0; r < n; ++r) {
                auto [it, fresh] = recode.try_emplace(ints[r], static_cast<int>(recode.size()));
                codes[r] = it->second;
            }
            discrete = hint == KindHint::Discrete || recode.size() <= kMaxAutoDiscreteLevels;
        }
        if (hint == KindHint::Discrete && !all_int) {
            for (std::size_t r = 0; r < n; ++r) {
                long long dummy;
                if (!detail::parse_integer(raw[c][r], dummy))
                    throw InputError("non-integer cell in discrete column at " +
                                     detail::location(row_lines[r], c, names[c]));
            }
        }
        if (discrete) {
            kinds[c] = VarKind::discrete(static_cast<int>(recode.size()));
            for (std::size_t r = 0; r < n; ++r) values(r, c) = codes[r];
        } else {
            kinds[c] = VarKind::continuous();
            for (std::size_t r = 0; r < n; ++r) {
                double v;
                if (!detail::parse_double(raw[c][r], v))
                    throw InputError("unparseable numeric cell '" + raw[c][r] + "' at " +
                                     detail::location(row_lines[r], c, names[c]));
                values(r, c) = v;
            }
        }
    }
    return Dataset(std::move(values), std::move(names), std::move(kinds));
}

inline Dataset load_csv(const std::string& path, KindHint hint = KindHint::Auto) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return parse_csv(in, hint);
}

/// Continuous values are written with 17 significant digits so they re-parse exactly.
inline void write_csv(std::ostream& out, const Dataset& d) {
    for (int c = 0; c < d.p(); ++c) out << (c ? "," : "") << d.names()[c];
    out << '\n';
    char buf[32];
    for (int r = 0; r < d.n(); ++r) {
        for (int c = 0; c < d.p(); ++c) {
            if (c) out << ',';
            if (d.kinds()[c].is_discrete()) {
                out << static_cast<long long>(d.values()(r, c));
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", d.values()(r, c));
                out << buf;
            }
        }
        out << '\n';
    }
}

inline void save_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    write_csv(out, d);
}

/// Pearson correlation, two-pass (means first, then centered cross products).
/// Each unordered pair is computed once and mirrored; the diagonal is set to 1.
inline GaussianSuffStat gaussian_suffstat(const Dataset& d) {
    const int n = d.n(), p = d.p();
    for (int c = 0; c < p; ++c)
        if (d.kinds()[c].is_discrete())
            throw InputError("column '" + d.names()[c] + "' is discrete; Gaussian statistics need continuous data");
    if (n < 2) throw InputError("Gaussian statistics need at least 2 samples");

    Eigen::MatrixXd centered = d.values();
    Eigen::VectorXd scale(p);
    for (int c = 0; c < p; ++c) {
        double mean = centered.col(c).sum() / n;
        centered.col(c).array() -= mean;
        double ss = centered.col(c).squaredNorm();
        if (!(ss > 0.0)) throw DegenerateStatistics("column '" + d.names()[c] + "' has zero variance");
        scale(c) = std::sqrt(ss);
    }
    GaussianSuffStat out{Eigen::MatrixXd::Identity(p, p), n};
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            double r = centered.col(i).dot(centered.col(j)) / (scale(i) * scale(j));
            r = std::clamp(r, -1.0, 1.0);
            out.corr(i, j) = r;
            out.corr(j, i) = r;
        }
    }
    return out;
}

/// Unbiased sample covariance (two-pass).
inline Eigen::MatrixXd sample_covariance(const Dataset& d) {
    if (d.n() < 2) throw InputError("covariance needs at least 2 samples");
    Eigen::MatrixXd centered = d.values().rowwise() - d.values().colwise().mean();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / (d.n() - 1);
    return (cov + cov.transpose()) * 0.5;
}

inline DiscreteSuffStat discrete_suffstat(const Dataset& d) {
    DiscreteSuffStat out;
    out.codes.resize(d.n(), d.p());
    out.arities.resize(d.p());
    for (int c = 0; c < d.p(); ++c) {
        if (!d.kinds()[c].is_discrete())
            throw InputError("column '" + d.names()[c] + "' is continuous; discrete statistics need coded data");
        out.arities[c] = d.kinds()[c].arity;
        for (int r = 0; r < d.n(); ++r) out.codes(r, c) = static_cast<int>(d.values()(r, c));
    }
    return out;
}

}  // namespace parpc
