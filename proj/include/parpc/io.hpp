#pragma once

#include "parpc/error.hpp"
#include "parpc/graph.hpp"
#include "parpc/inference.hpp"
#include "parpc/skeleton.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

namespace parpc::io {

using json = nlohmann::json;

// Graph JSON: {"p": int, "edges": [[i, j, "--" | "->"], ...]}, edges ascending.

inline json to_json(const Cpdag& g) {
    json edges = json::array();
    for (int i = 0; i < g.p(); ++i)
        for (int j = 0; j < g.p(); ++j) {
            if (i < j && g.undirected(i, j)) edges.push_back({i, j, "--"});
            else if (g.directed(i, j)) edges.push_back({i, j, "->"});
        }
    std::sort(edges.begin(), edges.end(), [](const json& a, const json& b) {
        return std::pair{a[0].get<int>(), a[1].get<int>()} < std::pair{b[0].get<int>(), b[1].get<int>()};
    });
    return {{"p", g.p()}, {"edges", edges}};
}

inline json to_json(const SkeletonGraph& g) { return to_json(Cpdag::from_skeleton(g)); }

inline json to_json(const Dag& d) {
    json edges = json::array();
    for (auto [u, v] : d.edges()) edges.push_back({u, v, "->"});
    return {{"p", d.p()}, {"edges", edges}};
}

inline Cpdag cpdag_from_json(const json& j) {
    try {
        const int p = j.at("p").get<int>();
        if (p < 0) throw InputError("graph JSON: negative p");
        Cpdag g(p);
        for (const auto& e : j.at("edges")) {
            const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
            const auto kind = e.at(2).get<std::string>();
            if (a < 0 || b < 0 || a >= p || b >= p || a == b) throw InputError("graph JSON: bad edge endpoints");
            if (kind == "--") g.set_undirected(a, b);
            else if (kind == "->") g.orient(a, b);
            else throw InputError("graph JSON: unknown edge kind '" + kind + "'");
        }
        return g;
    } catch (const json::exception& e) {
        throw InputError(std::string("graph JSON: ") + e.what());
    }
}

inline Dag dag_from_json(const json& j) {
    const Cpdag g = cpdag_from_json(j);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < g.p(); ++i)
        for (int k = 0; k < g.p(); ++k) {
            if (i < k && g.undirected(i, k)) throw InputError("DAG JSON contains an undirected edge");
            if (g.directed(i, k)) edges.emplace_back(i, k);
        }
    return Dag::from_edges(g.p(), edges);
}

/// Plain edge list: one "i -- j" or "i -> j" per line.
inline std::string to_edge_list(const Cpdag& g) {
    std::ostringstream out;
    const json j = to_json(g);
    for (const auto& e : j.at("edges"))
        out << e[0].get<int>() << ' ' << e[2].get<std::string>() << ' ' << e[1].get<int>() << '\n';
    return out.str();
}

inline Cpdag cpdag_from_edge_list(std::istream& in, int p) {
    Cpdag g(p);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        int a, b;
        std::string kind;
        if (!(fields >> a)) continue;
        if (!(fields >> kind >> b) || a < 0 || b < 0 || a >= p || b >= p || a == b)
            throw InputError("edge list line " + std::to_string(line_no) + ": malformed edge");
        if (kind == "--") g.set_undirected(a, b);
        else if (kind == "->") g.orient(a, b);
        else throw InputError("edge list line " + std::to_string(line_no) + ": unknown edge kind '" + kind + "'");
    }
    return g;
}

inline json to_json(const SepsetMap& seps) {
    json out = json::array();
    for (const auto& [pair, set] : seps.entries()) out.push_back({{"i", pair.first}, {"j", pair.second}, {"sepset", set}});
    return out;
}

inline json to_json(const LevelStats& stats) {
    json out = json::array();
    for (const auto& l : stats.levels)
        out.push_back({{"level", l.level}, {"tests", l.tests}, {"removals", l.removals}, {"wall_ms", l.wall_ms}});
    return out;
}

inline json to_json(const EffectMultiset& m) {
    json effects = json::array();
    for (const auto& e : m.effects) effects.push_back({{"parents", e.parents}, {"effect", e.effect}});
    json out{{"cause", m.cause}, {"outcome", m.outcome}, {"effects", effects}};
    if (!m.degenerate.empty()) out["degenerate"] = m.degenerate;
    return out;
}

inline json to_json(const PcSimpleResult& r) {
    return {{"target", r.target}, {"members", r.members}, {"p_values", r.p_values}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("'" + path + "': " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << text;
}

// Canonical text forms feeding the digests. Edges and sepsets are emitted in
// sorted order; effects carry their exact bit patterns.

inline std::string canonical(const Cpdag& g) { return to_json(g).dump(); }

inline std::string canonical(const SkeletonGraph& g, const SepsetMap& seps) {
    return to_json(g).dump() + "|" + to_json(seps).dump();
}

inline std::string canonical(const Cpdag& g, const SepsetMap& seps) {
    return to_json(g).dump() + "|" + to_json(seps).dump();
}

inline std::string canonical(const PcSimpleResult& r) {
    return json{{"target", r.target}, {"members", r.members}}.dump();
}

inline std::string canonical(const EffectMultiset& m) {
    std::ostringstream out;
    out << m.cause << ">" << m.outcome;
    char buf[24];
    for (const auto& e : m.effects) {
        out << ";" << json(e.parents).dump() << "=";
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(e.effect)));
        out << buf;
    }
    for (const auto& d : m.degenerate) out << ";" << json(d).dump() << "=degenerate";
    return out.str();
}

/// 64-bit FNV-1a, hex encoded.
inline std::string digest(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace parpc::io
