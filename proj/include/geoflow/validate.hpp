#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/factorize.hpp"
#include "geoflow/graph.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/transform_table.hpp"

namespace geoflow {

enum class ConstraintId : std::uint8_t {
    G1_Acyclicity,
    G2_RoleOrdering,
    G3_TypeCompatibility,
    G4_DataAvailability,
    G5_Connectivity,
};

inline constexpr std::array<ConstraintId, 5> all_constraints{
    ConstraintId::G1_Acyclicity,       ConstraintId::G2_RoleOrdering,
    ConstraintId::G3_TypeCompatibility, ConstraintId::G4_DataAvailability,
    ConstraintId::G5_Connectivity,
};

inline std::string_view to_string(ConstraintId c) {
    switch (c) {
        case ConstraintId::G1_Acyclicity: return "G1_Acyclicity";
        case ConstraintId::G2_RoleOrdering: return "G2_RoleOrdering";
        case ConstraintId::G3_TypeCompatibility: return "G3_TypeCompatibility";
        case ConstraintId::G4_DataAvailability: return "G4_DataAvailability";
        case ConstraintId::G5_Connectivity: return "G5_Connectivity";
    }
    return "?";
}

inline std::optional<ConstraintId> constraint_from_string(std::string_view s) {
    for (auto c : all_constraints)
        if (to_string(c) == s) return c;
    // short forms, as the pairs subcommand accepts them: g1 .. g5
    if (s == "g1" || s == "G1") return ConstraintId::G1_Acyclicity;
    if (s == "g2" || s == "G2") return ConstraintId::G2_RoleOrdering;
    if (s == "g3" || s == "G3") return ConstraintId::G3_TypeCompatibility;
    if (s == "g4" || s == "G4") return ConstraintId::G4_DataAvailability;
    if (s == "g5" || s == "G5") return ConstraintId::G5_Connectivity;
    return std::nullopt;
}

struct Violation {
    ConstraintId constraint;
    std::string witness;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    bool well_formed = false;
    std::vector<Violation> violations;

    bool violates(ConstraintId c) const {
        for (const auto& v : violations)
            if (v.constraint == c) return true;
        return false;
    }
};

inline std::string serialize_report(const ValidationReport& report) {
    using nlohmann::json;
    json doc;
    doc["well_formed"] = report.well_formed;
    doc["violations"] = json::array();
    for (const auto& v : report.violations)
        doc["violations"].push_back(json{{"constraint", std::string(to_string(v.constraint))},
                                         {"witness", v.witness}});
    return doc.dump(2) + "\n";
}

namespace detail {

// Adjacency over canonical node order, used by the acyclicity and
// connectivity checks.
struct Adjacency {
    std::vector<std::string> ids;
    std::map<std::string, int> index;
    std::vector<std::vector<int>> out, in;

    explicit Adjacency(const GeoFlowGraph& g) {
        for (const auto& n : g.nodes) {
            index[n.id] = static_cast<int>(ids.size());
            ids.push_back(n.id);
        }
        out.resize(ids.size());
        in.resize(ids.size());
        for (const auto& e : g.edges) {
            int u = index.at(e.from), v = index.at(e.to);
            out[u].push_back(v);
            in[v].push_back(u);
        }
        for (auto& a : out) std::sort(a.begin(), a.end());
        for (auto& a : in) std::sort(a.begin(), a.end());
    }
};

// Tarjan's strongly connected components, iterative to keep deep chains
// off the call stack. Components come out in a deterministic order given
// the canonical node order.
inline std::vector<std::vector<int>> strongly_connected(const Adjacency& adj) {
    const int n = static_cast<int>(adj.ids.size());
    std::vector<int> idx(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    struct Frame { int v; std::size_t child; };
    for (int root = 0; root < n; ++root) {
        if (idx[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        idx[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, child] = frames.back();
            if (child < adj.out[v].size()) {
                int w = adj.out[v][child++];
                if (idx[w] == -1) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
            } else {
                if (low[v] == idx[v]) {
                    std::vector<int> comp;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comp.push_back(w);
                    } while (w != v);
                    std::sort(comp.begin(), comp.end());
                    components.push_back(std::move(comp));
                }
                int finished = v;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().v] = std::min(low[frames.back().v], low[finished]);
            }
        }
    }
    std::sort(components.begin(), components.end());
    return components;
}

// Extract one concrete cycle inside a strongly connected component by
// walking smallest successors from its smallest node.
inline std::string cycle_witness(const Adjacency& adj, const std::vector<int>& comp) {
    std::set<int> members(comp.begin(), comp.end());
    std::vector<int> path{comp.front()};
    std::map<int, std::size_t> seen{{comp.front(), 0}};
    for (;;) {
        int cur = path.back();
        int next = -1;
        for (int w : adj.out[cur])
            if (members.count(w)) { next = w; break; }
        auto it = seen.find(next);
        if (it != seen.end()) {
            std::string s = "cycle [";
            for (std::size_t i = it->second; i < path.size(); ++i) {
                if (i > it->second) s += " -> ";
                s += adj.ids[path[i]];
            }
            s += " -> " + adj.ids[next] + "]";
            return s;
        }
        seen[next] = path.size();
        path.push_back(next);
    }
}

inline std::vector<bool> reachable(const Adjacency& adj,
                                   const std::vector<int>& sources, bool forward) {
    std::vector<bool> seen(adj.ids.size(), false);
    std::vector<int> queue = sources;
    for (int s : sources) seen[s] = true;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int w : forward ? adj.out[v] : adj.in[v])
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
    }
    return seen;
}

}  // namespace detail

/// Check all five well-formedness constraints and report every violation,
/// not just the first. The input order of nodes and edges never affects
/// the report: everything runs over the canonical order.
inline ValidationReport validate(const GeoFlowGraph& graph, const OperatorRegistry& registry,
                                 const TransformTable& table) {
    GeoFlowGraph g = canonicalized(graph);
    ValidationReport report;
    detail::Adjacency adj(g);

    // G1: no directed cycles
    for (const auto& comp : detail::strongly_connected(adj))
        if (comp.size() > 1)
            report.violations.push_back(
                {ConstraintId::G1_Acyclicity, detail::cycle_witness(adj, comp)});

    // G2: roles may never decrease along an edge
    for (const auto& e : g.edges) {
        const ConceptNode* from = g.find_node(e.from);
        const ConceptNode* to = g.find_node(e.to);
        if (role_precedes(from->role, to->role) == RoleOrder::Fails)
            report.violations.push_back(
                {ConstraintId::G2_RoleOrdering,
                 "edge " + e.from + " -> " + e.to + ": role " +
                     std::string(to_string(from->role)) + " does not precede " +
                     std::string(to_string(to->role))});
    }

    // G3: each concept transformation must be admissible
    for (const auto& e : g.edges) {
        const ConceptNode* from = g.find_node(e.from);
        const ConceptNode* to = g.find_node(e.to);
        if (!table.allows(from->concept_, to->concept_))
            report.violations.push_back(
                {ConstraintId::G3_TypeCompatibility,
                 "edge " + e.from + " -> " + e.to + ": no admissible transformation " +
                     std::string(to_string(from->concept_)) + " -> " +
                     std::string(to_string(to->concept_))});
    }

    // G4: the factorized form must be executable
    try {
        FactorGraph fg = factorize(g, registry, table);
        for (const auto& r : executability(fg, registry))
            if (!r.executable)
                report.violations.push_back(
                    {ConstraintId::G4_DataAvailability, r.op_id + ": " + r.reason});
    } catch (const FactorizeError& e) {
        report.violations.push_back({ConstraintId::G4_DataAvailability, e.what()});
    }

    // G5: every node must sit on a path from a contextual node to a
    // Measure node (a node counts as its own path endpoint)
    if (g.nodes.empty()) {
        report.violations.push_back(
            {ConstraintId::G5_Connectivity,
             "graph is empty: a workflow needs a contextual node and a Measure node"});
    } else {
        std::vector<int> contextual, measures;
        for (const auto& n : g.nodes) {
            if (role_kind(n.role) == RoleKind::Contextual)
                contextual.push_back(adj.index.at(n.id));
            if (n.role == FunctionalRole::Measure) measures.push_back(adj.index.at(n.id));
        }
        auto from_context = detail::reachable(adj, contextual, /*forward=*/true);
        auto to_measure = detail::reachable(adj, measures, /*forward=*/false);
        for (const auto& n : g.nodes) {
            int i = adj.index.at(n.id);
            if (!from_context[i])
                report.violations.push_back(
                    {ConstraintId::G5_Connectivity,
                     "node " + n.id + " is not reachable from any contextual node"});
            else if (!to_measure[i])
                report.violations.push_back(
                    {ConstraintId::G5_Connectivity,
                     "node " + n.id + " cannot reach any Measure node"});
        }
    }

    std::stable_sort(report.violations.begin(), report.violations.end(),
                     [](const Violation& a, const Violation& b) {
                         return a.constraint < b.constraint;
                     });
    report.well_formed = report.violations.empty();
    return report;
}

}  // namespace geoflow
