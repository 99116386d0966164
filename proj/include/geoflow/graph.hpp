#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "geoflow/core.hpp"

namespace geoflow {

/// A node of a workflow graph: one spatial concept extracted from the
/// question, tagged with the functional role it plays. `implicit` marks
/// nodes that were not named in the question but are needed to connect
/// the workflow (e.g. a road network between two places).
struct ConceptNode {
    std::string id;
    std::string phrase;
    CoreConcept concept_ = CoreConcept::Object;
    FunctionalRole role = FunctionalRole::Support;
    bool implicit = false;
    ParamMap params;

    bool operator==(const ConceptNode&) const = default;
};

/// A directed edge: the transformation of the source concept into the
/// target concept. `op` names the operator realizing it; empty means the
/// binding is left to resolution against the transform table.
struct TransformEdge {
    std::string from;
    std::string to;
    std::string op;

    bool operator==(const TransformEdge&) const = default;
};

/// The workflow graph itself. Node ids are unique; edges reference
/// existing nodes, never self-loop, and (from, to) pairs are unique.
/// Those invariants are established by parse_graph and preserved by the
/// transformations in this library.
struct GeoFlowGraph {
    std::string question;
    std::vector<ConceptNode> nodes;
    std::vector<TransformEdge> edges;

    const ConceptNode* find_node(const std::string& id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    ConceptNode* find_node(const std::string& id) {
        for (auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    bool has_edge(const std::string& from, const std::string& to) const {
        for (const auto& e : edges)
            if (e.from == from && e.to == to) return true;
        return false;
    }
};

/// Sort nodes by id and edges by (from, to) in place. This is the
/// canonical order used by serialization and by anything that needs a
/// stable iteration order independent of how the document listed things.
inline void canonicalize(GeoFlowGraph& g) {
    std::sort(g.nodes.begin(), g.nodes.end(),
              [](const ConceptNode& a, const ConceptNode& b) { return a.id < b.id; });
    std::sort(g.edges.begin(), g.edges.end(),
              [](const TransformEdge& a, const TransformEdge& b) {
                  return a.from != b.from ? a.from < b.from : a.to < b.to;
              });
}

inline GeoFlowGraph canonicalized(GeoFlowGraph g) {
    canonicalize(g);
    return g;
}

/// Structural equality: same question, same node set, same edge set,
/// regardless of stored order.
inline bool structurally_equal(const GeoFlowGraph& a, const GeoFlowGraph& b) {
    GeoFlowGraph ca = canonicalized(a);
    GeoFlowGraph cb = canonicalized(b);
    return ca.question == cb.question && ca.nodes == cb.nodes && ca.edges == cb.edges;
}

inline bool operator==(const GeoFlowGraph& a, const GeoFlowGraph& b) {
    return structurally_equal(a, b);
}

}  // namespace geoflow
