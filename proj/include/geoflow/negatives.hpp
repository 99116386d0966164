#pragma once

#include <random>
#include <string>
#include <vector>

#include "geoflow/validate.hpp"

namespace geoflow {

class NotPerturbable : public Error {
  public:
    explicit NotPerturbable(const std::string& what) : Error(what) {}
};

class PreconditionViolated : public Error {
  public:
    explicit PreconditionViolated(const std::string& what) : Error(what) {}
};

/// A contrastive training pair: the original well-formed graph and a
/// minimally perturbed copy violating `violated`.
struct PreferencePair {
    GeoFlowGraph positive;
    GeoFlowGraph negative;
    ConstraintId violated;
};

namespace detail {

// Seeded pick that is stable across platforms: raw engine output, no
// distribution adapters.
inline std::size_t seeded_index(std::uint32_t seed, std::size_t n) {
    std::mt19937 rng(seed);
    return static_cast<std::size_t>(rng() % n);
}

// All (u, v) pairs where v is reachable from u via one or more edges.
inline std::vector<std::pair<std::string, std::string>> reachable_pairs(
    const GeoFlowGraph& g) {
    Adjacency adj(g);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t u = 0; u < adj.ids.size(); ++u) {
        auto seen = reachable(adj, {static_cast<int>(u)}, /*forward=*/true);
        for (std::size_t v = 0; v < adj.ids.size(); ++v)
            if (v != u && seen[v]) pairs.push_back({adj.ids[u], adj.ids[v]});
    }
    return pairs;
}

}  // namespace detail

/// Derive a minimally perturbed copy of a well-formed graph that violates
/// the requested constraint. The perturbation aims to leave the other
/// constraints intact where the graph admits it, but only the target is
/// guaranteed. Deterministic for a given (graph, target, seed).
inline GeoFlowGraph make_negative(const GeoFlowGraph& graph, ConstraintId target,
                                  std::uint32_t seed, const OperatorRegistry& registry,
                                  const TransformTable& table) {
    GeoFlowGraph g = canonicalized(graph);
    if (!validate(g, registry, table).well_formed)
        throw PreconditionViolated("make_negative needs a well-formed graph");

    switch (target) {
        case ConstraintId::G1_Acyclicity: {
            // add a back-edge closing a cycle; prefer one that keeps the
            // role ordering satisfied and can reuse a known operator
            struct Candidate {
                TransformEdge edge;
                int tier;
            };
            std::vector<Candidate> cands;
            for (const auto& [u, v] : detail::reachable_pairs(g)) {
                if (g.has_edge(v, u)) continue;  // would duplicate an edge
                const ConceptNode* from = g.find_node(v);
                const ConceptNode* to = g.find_node(u);
                TransformEdge e{v, u, ""};
                for (const auto& oe : g.edges) {
                    const ConceptNode* of = g.find_node(oe.from);
                    const ConceptNode* ot = g.find_node(oe.to);
                    if (of->concept_ == from->concept_ && ot->concept_ == to->concept_) {
                        e.op = oe.op;
                        break;
                    }
                }
                bool role_ok = role_order_ok(role_precedes(from->role, to->role));
                bool table_ok = table.allows(from->concept_, to->concept_);
                cands.push_back({e, (role_ok ? 0 : 2) + (table_ok ? 0 : 1)});
            }
            if (cands.empty())
                throw NotPerturbable("no node pair admits a cycle-closing edge");
            int best = cands.front().tier;
            for (const auto& c : cands) best = std::min(best, c.tier);
            std::vector<TransformEdge> pool;
            for (const auto& c : cands)
                if (c.tier == best) pool.push_back(c.edge);
            g.edges.push_back(pool[detail::seeded_index(seed, pool.size())]);
            break;
        }
        case ConstraintId::G2_RoleOrdering: {
            // reverse one edge whose procedural roles strictly increase
            std::vector<std::size_t> cands;
            for (std::size_t i = 0; i < g.edges.size(); ++i) {
                const auto& e = g.edges[i];
                if (role_precedes(g.find_node(e.from)->role, g.find_node(e.to)->role) !=
                    RoleOrder::Precedes)
                    continue;
                if (g.has_edge(e.to, e.from)) continue;
                cands.push_back(i);
            }
            if (cands.empty())
                throw NotPerturbable(
                    "no edge with strictly increasing procedural roles to reverse");
            auto& e = g.edges[cands[detail::seeded_index(seed, cands.size())]];
            std::swap(e.from, e.to);
            break;
        }
        case ConstraintId::G3_TypeCompatibility: {
            // relabel one node's concept so that some incident edge loses
            // its transform-table entry
            struct Candidate {
                std::string node;
                CoreConcept concept_;
            };
            std::vector<Candidate> cands;
            for (const auto& n : g.nodes) {
                for (CoreConcept c : all_concepts) {
                    if (c == n.concept_) continue;
                    bool breaks = false;
                    for (const auto& e : g.edges) {
                        if (e.from == n.id &&
                            !table.allows(c, g.find_node(e.to)->concept_))
                            breaks = true;
                        if (e.to == n.id &&
                            !table.allows(g.find_node(e.from)->concept_, c))
                            breaks = true;
                    }
                    if (breaks) cands.push_back({n.id, c});
                }
            }
            if (cands.empty())
                throw NotPerturbable("every concept relabel keeps all edges admissible");
            const auto& pick = cands[detail::seeded_index(seed, cands.size())];
            g.find_node(pick.node)->concept_ = pick.concept_;
            break;
        }
        case ConstraintId::G4_DataAvailability: {
            // rebind one edge to an operator name no registry defines
            if (g.edges.empty()) throw NotPerturbable("graph has no edges to rebind");
            auto& e = g.edges[detail::seeded_index(
                seed, g.edges.size())];
            e.op = "__missing__";
            break;
        }
        case ConstraintId::G5_Connectivity: {
            // cut every Measure node off from its producers
            std::vector<TransformEdge> kept;
            bool removed = false;
            for (const auto& e : g.edges) {
                if (g.find_node(e.to)->role == FunctionalRole::Measure) {
                    removed = true;
                    continue;
                }
                kept.push_back(e);
            }
            if (!removed)
                throw NotPerturbable("no Measure node has an incoming edge to delete");
            g.edges = std::move(kept);
            break;
        }
    }
    canonicalize(g);
    return g;
}

/// Build a contrastive pair from a well-formed graph. The positive side is
/// the graph unchanged; the negative is make_negative's perturbation.
inline PreferencePair make_preference_pair(const GeoFlowGraph& g, ConstraintId target,
                                           std::uint32_t seed,
                                           const OperatorRegistry& registry,
                                           const TransformTable& table) {
    PreferencePair pair;
    pair.positive = canonicalized(g);
    pair.negative = make_negative(g, target, seed, registry, table);
    pair.violated = target;
    return pair;
}

}  // namespace geoflow
