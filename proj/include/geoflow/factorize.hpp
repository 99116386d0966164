#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/graph.hpp"
#include "geoflow/graph_io.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/transform_table.hpp"

namespace geoflow {

class FactorizeError : public Error {
  public:
    enum class Kind { UnresolvableOperator, ArityMismatch };
    FactorizeError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

/// A node of the factorized graph: either a mirror of a ConceptNode (same
/// id) or a materialized parameter (name + scalar value, unit carried on
/// dimensional values).
struct FactorNode {
    enum class Kind { Concept, Parameter };
    std::string id;
    Kind kind = Kind::Concept;
    std::string node_id;     // Concept: the mirrored ConceptNode id
    std::string param_name;  // Parameter: key in the origin node's params
    ParamValue param_value;  // Parameter: the bound scalar

    bool operator==(const FactorNode&) const = default;
};

/// A hyperedge: one operator application consuming an ordered list of
/// factor nodes (concept inputs first, then parameters) and producing
/// concept-kind outputs.
struct OperatorNode {
    std::string id;
    std::string op;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    bool operator==(const OperatorNode&) const = default;
};

struct FactorGraph {
    std::vector<FactorNode> factors;
    std::vector<OperatorNode> ops;
    GeoFlowGraph origin;

    const FactorNode* find_factor(const std::string& id) const {
        for (const auto& f : factors)
            if (f.id == id) return &f;
        return nullptr;
    }
};

/// Resolve the operator an edge is realized by: an explicit binding wins,
/// otherwise the transform table must list exactly one operator for the
/// concept pair.
inline std::string resolve_operator(const GeoFlowGraph& g, const TransformEdge& e,
                                    const TransformTable& table) {
    if (!e.op.empty()) return e.op;
    const ConceptNode* from = g.find_node(e.from);
    const ConceptNode* to = g.find_node(e.to);
    const auto& candidates = table.operators_for(from->concept_, to->concept_);
    if (candidates.size() == 1) return candidates.front();
    throw FactorizeError(
        FactorizeError::Kind::UnresolvableOperator,
        "edge " + e.from + " -> " + e.to + " has no operator binding and the table lists " +
            std::to_string(candidates.size()) + " candidates for " +
            std::string(to_string(from->concept_)) + " -> " +
            std::string(to_string(to->concept_)));
}

/// Factorize a workflow graph. Edges sharing a target node and operator
/// name merge into a single operator application; the target node's params
/// materialize as parameter factor nodes attached to the operator that
/// produces it (duplicated per operator if several do).
inline FactorGraph factorize(const GeoFlowGraph& g, const OperatorRegistry& registry,
                             const TransformTable& table) {
    FactorGraph fg;
    fg.origin = canonicalized(g);

    for (const auto& n : fg.origin.nodes) {
        FactorNode f;
        f.id = n.id;
        f.kind = FactorNode::Kind::Concept;
        f.node_id = n.id;
        fg.factors.push_back(std::move(f));
    }

    // group edges by (target, resolved operator); map keeps the result
    // deterministic regardless of edge order in the document
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> groups;
    for (const auto& e : fg.origin.edges) {
        std::string op = resolve_operator(fg.origin, e, table);
        groups[{e.to, op}].push_back(e.from);
    }

    for (auto& [key, froms] : groups) {
        const auto& [to, op_name] = key;
        std::sort(froms.begin(), froms.end());

        OperatorNode op;
        op.id = "op:" + op_name + ":" + to;
        op.op = op_name;
        op.inputs = froms;
        op.outputs = {to};

        if (const OperatorSpec* spec = registry.find(op_name)) {
            if (froms.size() != spec->signature.inputs.size())
                throw FactorizeError(FactorizeError::Kind::ArityMismatch,
                                     "operator '" + op_name + "' producing '" + to +
                                         "' has " + std::to_string(froms.size()) +
                                         " inputs, signature expects " +
                                         std::to_string(spec->signature.inputs.size()));
            if (spec->signature.outputs.size() != 1)
                throw FactorizeError(FactorizeError::Kind::ArityMismatch,
                                     "operator '" + op_name +
                                         "' signature declares multiple outputs; edges "
                                         "produce exactly one node");
        }

        const ConceptNode* target = fg.origin.find_node(to);
        for (const auto& [pname, pvalue] : target->params) {
            FactorNode f;
            f.id = op.id + ":" + pname;
            f.kind = FactorNode::Kind::Parameter;
            f.param_name = pname;
            f.param_value = pvalue;
            if (fg.find_factor(f.id))
                throw FactorizeError(FactorizeError::Kind::UnresolvableOperator,
                                     "factor id collision on '" + f.id + "'");
            op.inputs.push_back(f.id);
            fg.factors.push_back(std::move(f));
        }
        fg.ops.push_back(std::move(op));
    }
    return fg;
}

/// Invert factorization: expand each operator application back into plain
/// edges. Operator bindings on edges are restored exactly as the origin
/// document had them (an edge the table resolved stays unbound).
inline GeoFlowGraph defactorize(const FactorGraph& fg) {
    GeoFlowGraph g;
    g.question = fg.origin.question;
    g.nodes = fg.origin.nodes;
    for (const auto& op : fg.ops) {
        for (const auto& in_id : op.inputs) {
            const FactorNode* f = fg.find_factor(in_id);
            if (!f || f->kind != FactorNode::Kind::Concept) continue;
            for (const auto& out_id : op.outputs) {
                const FactorNode* out = fg.find_factor(out_id);
                TransformEdge e;
                e.from = f->node_id;
                e.to = out->node_id;
                e.op = op.op;
                for (const auto& oe : fg.origin.edges)
                    if (oe.from == e.from && oe.to == e.to) { e.op = oe.op; break; }
                g.edges.push_back(std::move(e));
            }
        }
    }
    canonicalize(g);
    return g;
}

/// Readiness of one operator application for execution.
struct OpReadiness {
    std::string op_id;
    bool executable = false;
    std::vector<std::string> missing;  // required parameter names not bound
    std::string reason;                // first failure, for diagnostics

    bool operator==(const OpReadiness&) const = default;
};

/// Check each operator application against the registry: the operator must
/// be registered, every required parameter bound (with the declared unit,
/// when dimensional), and the consumed/produced concepts must match the
/// signature (as multisets; merge order is not significant).
inline std::vector<OpReadiness> executability(const FactorGraph& fg,
                                              const OperatorRegistry& registry) {
    std::vector<OpReadiness> out;
    for (const auto& op : fg.ops) {
        OpReadiness r;
        r.op_id = op.id;
        const OperatorSpec* spec = registry.find(op.op);
        if (!spec) {
            r.reason = "operator '" + op.op + "' is not registered";
            out.push_back(std::move(r));
            continue;
        }

        std::multiset<CoreConcept> have_in, want_in(spec->signature.inputs.begin(),
                                                    spec->signature.inputs.end());
        std::map<std::string, const FactorNode*> bound_params;
        for (const auto& in_id : op.inputs) {
            const FactorNode* f = fg.find_factor(in_id);
            if (f->kind == FactorNode::Kind::Concept)
                have_in.insert(fg.origin.find_node(f->node_id)->concept_);
            else
                bound_params[f->param_name] = f;
        }
        std::multiset<CoreConcept> have_out, want_out(spec->signature.outputs.begin(),
                                                      spec->signature.outputs.end());
        for (const auto& out_id : op.outputs)
            have_out.insert(fg.origin.find_node(fg.find_factor(out_id)->node_id)->concept_);

        for (const auto& rp : spec->required_params) {
            auto it = bound_params.find(rp.name);
            if (it == bound_params.end()) {
                r.missing.push_back(rp.name);
                continue;
            }
            const ParamValue& v = it->second->param_value;
            if (!rp.unit.empty() && v.kind == ParamValue::Kind::Number &&
                !v.unit.empty() && v.unit != rp.unit && r.reason.empty())
                r.reason = "parameter '" + rp.name + "' has unit '" + v.unit +
                           "', expected '" + rp.unit + "'";
        }
        if (!r.missing.empty() && r.reason.empty()) {
            r.reason = "missing required parameter";
            for (const auto& m : r.missing) r.reason += " '" + m + "'";
        }
        if (r.reason.empty() && have_in != want_in)
            r.reason = "input concepts do not match the signature of '" + op.op + "'";
        if (r.reason.empty() && have_out != want_out)
            r.reason = "output concepts do not match the signature of '" + op.op + "'";

        r.executable = r.reason.empty();
        out.push_back(std::move(r));
    }
    return out;
}

/// JSON rendering of a factor graph, used by the factorize subcommand.
inline std::string serialize_factor_graph(const FactorGraph& fg) {
    using nlohmann::json;
    json doc;
    doc["factors"] = json::array();
    for (const auto& f : fg.factors) {
        json jf;
        jf["id"] = f.id;
        if (f.kind == FactorNode::Kind::Concept) {
            jf["kind"] = "concept";
            jf["node"] = f.node_id;
        } else {
            jf["kind"] = "parameter";
            jf["name"] = f.param_name;
            jf["value"] = detail::param_to_json(f.param_value);
        }
        doc["factors"].push_back(jf);
    }
    doc["operators"] = json::array();
    for (const auto& op : fg.ops) {
        json jo;
        jo["id"] = op.id;
        jo["operator"] = op.op;
        jo["inputs"] = op.inputs;
        jo["outputs"] = op.outputs;
        doc["operators"].push_back(jo);
    }
    return doc.dump(2) + "\n";
}

}  // namespace geoflow
