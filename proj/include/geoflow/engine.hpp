#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/factorize.hpp"
#include "geoflow/graph_io.hpp"
#include "geoflow/operators.hpp"
#include "geoflow/registry.hpp"
#include "geoflow/values.hpp"

namespace geoflow {

class EngineError : public Error {
  public:
    enum class Kind {
        UnboundSource,    // a source factor has no initial binding
        CyclicFactorGraph,
        NoMeasureValues,  // nothing to render an answer from
    };

    EngineError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

namespace detail {

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[size_t(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace detail

/// One executed operator, with the values that crossed it. Recorded even
/// for the step that failed (inputs only, no outputs).
struct StepRecord {
    int index = 0;
    std::string op_id;
    std::string op_name;
    std::vector<std::pair<std::string, Value>> inputs;
    ParamMap params;
    std::vector<std::pair<std::string, Value>> outputs;
    double duration_ms = 0.0;
};

struct ExecutionFailure {
    std::string op_id;
    std::string message;
};

struct TraceHeader {
    std::string graph_hash;       // over the canonical graph serialization
    std::string fixtures_fingerprint;
    std::string registry_version;
};

struct ExecutionResult {
    TraceHeader header;
    std::map<std::string, Value> bindings;
    std::vector<StepRecord> steps;
    std::optional<ExecutionFailure> failure;

    bool ok() const { return !failure.has_value(); }

    const Value* binding(const std::string& node_id) const {
        auto it = bindings.find(node_id);
        return it == bindings.end() ? nullptr : &it->second;
    }
};

struct ExecOptions {
    bool timestamps = false;             // off: duration_ms pinned to 0 for
                                         // byte-identical traces across runs
    std::string fixtures_fingerprint;    // caller-computed, "" when unknown
};

namespace detail {

/// Scheduling key: operators whose outputs sit earlier in the procedural
/// order run first; contextual outputs count as earliest of all. Ties break
/// on operator id, so the order is a pure function of the factor graph.
inline int op_priority(const OperatorNode& op, const GeoFlowGraph& origin) {
    int best = 1 + procedural_rank(FunctionalRole::Measure);
    for (const auto& out_id : op.outputs) {
        const ConceptNode* n = origin.find_node(out_id);
        if (!n) continue;
        int rank = role_kind(n->role) == RoleKind::Contextual
                       ? 0
                       : 1 + procedural_rank(n->role);
        best = std::min(best, rank);
    }
    return best;
}

}  // namespace detail

/// Deterministic execution order over the operator nodes of a factor graph.
/// Ready operators (all concept inputs available) are drained smallest
/// priority first. Throws on a cyclic factor graph.
inline std::vector<const OperatorNode*> topo_order(const FactorGraph& fg) {
    // producer map: concept factor id -> operator that outputs it
    std::map<std::string, const OperatorNode*> producer;
    for (const auto& op : fg.ops)
        for (const auto& out : op.outputs) producer[out] = &op;

    std::set<std::string> available;  // resolved concept factors
    for (const auto& f : fg.factors)
        if (f.kind == FactorNode::Kind::Concept && !producer.count(f.id))
            available.insert(f.id);

    auto ready = [&](const OperatorNode& op) {
        for (const auto& in : op.inputs) {
            const FactorNode* f = fg.find_factor(in);
            if (f && f->kind == FactorNode::Kind::Parameter) continue;
            if (!available.count(in)) return false;
        }
        return true;
    };

    std::vector<const OperatorNode*> pending;
    for (const auto& op : fg.ops) pending.push_back(&op);
    std::vector<const OperatorNode*> order;
    while (!pending.empty()) {
        const OperatorNode* pick = nullptr;
        int pick_priority = 0;
        for (const OperatorNode* op : pending) {
            if (!ready(*op)) continue;
            int pr = detail::op_priority(*op, fg.origin);
            if (!pick || pr < pick_priority ||
                (pr == pick_priority && op->id < pick->id)) {
                pick = op;
                pick_priority = pr;
            }
        }
        if (!pick)
            throw EngineError(EngineError::Kind::CyclicFactorGraph,
                              "no runnable operator; factor graph is cyclic");
        order.push_back(pick);
        for (const auto& out : pick->outputs) available.insert(out);
        pending.erase(std::find(pending.begin(), pending.end(), pick));
    }
    return order;
}

/// Run a factor graph: bind sources from `initial`, then execute operators
/// in topo_order. Execution stops at the first failing step; the partial
/// trace and the failure are both part of the result rather than an
/// exception, so callers can always inspect what ran.
inline ExecutionResult execute(const FactorGraph& fg,
                               const std::map<std::string, Value>& initial,
                               const OperatorRegistry& registry, Provider* provider,
                               LocalContext* context,
                               const OperatorImpls& impls = default_operator_impls(),
                               const ExecOptions& options = {}) {
    ExecutionResult res;
    res.header.graph_hash = detail::fnv1a64_hex(serialize_graph(fg.origin));
    res.header.fixtures_fingerprint = options.fixtures_fingerprint;
    res.header.registry_version = registry.version();

    std::map<std::string, const OperatorNode*> producer;
    for (const auto& op : fg.ops)
        for (const auto& out : op.outputs) producer[out] = &op;

    // Sources must arrive pre-bound; operator outputs must not.
    for (const auto& f : fg.factors) {
        if (f.kind != FactorNode::Kind::Concept) continue;
        bool has_producer = producer.count(f.id) > 0;
        bool has_initial = initial.count(f.id) > 0;
        if (!has_producer && !has_initial)
            throw EngineError(EngineError::Kind::UnboundSource,
                              "source node '" + f.id + "' has no initial value");
        if (has_initial) res.bindings.emplace(f.id, initial.at(f.id));
    }

    std::vector<const OperatorNode*> order = topo_order(fg);

    int index = 0;
    for (const OperatorNode* op : order) {
        StepRecord step;
        step.index = index++;
        step.op_id = op->id;
        step.op_name = op->op;

        ExecArgs args;
        args.provider = provider;
        args.context = context;
        for (const auto& in_id : op->inputs) {
            const FactorNode* f = fg.find_factor(in_id);
            if (f && f->kind == FactorNode::Kind::Parameter) {
                args.params.emplace(f->param_name, f->param_value);
                continue;
            }
            auto bound = res.bindings.find(in_id);
            if (bound == res.bindings.end()) {
                res.failure = ExecutionFailure{op->id,
                                               "input '" + in_id + "' is unbound"};
                res.steps.push_back(std::move(step));
                return res;
            }
            OpInput oi;
            oi.node_id = in_id;
            oi.value = &bound->second;
            if (const ConceptNode* n = fg.origin.find_node(in_id)) {
                oi.concept_ = n->concept_;
                oi.role = n->role;
            }
            args.inputs.push_back(std::move(oi));
            step.inputs.emplace_back(in_id, bound->second);
        }
        step.params = args.params;
        for (const auto& out_id : op->outputs)
            args.output_nodes.push_back(fg.origin.find_node(out_id));

        const OperatorImpl* impl = impls.find(op->op);
        if (!impl) {
            res.failure =
                ExecutionFailure{op->id, "no implementation for operator '" +
                                             op->op + "'"};
            res.steps.push_back(std::move(step));
            return res;
        }

        auto started = std::chrono::steady_clock::now();
        std::vector<Value> produced;
        try {
            produced = (*impl)(args);
        } catch (const Error& e) {
            res.failure = ExecutionFailure{op->id, e.what()};
            res.steps.push_back(std::move(step));
            return res;
        } catch (const std::exception& e) {
            res.failure = ExecutionFailure{op->id, std::string("unexpected: ") + e.what()};
            res.steps.push_back(std::move(step));
            return res;
        }
        if (options.timestamps) {
            auto ended = std::chrono::steady_clock::now();
            step.duration_ms =
                std::chrono::duration<double, std::milli>(ended - started).count();
        }

        if (produced.size() != op->outputs.size()) {
            res.failure = ExecutionFailure{
                op->id, "operator produced " + std::to_string(produced.size()) +
                            " values for " + std::to_string(op->outputs.size()) +
                            " outputs"};
            res.steps.push_back(std::move(step));
            return res;
        }
        for (std::size_t i = 0; i < produced.size(); ++i) {
            const std::string& out_id = op->outputs[i];
            if (res.bindings.count(out_id)) {  // write-once discipline
                res.failure = ExecutionFailure{
                    op->id, "node '" + out_id + "' is already bound"};
                res.steps.push_back(std::move(step));
                return res;
            }
            res.bindings.emplace(out_id, produced[i]);
            step.outputs.emplace_back(out_id, std::move(produced[i]));
        }
        res.steps.push_back(std::move(step));
    }
    return res;
}

// --------------------------------------------------------------- grounding

/// Initial bindings for every source node of a factor graph:
///   - lat/lon parameters on the node win and become a point;
///   - otherwise a non-empty phrase is geocoded (resolving to a full place
///     record when the hit names one);
///   - otherwise (or when the lookup misses) the phrase itself is the value,
///     which is what period markers like "2025" want anyway.
inline std::map<std::string, Value> ground_sources(const FactorGraph& fg,
                                                   Provider* provider) {
    std::map<std::string, const OperatorNode*> producer;
    for (const auto& op : fg.ops)
        for (const auto& out : op.outputs) producer[out] = &op;

    std::map<std::string, Value> initial;
    for (const auto& f : fg.factors) {
        if (f.kind != FactorNode::Kind::Concept || producer.count(f.id)) continue;
        const ConceptNode* n = fg.origin.find_node(f.id);
        if (!n) continue;
        auto lat = n->params.find("lat");
        auto lon = n->params.find("lon");
        if (lat != n->params.end() && lon != n->params.end() &&
            lat->second.kind == ParamValue::Kind::Number &&
            lon->second.kind == ParamValue::Kind::Number) {
            initial.emplace(f.id, GeoPoint(lat->second.number, lon->second.number));
            continue;
        }
        if (!n->phrase.empty() && provider) {
            ProviderResponse r = provider->handle(GeocodeRequest{n->phrase});
            if (const auto* pt = std::get_if<PointResult>(&r)) {
                if (!pt->place_id.empty()) {
                    ProviderResponse d =
                        provider->handle(PlaceDetailsRequest{pt->place_id});
                    if (const auto* pl = std::get_if<PlaceResult>(&d)) {
                        initial.emplace(f.id, pl->place);
                        continue;
                    }
                }
                initial.emplace(f.id, pt->point);
                continue;
            }
        }
        initial.emplace(f.id, Text{n->phrase});
    }
    return initial;
}

// ----------------------------------------------------------- trace output

inline nlohmann::json trace_to_json(const ExecutionResult& res) {
    using nlohmann::json;
    json steps = json::array();
    for (const auto& s : res.steps) {
        json inputs = json::object();
        for (const auto& [id, v] : s.inputs) inputs[id] = value_to_json(v);
        json params = json::object();
        for (const auto& [name, p] : s.params) params[name] = detail::param_to_json(p);
        json outputs = json::object();
        for (const auto& [id, v] : s.outputs) outputs[id] = value_to_json(v);
        steps.push_back(json{{"step", s.index},
                             {"op_id", s.op_id},
                             {"op", s.op_name},
                             {"inputs", std::move(inputs)},
                             {"params", std::move(params)},
                             {"outputs", std::move(outputs)},
                             {"duration_ms", s.duration_ms}});
    }
    json out{{"header",
              {{"graph_hash", res.header.graph_hash},
               {"fixtures_fingerprint", res.header.fixtures_fingerprint},
               {"registry_version", res.header.registry_version}}},
             {"steps", std::move(steps)}};
    if (res.failure)
        out["failure"] =
            nlohmann::json{{"op_id", res.failure->op_id}, {"message", res.failure->message}};
    return out;
}

/// Newline-delimited trace: a header record, then one record per step, then
/// a failure record when execution halted early. Compact dumps keep the file
/// byte-identical across runs (durations are pinned to 0 unless timestamps
/// were requested).
inline std::string serialize_trace(const ExecutionResult& res) {
    nlohmann::json doc = trace_to_json(res);
    std::string out = nlohmann::json{{"header", doc["header"]}}.dump() + "\n";
    for (const auto& step : doc["steps"]) out += step.dump() + "\n";
    if (doc.contains("failure"))
        out += nlohmann::json{{"failure", doc["failure"]}}.dump() + "\n";
    return out;
}

// ---------------------------------------------------------------- answers

struct GroundedAnswer {
    std::string answer;        // one line per Measure node, canonical id order
    nlohmann::json evidence;   // node id -> raw value
    std::string trace_path;    // where the trace landed, "" when not written
};

inline GroundedAnswer render_answer(const GeoFlowGraph& graph,
                                    const ExecutionResult& res) {
    GeoFlowGraph g = canonicalized(graph);
    GroundedAnswer out;
    out.evidence = nlohmann::json::object();
    for (const auto& n : g.nodes) {
        if (n.role != FunctionalRole::Measure) continue;
        const Value* v = res.binding(n.id);
        if (!v) continue;
        std::string label = n.phrase.empty() ? n.id : n.phrase;
        if (!out.answer.empty()) out.answer += "\n";
        out.answer += label + ": " + render_value(*v);
        out.evidence[n.id] = value_to_json(*v);
    }
    if (out.answer.empty())
        throw EngineError(EngineError::Kind::NoMeasureValues,
                          "no Measure node holds a value");
    return out;
}

inline nlohmann::json answer_to_json(const GroundedAnswer& a) {
    return nlohmann::json{
        {"answer", a.answer}, {"evidence", a.evidence}, {"trace_path", a.trace_path}};
}

}  // namespace geoflow
