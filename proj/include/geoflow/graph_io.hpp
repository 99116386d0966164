#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "geoflow/graph.hpp"

namespace geoflow {

/// Raised when a graph document cannot be parsed. `kind` distinguishes
/// syntax problems from the structural ones so tests and tools can react
/// precisely; `what()` always carries a human-readable locus.
class ParseError : public Error {
  public:
    enum class Kind {
        MalformedDocument,
        UnknownConcept,
        UnknownRole,
        DanglingEdge,
        DuplicateNodeId,
        SelfLoop,
        DuplicateEdge,
    };

    ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known)
            throw ParseError(ParseError::Kind::MalformedDocument,
                             "unknown key '" + it.key() + "' in " + where);
    }
}

inline ParamValue parse_param(const json& j, const std::string& where) {
    if (j.is_number()) return ParamValue::num(j.get<double>());
    if (j.is_string()) return ParamValue::str(j.get<std::string>());
    if (j.is_object()) {
        reject_unknown_keys(j, {"value", "unit"}, where);
        if (!j.contains("value") || !j["value"].is_number())
            throw ParseError(ParseError::Kind::MalformedDocument,
                             where + ": parameter object needs a numeric 'value'");
        std::string unit;
        if (j.contains("unit")) {
            if (!j["unit"].is_string())
                throw ParseError(ParseError::Kind::MalformedDocument,
                                 where + ": parameter 'unit' must be a string");
            unit = j["unit"].get<std::string>();
        }
        return ParamValue::num(j["value"].get<double>(), unit);
    }
    throw ParseError(ParseError::Kind::MalformedDocument,
                     where + ": parameter must be a number, string, or {value, unit}");
}

inline json param_to_json(const ParamValue& p) {
    if (p.kind == ParamValue::Kind::Text) return p.text;
    if (p.unit.empty()) return p.number;
    return json{{"unit", p.unit}, {"value", p.number}};
}

inline std::string require_string(const json& obj, const char* key,
                                  const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw ParseError(ParseError::Kind::MalformedDocument,
                         where + ": missing or non-string '" + key + "'");
    return obj[key].get<std::string>();
}

}  // namespace detail

/// Parse a graph document. Rejects syntactically broken JSON, unknown
/// keys, unknown concept/role names, duplicate node ids, edges that
/// reference absent nodes, self-loops, and duplicate (from, to) pairs.
inline GeoFlowGraph parse_graph(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(ParseError::Kind::MalformedDocument,
                         std::string("not a valid document: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError(ParseError::Kind::MalformedDocument,
                         "top level must be an object");
    detail::reject_unknown_keys(doc, {"question", "nodes", "edges"}, "document");

    GeoFlowGraph g;
    if (doc.contains("question")) {
        if (!doc["question"].is_string())
            throw ParseError(ParseError::Kind::MalformedDocument,
                             "'question' must be a string");
        g.question = doc["question"].get<std::string>();
    }

    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        throw ParseError(ParseError::Kind::MalformedDocument,
                         "'nodes' must be an array");
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object())
            throw ParseError(ParseError::Kind::MalformedDocument,
                             "node entries must be objects");
        detail::reject_unknown_keys(
            jn, {"id", "phrase", "concept", "role", "implicit", "params"}, "node");
        ConceptNode n;
        n.id = detail::require_string(jn, "id", "node");
        if (n.id.empty())
            throw ParseError(ParseError::Kind::MalformedDocument,
                             "node id must be non-empty");
        const std::string where = "node '" + n.id + "'";
        if (jn.contains("phrase")) n.phrase = detail::require_string(jn, "phrase", where);

        std::string cname = detail::require_string(jn, "concept", where);
        auto c = concept_from_string(cname);
        if (!c)
            throw ParseError(ParseError::Kind::UnknownConcept,
                             where + ": unknown concept '" + cname + "'");
        n.concept_ = *c;

        std::string rname = detail::require_string(jn, "role", where);
        auto r = role_from_string(rname);
        if (!r)
            throw ParseError(ParseError::Kind::UnknownRole,
                             where + ": unknown role '" + rname + "'");
        n.role = *r;

        if (jn.contains("implicit")) {
            if (!jn["implicit"].is_boolean())
                throw ParseError(ParseError::Kind::MalformedDocument,
                                 where + ": 'implicit' must be a boolean");
            n.implicit = jn["implicit"].get<bool>();
        }
        if (jn.contains("params")) {
            if (!jn["params"].is_object())
                throw ParseError(ParseError::Kind::MalformedDocument,
                                 where + ": 'params' must be an object");
            for (auto it = jn["params"].begin(); it != jn["params"].end(); ++it)
                n.params[it.key()] =
                    detail::parse_param(it.value(), where + " param '" + it.key() + "'");
        }
        if (g.find_node(n.id))
            throw ParseError(ParseError::Kind::DuplicateNodeId,
                             "duplicate node id '" + n.id + "'");
        g.nodes.push_back(std::move(n));
    }

    if (!doc.contains("edges") || !doc["edges"].is_array())
        throw ParseError(ParseError::Kind::MalformedDocument,
                         "'edges' must be an array");
    for (const auto& je : doc["edges"]) {
        if (!je.is_object())
            throw ParseError(ParseError::Kind::MalformedDocument,
                             "edge entries must be objects");
        detail::reject_unknown_keys(je, {"from", "to", "operator"}, "edge");
        TransformEdge e;
        e.from = detail::require_string(je, "from", "edge");
        e.to = detail::require_string(je, "to", "edge");
        const std::string where = "edge " + e.from + " -> " + e.to;
        if (je.contains("operator")) e.op = detail::require_string(je, "operator", where);
        if (!g.find_node(e.from))
            throw ParseError(ParseError::Kind::DanglingEdge,
                             where + ": no node '" + e.from + "'");
        if (!g.find_node(e.to))
            throw ParseError(ParseError::Kind::DanglingEdge,
                             where + ": no node '" + e.to + "'");
        if (e.from == e.to)
            throw ParseError(ParseError::Kind::SelfLoop,
                             "self-loop on node '" + e.from + "'");
        if (g.has_edge(e.from, e.to))
            throw ParseError(ParseError::Kind::DuplicateEdge,
                             "duplicate " + where);
        g.edges.push_back(std::move(e));
    }
    return g;
}

/// Serialize a graph to its canonical textual form: nodes sorted by id,
/// edges sorted by (from, to), keys in fixed order, numbers rendered with
/// shortest round-trip formatting. parse_graph(serialize_graph(g)) always
/// returns a graph structurally equal to g.
inline std::string serialize_graph(const GeoFlowGraph& g) {
    using detail::json;
    GeoFlowGraph cg = canonicalized(g);
    json doc;
    doc["question"] = cg.question;
    doc["nodes"] = json::array();
    for (const auto& n : cg.nodes) {
        json jn;
        jn["id"] = n.id;
        jn["phrase"] = n.phrase;
        jn["concept"] = std::string(to_string(n.concept_));
        jn["role"] = std::string(to_string(n.role));
        jn["implicit"] = n.implicit;
        json jp = json::object();
        for (const auto& [k, v] : n.params) jp[k] = detail::param_to_json(v);
        jn["params"] = jp;
        doc["nodes"].push_back(jn);
    }
    doc["edges"] = json::array();
    for (const auto& e : cg.edges) {
        json je;
        je["from"] = e.from;
        je["to"] = e.to;
        if (!e.op.empty()) je["operator"] = e.op;
        doc["edges"].push_back(je);
    }
    return doc.dump(2) + "\n";
}

}  // namespace geoflow
