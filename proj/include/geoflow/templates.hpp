#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/graph_io.hpp"
#include "geoflow/validate.hpp"

namespace geoflow {

class TemplateError : public Error {
  public:
    enum class Kind {
        MalformedLibrary,     // bad JSON shape, duplicate names, ill-formed body
        BadPort,              // port names a missing/unsuitable node
        UnknownTemplate,
        UnknownPort,
        UnknownSlot,          // a slot value names no marker in the body
        UnboundSlot,          // a $marker survived instantiation
        PortTypeMismatch,     // wired producer violates the port's contract
        CompositionIllFormed, // composed graph fails validation
    };

    TemplateError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

/// An input port is a placeholder source node in the body. The declared
/// concept/role is the contract a wired-in producer must satisfy; until
/// something is wired in, the placeholder itself (a contextual node) keeps
/// the body standalone well-formed.
struct InPort {
    std::string name;
    std::string node_id;
    CoreConcept concept_ = CoreConcept::Location;
    FunctionalRole role = FunctionalRole::Extent;
};

struct OutPort {
    std::string name;
    std::string node_id;
};

struct Template {
    std::string name;
    std::string description;
    std::vector<std::string> keywords;
    GeoFlowGraph body;  // canonical, standalone well-formed
    std::vector<InPort> in_ports;
    std::vector<OutPort> out_ports;
    std::set<std::string> slots;  // marker names, without the '$'

    const InPort* find_in_port(const std::string& port) const {
        for (const auto& p : in_ports)
            if (p.name == port) return &p;
        return nullptr;
    }
    const OutPort* find_out_port(const std::string& port) const {
        for (const auto& p : out_ports)
            if (p.name == port) return &p;
        return nullptr;
    }
};

namespace detail {

/// Slot markers look like "$city": dollar sign plus an identifier.
inline void collect_slots(const std::string& text, std::set<std::string>& out) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '$') continue;
        std::size_t j = i + 1;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
            ++j;
        if (j > i + 1) out.insert(text.substr(i + 1, j - i - 1));
        i = j - 1;
    }
}

inline std::set<std::string> scan_slots(const GeoFlowGraph& g) {
    std::set<std::string> slots;
    collect_slots(g.question, slots);
    for (const auto& n : g.nodes) {
        collect_slots(n.phrase, slots);
        for (const auto& [key, p] : n.params) {
            (void)key;
            if (p.kind == ParamValue::Kind::Text) collect_slots(p.text, slots);
        }
    }
    return slots;
}

inline std::string substitute_slots(const std::string& text,
                                    const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '$') {
            out += text[i];
            continue;
        }
        std::size_t j = i + 1;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
            ++j;
        std::string name = text.substr(i + 1, j - i - 1);
        auto it = values.find(name);
        if (!name.empty() && it != values.end()) {
            out += it->second;
            i = j - 1;
        } else {
            out += text[i];  // leave unknown/empty markers alone
        }
    }
    return out;
}

}  // namespace detail

class TemplateLibrary {
  public:
    void add(Template t) {
        if (find(t.name))
            throw TemplateError(TemplateError::Kind::MalformedLibrary,
                                "duplicate template '" + t.name + "'");
        templates_.push_back(std::move(t));
    }

    const Template* find(const std::string& name) const {
        for (const auto& t : templates_)
            if (t.name == name) return &t;
        return nullptr;
    }

    const std::vector<Template>& all() const { return templates_; }
    std::size_t size() const { return templates_.size(); }

  private:
    std::vector<Template> templates_;
};

/// Parse and verify one library file. Every body must be standalone
/// well-formed, and every declared port must hold its side of the bargain:
/// in-port nodes are contextual sources matching the declared concept whose
/// consumers all accept the declared role.
inline TemplateLibrary load_template_library(const std::string& text,
                                             const OperatorRegistry& registry,
                                             const TransformTable& table) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            std::string("bad JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_array())
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            "expected an object with a 'templates' array");

    TemplateLibrary lib;
    for (const auto& jt : doc["templates"]) {
        if (!jt.is_object() || !jt.contains("name") || !jt["name"].is_string() ||
            !jt.contains("body"))
            throw TemplateError(TemplateError::Kind::MalformedLibrary,
                                "template entries need 'name' and 'body'");
        Template t;
        t.name = jt["name"].get<std::string>();
        if (jt.contains("description")) t.description = jt["description"].get<std::string>();
        if (jt.contains("keywords"))
            for (const auto& k : jt["keywords"]) t.keywords.push_back(k.get<std::string>());

        try {
            t.body = parse_graph(jt["body"].dump());
        } catch (const ParseError& e) {
            throw TemplateError(TemplateError::Kind::MalformedLibrary,
                                "template '" + t.name + "': " + e.what());
        }
        ValidationReport report = validate(t.body, registry, table);
        if (!report.well_formed)
            throw TemplateError(TemplateError::Kind::MalformedLibrary,
                                "template '" + t.name + "' body is not well-formed: " +
                                    report.violations.front().witness);

        if (jt.contains("in_ports")) {
            for (const auto& jp : jt["in_ports"]) {
                InPort port;
                port.name = jp.at("name").get<std::string>();
                port.node_id = jp.at("node").get<std::string>();
                auto concept_ = concept_from_string(jp.at("concept").get<std::string>());
                auto role = role_from_string(jp.at("role").get<std::string>());
                if (!concept_ || !role)
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': in port '" +
                                            port.name +
                                            "' has an unknown concept or role");
                port.concept_ = *concept_;
                port.role = *role;
                const ConceptNode* node = t.body.find_node(port.node_id);
                if (!node)
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': in port '" +
                                            port.name + "' names missing node '" +
                                            port.node_id + "'");
                bool is_source = true;
                for (const auto& e : t.body.edges)
                    if (e.to == port.node_id) is_source = false;
                if (!is_source)
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': in port node '" +
                                            port.node_id + "' has incoming edges");
                if (role_kind(node->role) != RoleKind::Contextual)
                    throw TemplateError(
                        TemplateError::Kind::BadPort,
                        "template '" + t.name + "': in port node '" + port.node_id +
                            "' must carry a contextual role while unwired");
                if (node->concept_ != port.concept_)
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': in port '" +
                                            port.name + "' concept differs from node");
                for (const auto& e : t.body.edges) {
                    if (e.from != port.node_id) continue;
                    const ConceptNode* consumer = t.body.find_node(e.to);
                    if (!consumer) continue;
                    if (!role_order_ok(role_precedes(port.role, consumer->role)))
                        throw TemplateError(
                            TemplateError::Kind::BadPort,
                            "template '" + t.name + "': a producer with role " +
                                std::string(to_string(port.role)) +
                                " would break the edge to '" + e.to + "'");
                }
                if (t.find_in_port(port.name))
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': duplicate in port '" +
                                            port.name + "'");
                t.in_ports.push_back(std::move(port));
            }
        }
        if (jt.contains("out_ports")) {
            for (const auto& jp : jt["out_ports"]) {
                OutPort port;
                port.name = jp.at("name").get<std::string>();
                port.node_id = jp.at("node").get<std::string>();
                if (!t.body.find_node(port.node_id))
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name + "': out port '" +
                                            port.name + "' names missing node '" +
                                            port.node_id + "'");
                if (t.find_out_port(port.name))
                    throw TemplateError(TemplateError::Kind::BadPort,
                                        "template '" + t.name +
                                            "': duplicate out port '" + port.name + "'");
                t.out_ports.push_back(std::move(port));
            }
        }
        t.slots = detail::scan_slots(t.body);
        lib.add(std::move(t));
    }
    return lib;
}

// ------------------------------------------------------------- composition

struct TemplateInstance {
    std::string template_name;
    std::map<std::string, std::string> slot_values;
};

/// Connects out port `from_port` of instance `from_instance` to in port
/// `to_port` of instance `to_instance` (indices into the instance list).
struct Wire {
    int from_instance = 0;
    std::string from_port;
    int to_instance = 0;
    std::string to_port;
};

struct CompositionSpec {
    std::string question;
    std::vector<TemplateInstance> instances;
    std::vector<Wire> wires;
};

inline CompositionSpec parse_composition(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            std::string("bad composition JSON: ") + e.what());
    }
    CompositionSpec spec;
    if (doc.contains("question")) spec.question = doc["question"].get<std::string>();
    if (!doc.contains("instances") || !doc["instances"].is_array() ||
        doc["instances"].empty())
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            "composition needs a non-empty 'instances' array");
    for (const auto& ji : doc["instances"]) {
        TemplateInstance inst;
        inst.template_name = ji.at("template").get<std::string>();
        if (ji.contains("slots"))
            for (const auto& [k, v] : ji["slots"].items())
                inst.slot_values[k] = v.get<std::string>();
        spec.instances.push_back(std::move(inst));
    }
    if (doc.contains("wires")) {
        for (const auto& jw : doc["wires"]) {
            Wire w;
            w.from_instance = jw.at("from_instance").get<int>();
            w.from_port = jw.at("from_port").get<std::string>();
            w.to_instance = jw.at("to_instance").get<int>();
            w.to_port = jw.at("to_port").get<std::string>();
            spec.wires.push_back(std::move(w));
        }
    }
    return spec;
}

/// Instantiate templates, splice them together along the wires, and validate
/// the result. Node ids are namespaced per instance ("p1.", "p2.", ...) so
/// the same template can appear twice. Wiring replaces the in-port
/// placeholder with the producer node: the placeholder's outgoing edges are
/// rewired to start at the producer, and the placeholder disappears.
inline GeoFlowGraph compose(const TemplateLibrary& lib, const CompositionSpec& spec,
                            const OperatorRegistry& registry,
                            const TransformTable& table) {
    GeoFlowGraph composed;
    composed.question = spec.question;

    struct InstanceInfo {
        const Template* tmpl = nullptr;
        std::string prefix;
    };
    std::vector<InstanceInfo> infos;

    for (std::size_t k = 0; k < spec.instances.size(); ++k) {
        const TemplateInstance& inst = spec.instances[k];
        const Template* tmpl = lib.find(inst.template_name);
        if (!tmpl)
            throw TemplateError(TemplateError::Kind::UnknownTemplate,
                                "no template named '" + inst.template_name + "'");
        for (const auto& [slot, value] : inst.slot_values) {
            (void)value;
            if (!tmpl->slots.count(slot))
                throw TemplateError(TemplateError::Kind::UnknownSlot,
                                    "template '" + tmpl->name + "' has no slot '" +
                                        slot + "'");
        }
        std::string prefix = "p" + std::to_string(k + 1) + ".";
        infos.push_back({tmpl, prefix});

        for (const auto& n : tmpl->body.nodes) {
            ConceptNode copy = n;
            copy.id = prefix + n.id;
            copy.phrase = detail::substitute_slots(n.phrase, inst.slot_values);
            for (auto& [key, p] : copy.params) {
                (void)key;
                if (p.kind == ParamValue::Kind::Text)
                    p.text = detail::substitute_slots(p.text, inst.slot_values);
            }
            std::set<std::string> leftover;
            detail::collect_slots(copy.phrase, leftover);
            for (const auto& [key, p] : copy.params) {
                (void)key;
                if (p.kind == ParamValue::Kind::Text)
                    detail::collect_slots(p.text, leftover);
            }
            if (!leftover.empty())
                throw TemplateError(TemplateError::Kind::UnboundSlot,
                                    "template '" + tmpl->name + "': slot '$" +
                                        *leftover.begin() + "' is unbound");
            composed.nodes.push_back(std::move(copy));
        }
        for (const auto& e : tmpl->body.edges)
            composed.edges.push_back(
                TransformEdge{prefix + e.from, prefix + e.to, e.op});
        if (composed.question.empty())
            composed.question =
                detail::substitute_slots(tmpl->body.question, inst.slot_values);
    }

    std::set<std::string> wired_ports;  // "k/port" — each in port accepts one wire
    for (const auto& w : spec.wires) {
        if (w.from_instance < 0 || std::size_t(w.from_instance) >= infos.size() ||
            w.to_instance < 0 || std::size_t(w.to_instance) >= infos.size())
            throw TemplateError(TemplateError::Kind::UnknownPort,
                                "wire references an instance that does not exist");
        const InstanceInfo& from = infos[std::size_t(w.from_instance)];
        const InstanceInfo& to = infos[std::size_t(w.to_instance)];
        const OutPort* out = from.tmpl->find_out_port(w.from_port);
        if (!out)
            throw TemplateError(TemplateError::Kind::UnknownPort,
                                "template '" + from.tmpl->name + "' has no out port '" +
                                    w.from_port + "'");
        const InPort* in = to.tmpl->find_in_port(w.to_port);
        if (!in)
            throw TemplateError(TemplateError::Kind::UnknownPort,
                                "template '" + to.tmpl->name + "' has no in port '" +
                                    w.to_port + "'");
        std::string port_key = std::to_string(w.to_instance) + "/" + w.to_port;
        if (!wired_ports.insert(port_key).second)
            throw TemplateError(TemplateError::Kind::CompositionIllFormed,
                                "in port '" + w.to_port + "' is wired twice");

        std::string producer_id = from.prefix + out->node_id;
        std::string placeholder_id = to.prefix + in->node_id;
        const ConceptNode* producer = composed.find_node(producer_id);
        if (!producer)
            throw TemplateError(TemplateError::Kind::UnknownPort,
                                "producer node '" + producer_id + "' missing");
        if (producer->concept_ != in->concept_)
            throw TemplateError(
                TemplateError::Kind::PortTypeMismatch,
                "port '" + w.to_port + "' expects concept " +
                    std::string(to_string(in->concept_)) + ", producer '" +
                    producer_id + "' carries " +
                    std::string(to_string(producer->concept_)));
        if (!role_order_ok(role_precedes(producer->role, in->role)))
            throw TemplateError(TemplateError::Kind::PortTypeMismatch,
                                "port '" + w.to_port + "' expects a role no later than " +
                                    std::string(to_string(in->role)) +
                                    ", producer carries " +
                                    std::string(to_string(producer->role)));

        for (auto& e : composed.edges) {
            if (e.from != placeholder_id) continue;
            if (composed.has_edge(producer_id, e.to))
                throw TemplateError(TemplateError::Kind::CompositionIllFormed,
                                    "wiring would duplicate edge " + producer_id +
                                        " -> " + e.to);
            e.from = producer_id;
        }
        std::erase_if(composed.nodes,
                      [&](const ConceptNode& n) { return n.id == placeholder_id; });
    }

    composed = canonicalized(composed);
    ValidationReport report = validate(composed, registry, table);
    if (!report.well_formed)
        throw TemplateError(TemplateError::Kind::CompositionIllFormed,
                            "composed graph is not well-formed: " +
                                report.violations.front().witness);
    return composed;
}

// ---------------------------------------------------- retrieval assistance

struct Example {
    std::string question;
    GeoFlowGraph graph;
};

class ExampleStore {
  public:
    void add(Example e) { examples_.push_back(std::move(e)); }
    const std::vector<Example>& all() const { return examples_; }
    std::size_t size() const { return examples_.size(); }

  private:
    std::vector<Example> examples_;
};

/// Every stored graph must be well-formed: retrieval hands these out as
/// worked answers, so a broken one would propagate bad structure.
inline ExampleStore load_example_store(const std::string& text,
                                       const OperatorRegistry& registry,
                                       const TransformTable& table) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            std::string("bad examples JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("examples") || !doc["examples"].is_array())
        throw TemplateError(TemplateError::Kind::MalformedLibrary,
                            "expected an object with an 'examples' array");
    ExampleStore store;
    for (const auto& je : doc["examples"]) {
        Example e;
        e.question = je.at("question").get<std::string>();
        e.graph = parse_graph(je.at("graph").dump());
        ValidationReport report = validate(e.graph, registry, table);
        if (!report.well_formed)
            throw TemplateError(TemplateError::Kind::MalformedLibrary,
                                "stored example '" + e.question +
                                    "' is not well-formed");
        store.add(std::move(e));
    }
    return store;
}

namespace detail {

/// Lowercase, punctuation to spaces, split on whitespace.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += char(std::tolower(c));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

inline std::map<std::string, double> term_counts(const std::vector<std::string>& tokens) {
    std::map<std::string, double> counts;
    for (const auto& t : tokens) counts[t] += 1.0;
    return counts;
}

inline double cosine(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [t, c] : a) {
        na += c * c;
        auto it = b.find(t);
        if (it != b.end()) dot += c * it->second;
    }
    for (const auto& [t, c] : b) {
        (void)t;
        nb += c * c;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

struct RankedExample {
    const Example* example = nullptr;
    double score = 0.0;
};

/// Top-k question matches by term-frequency cosine similarity. Ties keep
/// store order, so results are reproducible.
inline std::vector<RankedExample> retrieve_examples(const ExampleStore& store,
                                                    const std::string& question,
                                                    std::size_t k) {
    if (k < 1) k = 1;
    auto query = detail::term_counts(detail::tokenize(question));
    std::vector<RankedExample> ranked;
    for (const auto& e : store.all()) {
        double s = detail::cosine(query, detail::term_counts(detail::tokenize(e.question)));
        ranked.push_back({&e, s});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedExample& a, const RankedExample& b) {
                         return a.score > b.score;
                     });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

struct RankedTemplate {
    const Template* tmpl = nullptr;
    int score = 0;  // matching keyword count
};

/// Every template ranked by how many of its keywords appear in the question,
/// best match first; ties (including an all-zero ranking from an empty
/// question) keep library order.
inline std::vector<RankedTemplate> suggest_templates(const TemplateLibrary& lib,
                                                     const std::string& question) {
    auto tokens = detail::tokenize(question);
    std::set<std::string> token_set(tokens.begin(), tokens.end());
    std::vector<RankedTemplate> ranked;
    for (const auto& t : lib.all()) {
        int score = 0;
        for (const auto& kw : t.keywords) {
            auto kw_tokens = detail::tokenize(kw);
            bool all = !kw_tokens.empty();
            for (const auto& kt : kw_tokens)
                if (!token_set.count(kt)) all = false;
            if (all) ++score;
        }
        ranked.push_back({&t, score});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedTemplate& a, const RankedTemplate& b) {
                         return a.score > b.score;
                     });
    return ranked;
}

}  // namespace geoflow
