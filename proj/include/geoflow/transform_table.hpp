#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geoflow/core.hpp"

namespace geoflow {

/// Which concept-to-concept transformations are admissible, and which
/// operators may realize each of them. This is deployment data, not code:
/// the bundled table lives in data/transform_table.json.
class TransformTable {
  public:
    void add(CoreConcept from, CoreConcept to, std::vector<std::string> operators) {
        table_[{from, to}] = std::move(operators);
    }

    bool allows(CoreConcept from, CoreConcept to) const {
        return table_.count({from, to}) > 0;
    }

    /// Operators registered for the pair; empty vector if the pair is not
    /// in the table at all.
    const std::vector<std::string>& operators_for(CoreConcept from, CoreConcept to) const {
        static const std::vector<std::string> none;
        auto it = table_.find({from, to});
        return it == table_.end() ? none : it->second;
    }

    std::size_t size() const { return table_.size(); }

  private:
    std::map<std::pair<CoreConcept, CoreConcept>, std::vector<std::string>> table_;
};

class TransformTableError : public Error {
  public:
    explicit TransformTableError(const std::string& what) : Error(what) {}
};

/// Parse a transform table document: an array of
///   { "from_concept", "to_concept", "allowed_operators": [...] }
inline TransformTable parse_transform_table(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw TransformTableError(std::string("transform table is not valid: ") + e.what());
    }
    if (!doc.is_array())
        throw TransformTableError("transform table must be an array of entries");

    TransformTable table;
    for (const auto& je : doc) {
        if (!je.is_object() || !je.contains("from_concept") || !je.contains("to_concept"))
            throw TransformTableError("entries need 'from_concept' and 'to_concept'");
        auto parse_concept = [](const json& j) {
            if (!j.is_string()) throw TransformTableError("concept names must be strings");
            auto c = concept_from_string(j.get<std::string>());
            if (!c)
                throw TransformTableError("unknown concept '" + j.get<std::string>() + "'");
            return *c;
        };
        CoreConcept from = parse_concept(je["from_concept"]);
        CoreConcept to = parse_concept(je["to_concept"]);
        std::vector<std::string> ops;
        if (je.contains("allowed_operators")) {
            if (!je["allowed_operators"].is_array())
                throw TransformTableError("'allowed_operators' must be an array");
            for (const auto& jo : je["allowed_operators"]) {
                if (!jo.is_string())
                    throw TransformTableError("operator names must be strings");
                ops.push_back(jo.get<std::string>());
            }
        }
        if (table.allows(from, to))
            throw TransformTableError("duplicate entry for " +
                                      std::string(to_string(from)) + " -> " +
                                      std::string(to_string(to)));
        table.add(from, to, std::move(ops));
    }
    return table;
}

}  // namespace geoflow
