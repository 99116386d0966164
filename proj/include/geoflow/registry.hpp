#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/core.hpp"

namespace geoflow {

class ManifestError : public Error {
  public:
    explicit ManifestError(const std::string& what) : Error(what) {}
};

/// Concept-level typing of an operator: which concepts it consumes and
/// which it produces. Outputs are never empty for a registered operator.
struct TypeSignature {
    std::vector<CoreConcept> inputs;
    std::vector<CoreConcept> outputs;

    bool operator==(const TypeSignature&) const = default;
};

/// A parameter the operator cannot run without. `unit` is the canonical
/// unit expected on the bound value ("" for unitless numbers and text).
struct RequiredParam {
    std::string name;
    std::string unit;

    bool operator==(const RequiredParam&) const = default;
};

struct OperatorSpec {
    std::string name;
    TypeSignature signature;
    std::vector<RequiredParam> required_params;
    bool provider_backed = false;

    bool operator==(const OperatorSpec&) const = default;
};

/// The set of operators a deployment knows about, keyed by unique name.
/// Loaded from a manifest document; the bundled manifest lives in
/// data/registry.json.
class OperatorRegistry {
  public:
    void add(OperatorSpec spec) {
        if (specs_.count(spec.name))
            throw ManifestError("duplicate operator '" + spec.name + "' in manifest");
        specs_.emplace(spec.name, std::move(spec));
    }

    bool contains(const std::string& name) const { return specs_.count(name) > 0; }

    const OperatorSpec* find(const std::string& name) const {
        auto it = specs_.find(name);
        return it == specs_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, OperatorSpec>& specs() const { return specs_; }
    const std::string& version() const { return version_; }
    void set_version(std::string v) { version_ = std::move(v); }

  private:
    std::map<std::string, OperatorSpec> specs_;
    std::string version_ = "0";
};

namespace detail {

inline CoreConcept manifest_concept(const nlohmann::json& j, const std::string& where) {
    if (!j.is_string())
        throw ManifestError(where + ": concept names must be strings");
    auto c = concept_from_string(j.get<std::string>());
    if (!c)
        throw ManifestError(where + ": unknown concept '" + j.get<std::string>() + "'");
    return *c;
}

}  // namespace detail

/// Parse a registry manifest. Manifest shape:
///   { "version": "...", "operators": [ { "name", "inputs", "outputs",
///     "required_params": [{"name","unit"}], "provider_backed" } ] }
inline OperatorRegistry parse_registry(const std::string& text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ManifestError(std::string("manifest is not valid: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("operators") || !doc["operators"].is_array())
        throw ManifestError("manifest needs an 'operators' array");

    OperatorRegistry reg;
    if (doc.contains("version")) {
        if (!doc["version"].is_string())
            throw ManifestError("'version' must be a string");
        reg.set_version(doc["version"].get<std::string>());
    }
    for (const auto& jop : doc["operators"]) {
        if (!jop.is_object() || !jop.contains("name") || !jop["name"].is_string())
            throw ManifestError("operator entries need a string 'name'");
        OperatorSpec spec;
        spec.name = jop["name"].get<std::string>();
        const std::string where = "operator '" + spec.name + "'";
        if (!jop.contains("inputs") || !jop["inputs"].is_array() ||
            !jop.contains("outputs") || !jop["outputs"].is_array())
            throw ManifestError(where + ": needs 'inputs' and 'outputs' arrays");
        for (const auto& ji : jop["inputs"])
            spec.signature.inputs.push_back(detail::manifest_concept(ji, where));
        for (const auto& jo : jop["outputs"])
            spec.signature.outputs.push_back(detail::manifest_concept(jo, where));
        if (spec.signature.outputs.empty())
            throw ManifestError(where + ": outputs must be non-empty");
        if (jop.contains("required_params")) {
            if (!jop["required_params"].is_array())
                throw ManifestError(where + ": 'required_params' must be an array");
            for (const auto& jp : jop["required_params"]) {
                if (!jp.is_object() || !jp.contains("name") || !jp["name"].is_string())
                    throw ManifestError(where + ": required params need a string 'name'");
                RequiredParam rp;
                rp.name = jp["name"].get<std::string>();
                if (jp.contains("unit")) {
                    if (!jp["unit"].is_string())
                        throw ManifestError(where + ": param 'unit' must be a string");
                    rp.unit = jp["unit"].get<std::string>();
                }
                spec.required_params.push_back(std::move(rp));
            }
        }
        if (jop.contains("provider_backed")) {
            if (!jop["provider_backed"].is_boolean())
                throw ManifestError(where + ": 'provider_backed' must be a boolean");
            spec.provider_backed = jop["provider_backed"].get<bool>();
        }
        reg.add(std::move(spec));
    }
    return reg;
}

}  // namespace geoflow
