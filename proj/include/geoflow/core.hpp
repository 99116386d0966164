#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace geoflow {

/// The closed set of core spatial concepts a node can be labelled with.
/// The set is deliberately small; everything a workflow talks about must
/// be expressed as one of these seven.
enum class CoreConcept : std::uint8_t {
    Location,
    Object,
    Field,
    Event,
    Network,
    Amount,
    Proportion,
};

inline constexpr std::array<CoreConcept, 7> all_concepts{
    CoreConcept::Location, CoreConcept::Object,  CoreConcept::Field,
    CoreConcept::Event,    CoreConcept::Network, CoreConcept::Amount,
    CoreConcept::Proportion,
};

/// Functional role a node plays inside a workflow. Extent and TExtent are
/// contextual (they scope the question spatially / temporally); the other
/// four are procedural and totally ordered:
///
///     SubCond < Cond < Support < Measure
enum class FunctionalRole : std::uint8_t {
    Extent,
    TExtent,
    SubCond,
    Cond,
    Support,
    Measure,
};

inline constexpr std::array<FunctionalRole, 6> all_roles{
    FunctionalRole::Extent,  FunctionalRole::TExtent, FunctionalRole::SubCond,
    FunctionalRole::Cond,    FunctionalRole::Support, FunctionalRole::Measure,
};

enum class RoleKind : std::uint8_t { Contextual, Procedural };

inline constexpr RoleKind role_kind(FunctionalRole r) {
    return (r == FunctionalRole::Extent || r == FunctionalRole::TExtent)
               ? RoleKind::Contextual
               : RoleKind::Procedural;
}

/// Rank of a procedural role in the total order. Contextual roles have no
/// rank; callers must check role_kind first.
inline constexpr int procedural_rank(FunctionalRole r) {
    switch (r) {
        case FunctionalRole::SubCond: return 0;
        case FunctionalRole::Cond: return 1;
        case FunctionalRole::Support: return 2;
        case FunctionalRole::Measure: return 3;
        default: return -1;
    }
}

/// Outcome of comparing the roles across an edge. Contextual roles are
/// exempt from the ordering requirement, so the comparison is not a plain
/// three-way result.
enum class RoleOrder : std::uint8_t { Precedes, Equal, Exempt, Fails };

/// Compare two roles under the procedural ordering. Either side being
/// contextual yields Exempt (checked before equality, so Extent vs Extent
/// is Exempt, not Equal).
inline constexpr RoleOrder role_precedes(FunctionalRole a, FunctionalRole b) {
    if (role_kind(a) == RoleKind::Contextual || role_kind(b) == RoleKind::Contextual)
        return RoleOrder::Exempt;
    if (a == b) return RoleOrder::Equal;
    return procedural_rank(a) < procedural_rank(b) ? RoleOrder::Precedes
                                                   : RoleOrder::Fails;
}

inline constexpr bool role_order_ok(RoleOrder o) {
    return o != RoleOrder::Fails;
}

// -- names -------------------------------------------------------------

inline std::string_view to_string(CoreConcept c) {
    switch (c) {
        case CoreConcept::Location: return "Location";
        case CoreConcept::Object: return "Object";
        case CoreConcept::Field: return "Field";
        case CoreConcept::Event: return "Event";
        case CoreConcept::Network: return "Network";
        case CoreConcept::Amount: return "Amount";
        case CoreConcept::Proportion: return "Proportion";
    }
    return "?";
}

inline std::string_view to_string(FunctionalRole r) {
    switch (r) {
        case FunctionalRole::Extent: return "Extent";
        case FunctionalRole::TExtent: return "TExtent";
        case FunctionalRole::SubCond: return "SubCond";
        case FunctionalRole::Cond: return "Cond";
        case FunctionalRole::Support: return "Support";
        case FunctionalRole::Measure: return "Measure";
    }
    return "?";
}

inline std::optional<CoreConcept> concept_from_string(std::string_view s) {
    for (auto c : all_concepts)
        if (to_string(c) == s) return c;
    return std::nullopt;
}

inline std::optional<FunctionalRole> role_from_string(std::string_view s) {
    for (auto r : all_roles)
        if (to_string(r) == s) return r;
    return std::nullopt;
}

// -- parameters ---------------------------------------------------------

/// Scalar parameter attached to a node: either a number (optionally with a
/// unit such as "m" or "s") or a plain text token (e.g. a travel mode).
struct ParamValue {
    enum class Kind : std::uint8_t { Number, Text } kind = Kind::Number;
    double number = 0.0;
    std::string unit;  // only meaningful for Kind::Number; "" = dimensionless
    std::string text;  // only meaningful for Kind::Text

    static ParamValue num(double v, std::string u = "") {
        ParamValue p;
        p.kind = Kind::Number;
        p.number = v;
        p.unit = std::move(u);
        return p;
    }
    static ParamValue str(std::string s) {
        ParamValue p;
        p.kind = Kind::Text;
        p.text = std::move(s);
        return p;
    }

    bool operator==(const ParamValue&) const = default;
};

using ParamMap = std::map<std::string, ParamValue>;

// -- errors -------------------------------------------------------------

/// Base class for all library errors so callers can catch the whole
/// family at once (the CLI maps these onto exit codes).
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geoflow
