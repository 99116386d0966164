#pragma once

#include <charconv>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "geoflow/hours.hpp"
#include "geoflow/place.hpp"
#include "geoflow/route.hpp"

namespace geoflow {

/// Dimensioned number produced by measurement operators. `unit` is ""
/// for counts and ratios.
struct Scalar {
    double value = 0.0;
    std::string unit;

    bool operator==(const Scalar&) const = default;
};

/// A visit sequence (e.g. a tour result), by display name.
struct Order {
    std::vector<std::string> visits;

    bool operator==(const Order&) const = default;
};

using PlaceList = std::vector<Place>;
using RouteList = std::vector<Route>;
using Text = std::string;

/// Everything a concept node can be bound to during execution.
using Value = std::variant<GeoPoint, Place, PlaceList, Route, RouteList, Scalar, Text,
                           bool, Order, DayMinute>;

inline std::string_view value_kind(const Value& v) {
    struct Visitor {
        std::string_view operator()(const GeoPoint&) { return "point"; }
        std::string_view operator()(const Place&) { return "place"; }
        std::string_view operator()(const PlaceList&) { return "places"; }
        std::string_view operator()(const Route&) { return "route"; }
        std::string_view operator()(const RouteList&) { return "routes"; }
        std::string_view operator()(const Scalar&) { return "scalar"; }
        std::string_view operator()(const Text&) { return "text"; }
        std::string_view operator()(bool) { return "boolean"; }
        std::string_view operator()(const Order&) { return "order"; }
        std::string_view operator()(const DayMinute&) { return "time"; }
    };
    return std::visit(Visitor{}, v);
}

namespace detail {

// shortest round-trip decimal form; "3500", "0.003", never "3.5e+03"
// surprises for the magnitudes workflows produce
inline std::string fmt_value(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline const char* day_name(int day) {
    static const char* names[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
    return names[day];
}

inline std::string fmt_day_minute(const DayMinute& t) {
    char hm[16];
    std::snprintf(hm, sizeof(hm), "%02d:%02d", t.minute / 60, t.minute % 60);
    return std::string(day_name(t.day)) + " " + hm;
}

}  // namespace detail

inline nlohmann::json value_to_json(const Value& v) {
    using nlohmann::json;
    struct Visitor {
        json operator()(const GeoPoint& p) {
            return json{{"kind", "point"}, {"lat", p.lat}, {"lon", p.lon}};
        }
        json operator()(const Place& p) {
            return json{{"kind", "place"}, {"place", detail::place_to_json(p)}};
        }
        json operator()(const PlaceList& ps) {
            json arr = json::array();
            for (const auto& p : ps) arr.push_back(detail::place_to_json(p));
            return json{{"kind", "places"}, {"places", arr}};
        }
        json operator()(const Route& r) {
            return json{{"kind", "route"}, {"route", detail::route_to_json(r)}};
        }
        json operator()(const RouteList& rs) {
            json arr = json::array();
            for (const auto& r : rs) arr.push_back(detail::route_to_json(r));
            return json{{"kind", "routes"}, {"routes", arr}};
        }
        json operator()(const Scalar& s) {
            return json{{"kind", "scalar"}, {"value", s.value}, {"unit", s.unit}};
        }
        json operator()(const Text& t) { return json{{"kind", "text"}, {"text", t}}; }
        json operator()(bool b) { return json{{"kind", "boolean"}, {"value", b}}; }
        json operator()(const Order& o) {
            return json{{"kind", "order"}, {"visits", o.visits}};
        }
        json operator()(const DayMinute& t) {
            return json{{"kind", "time"}, {"day", t.day}, {"minute", t.minute}};
        }
    };
    return std::visit(Visitor{}, v);
}

/// Human-readable rendering used when a Measure value lands in an answer.
inline std::string render_value(const Value& v) {
    struct Visitor {
        std::string operator()(const GeoPoint& p) {
            return "(" + detail::fmt_value(p.lat) + ", " + detail::fmt_value(p.lon) + ")";
        }
        std::string operator()(const Place& p) {
            return p.name + " (" + detail::fmt_value(p.point.lat) + ", " +
                   detail::fmt_value(p.point.lon) + ")";
        }
        std::string operator()(const PlaceList& ps) {
            std::string s;
            for (const auto& p : ps) {
                if (!s.empty()) s += ", ";
                s += p.name;
            }
            return s.empty() ? "(no places)" : s;
        }
        std::string operator()(const Route& r) {
            return (r.summary.empty() ? "route" : r.summary) + ": " +
                   detail::fmt_value(extract_distance(r)) + " m, " +
                   detail::fmt_value(extract_duration(r)) + " s";
        }
        std::string operator()(const RouteList& rs) {
            return std::to_string(rs.size()) + " routes";
        }
        std::string operator()(const Scalar& s) {
            return s.unit.empty() ? detail::fmt_value(s.value)
                                  : detail::fmt_value(s.value) + " " + s.unit;
        }
        std::string operator()(const Text& t) { return t; }
        std::string operator()(bool b) { return b ? "yes" : "no"; }
        std::string operator()(const Order& o) {
            std::string s;
            for (const auto& name : o.visits) {
                if (!s.empty()) s += " -> ";
                s += name;
            }
            return s.empty() ? "(empty tour)" : s;
        }
        std::string operator()(const DayMinute& t) { return detail::fmt_day_minute(t); }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace geoflow
