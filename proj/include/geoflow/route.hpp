#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/geo.hpp"

namespace geoflow {

class EmptyRoutes : public Error {
  public:
    explicit EmptyRoutes(const std::string& what) : Error(what) {}
};

struct RouteStep {
    std::string instruction;
    double distance_m = 0.0;
    double duration_s = 0.0;

    bool operator==(const RouteStep&) const = default;
};

struct RouteLeg {
    double distance_m = 0.0;
    double duration_s = 0.0;
    std::vector<RouteStep> steps;

    bool operator==(const RouteLeg&) const = default;
};

/// A routing result: one leg per origin/waypoint/destination segment.
struct Route {
    std::string summary;
    std::string mode;
    std::vector<RouteLeg> legs;
    bool waypoints_verified = false;

    bool operator==(const Route&) const = default;
};

/// Total length of a route in meters, summed over legs.
inline double extract_distance(const Route& r) {
    double total = 0.0;
    for (const auto& leg : r.legs) total += leg.distance_m;
    return total;
}

/// Total travel time of a route in seconds, summed over legs.
inline double extract_duration(const Route& r) {
    double total = 0.0;
    for (const auto& leg : r.legs) total += leg.duration_s;
    return total;
}

namespace detail {

// lowercase + collapse whitespace runs, so instruction matching is
// insensitive to formatting quirks in provider data
inline std::string normalize_instruction(const std::string& s) {
    std::string out;
    bool last_space = true;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!last_space) out.push_back(' ');
            last_space = true;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            last_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

inline bool instruction_contains(const std::string& instruction, const std::string& needle) {
    if (needle.empty()) return false;
    return normalize_instruction(instruction).find(normalize_instruction(needle)) !=
           std::string::npos;
}

}  // namespace detail

/// Turn-by-turn statistics over every step of a route, with an optional
/// "what comes after the landmark" lookup.
struct StepsSummary {
    int left_turns = 0;
    int right_turns = 0;
    int roundabout_exits = 0;
    std::optional<std::string> after_landmark;
};

/// Count navigation features across all legs (substring matching,
/// case-insensitive on normalized whitespace). If `landmark` is non-empty
/// and some step mentions it, after_landmark carries the instruction of
/// the step that follows the first mention.
inline StepsSummary steps_analysis(const Route& r, const std::string& landmark = "") {
    StepsSummary s;
    std::vector<const RouteStep*> flat;
    for (const auto& leg : r.legs)
        for (const auto& step : leg.steps) flat.push_back(&step);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const std::string& ins = flat[i]->instruction;
        if (detail::instruction_contains(ins, "turn left")) ++s.left_turns;
        if (detail::instruction_contains(ins, "turn right")) ++s.right_turns;
        if (detail::instruction_contains(ins, "roundabout")) ++s.roundabout_exits;
        if (!landmark.empty() && !s.after_landmark &&
            detail::instruction_contains(ins, landmark) && i + 1 < flat.size())
            s.after_landmark = flat[i + 1]->instruction;
    }
    return s;
}

/// Index of the best route under the metric ("distance" or "duration");
/// ties go to the smallest index.
inline std::size_t compare_routes(const std::vector<Route>& routes,
                                  const std::string& metric) {
    if (routes.empty()) throw EmptyRoutes("compare_routes needs at least one route");
    std::size_t best = 0;
    auto value = [&](const Route& r) {
        return metric == "distance" ? extract_distance(r) : extract_duration(r);
    };
    for (std::size_t i = 1; i < routes.size(); ++i)
        if (value(routes[i]) < value(routes[best])) best = i;
    return best;
}

/// Indices (ascending) of routes that mention the keyword in some step —
/// or, with avoid set, of routes that never mention it.
inline std::vector<std::size_t> filter_routes(const std::vector<Route>& routes,
                                              const std::string& keyword, bool avoid) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < routes.size(); ++i) {
        bool mentions = false;
        for (const auto& leg : routes[i].legs)
            for (const auto& step : leg.steps)
                if (detail::instruction_contains(step.instruction, keyword)) mentions = true;
        if (mentions != avoid) out.push_back(i);
    }
    return out;
}

namespace detail {

inline nlohmann::json route_to_json(const Route& r) {
    nlohmann::json j;
    j["summary"] = r.summary;
    j["mode"] = r.mode;
    j["waypoints_verified"] = r.waypoints_verified;
    j["legs"] = nlohmann::json::array();
    for (const auto& leg : r.legs) {
        nlohmann::json jl;
        jl["distance_m"] = leg.distance_m;
        jl["duration_s"] = leg.duration_s;
        jl["steps"] = nlohmann::json::array();
        for (const auto& step : leg.steps)
            jl["steps"].push_back({{"instruction", step.instruction},
                                   {"distance_m", step.distance_m},
                                   {"duration_s", step.duration_s}});
        j["legs"].push_back(jl);
    }
    return j;
}

inline Route route_from_json(const nlohmann::json& j) {
    Route r;
    if (j.contains("summary")) r.summary = j["summary"].get<std::string>();
    if (j.contains("mode")) r.mode = j["mode"].get<std::string>();
    if (j.contains("waypoints_verified"))
        r.waypoints_verified = j["waypoints_verified"].get<bool>();
    if (j.contains("legs"))
        for (const auto& jl : j["legs"]) {
            RouteLeg leg;
            leg.distance_m = jl.at("distance_m").get<double>();
            leg.duration_s = jl.at("duration_s").get<double>();
            if (jl.contains("steps"))
                for (const auto& js : jl["steps"]) {
                    RouteStep step;
                    step.instruction = js.at("instruction").get<std::string>();
                    if (js.contains("distance_m"))
                        step.distance_m = js["distance_m"].get<double>();
                    if (js.contains("duration_s"))
                        step.duration_s = js["duration_s"].get<double>();
                    leg.steps.push_back(std::move(step));
                }
            r.legs.push_back(std::move(leg));
        }
    return r;
}

}  // namespace detail

}  // namespace geoflow
