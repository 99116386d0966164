#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/geo.hpp"
#include "geoflow/hours.hpp"

namespace geoflow {

/// A point of interest as providers return it. Only id, name, and the
/// point are always present; the attribute fields are filled in when the
/// source knows them and left empty otherwise — filters treat a missing
/// attribute as "does not satisfy".
struct Place {
    std::string id;
    std::string name;
    GeoPoint point;
    std::vector<std::string> types;
    std::optional<double> rating;
    std::optional<int> price_level;
    std::optional<bool> open_now;
    std::optional<WeeklyHours> hours;
    std::string country_code;

    bool has_type(const std::string& t) const {
        for (const auto& x : types)
            if (x == t) return true;
        return false;
    }

    bool operator==(const Place&) const = default;
};

namespace detail {

inline nlohmann::json hours_to_json(const WeeklyHours& h) {
    nlohmann::json j;
    j["always_open"] = h.always_open;
    j["periods"] = nlohmann::json::array();
    for (const auto& p : h.periods)
        j["periods"].push_back({{"open_day", p.open.day},
                                {"open_minute", p.open.minute},
                                {"close_day", p.close.day},
                                {"close_minute", p.close.minute}});
    return j;
}

inline WeeklyHours hours_from_json(const nlohmann::json& j) {
    WeeklyHours h;
    if (j.contains("always_open")) h.always_open = j["always_open"].get<bool>();
    if (j.contains("periods"))
        for (const auto& jp : j["periods"])
            h.periods.push_back(
                {DayMinute(jp["open_day"].get<int>(), jp["open_minute"].get<int>()),
                 DayMinute(jp["close_day"].get<int>(), jp["close_minute"].get<int>())});
    return h;
}

inline nlohmann::json place_to_json(const Place& p) {
    nlohmann::json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["lat"] = p.point.lat;
    j["lon"] = p.point.lon;
    if (!p.types.empty()) j["types"] = p.types;
    if (p.rating) j["rating"] = *p.rating;
    if (p.price_level) j["price_level"] = *p.price_level;
    if (p.open_now) j["open_now"] = *p.open_now;
    if (p.hours) j["hours"] = hours_to_json(*p.hours);
    if (!p.country_code.empty()) j["country_code"] = p.country_code;
    return j;
}

inline Place place_from_json(const nlohmann::json& j) {
    Place p;
    p.id = j.at("id").get<std::string>();
    p.name = j.at("name").get<std::string>();
    p.point = GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>());
    if (j.contains("types"))
        for (const auto& t : j["types"]) p.types.push_back(t.get<std::string>());
    if (j.contains("rating")) p.rating = j["rating"].get<double>();
    if (j.contains("price_level")) p.price_level = j["price_level"].get<int>();
    if (j.contains("open_now")) p.open_now = j["open_now"].get<bool>();
    if (j.contains("hours")) p.hours = hours_from_json(j["hours"]);
    if (j.contains("country_code")) p.country_code = j["country_code"].get<std::string>();
    return p;
}

}  // namespace detail

}  // namespace geoflow
