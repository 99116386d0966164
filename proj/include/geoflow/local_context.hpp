#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoflow/fsio.hpp"
#include "geoflow/provider.hpp"

namespace geoflow {

namespace detail {

inline nlohmann::json response_to_json(const ProviderResponse& r) {
    using nlohmann::json;
    struct Visitor {
        json operator()(const NotFound& v) { return json{{"kind", "not_found"}, {"detail", v.detail}}; }
        json operator()(const PointResult& v) {
            return json{{"kind", "point"},
                        {"lat", v.point.lat},
                        {"lon", v.point.lon},
                        {"place_id", v.place_id}};
        }
        json operator()(const TextResult& v) { return json{{"kind", "text"}, {"text", v.text}}; }
        json operator()(const PlacesResult& v) {
            json places = json::array();
            for (const auto& p : v.places) places.push_back(place_to_json(p));
            return json{{"kind", "places"}, {"places", places}};
        }
        json operator()(const PlaceResult& v) {
            return json{{"kind", "place"}, {"place", place_to_json(v.place)}};
        }
        json operator()(const RouteResult& v) {
            return json{{"kind", "route"}, {"route", route_to_json(v.route)}};
        }
        json operator()(const MatrixResult& v) {
            return json{{"kind", "matrix"}, {"seconds", v.seconds}, {"meters", v.meters}};
        }
        json operator()(const TimezoneResult& v) {
            return json{{"kind", "timezone"},
                        {"id", v.id},
                        {"name", v.name},
                        {"utc_offset_s", v.utc_offset_s}};
        }
    };
    return std::visit(Visitor{}, r);
}

inline ProviderResponse response_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "not_found") return NotFound{j.at("detail").get<std::string>()};
    if (kind == "point")
        return PointResult{GeoPoint(j.at("lat").get<double>(), j.at("lon").get<double>()),
                           j.at("place_id").get<std::string>()};
    if (kind == "text") return TextResult{j.at("text").get<std::string>()};
    if (kind == "places") {
        PlacesResult r;
        for (const auto& jp : j.at("places")) r.places.push_back(place_from_json(jp));
        return r;
    }
    if (kind == "place") return PlaceResult{place_from_json(j.at("place"))};
    if (kind == "route") return RouteResult{route_from_json(j.at("route"))};
    if (kind == "matrix")
        return MatrixResult{j.at("seconds").get<std::vector<std::vector<double>>>(),
                            j.at("meters").get<std::vector<std::vector<double>>>()};
    if (kind == "timezone")
        return TimezoneResult{j.at("id").get<std::string>(), j.at("name").get<std::string>(),
                              j.at("utc_offset_s").get<long long>()};
    throw FileError("unknown cached response kind '" + kind + "'");
}

}  // namespace detail

/// Write-through cache in front of a provider: place details, geocoded
/// coordinates, routes, travel times, and nearby searches are answered
/// from memory once seen. Negative answers are never cached, so a miss is
/// always retried against the provider. Nearby-search keys snap the query
/// center to a 0.01-degree grid cell (everything else about the request
/// stays in the key), keeping keys stable under tiny center jitter.
///
/// Reads may run concurrently; writes take the exclusive side of the
/// lock. With a persistence path set, stored entries are appended to the
/// file as JSON lines and reloaded on the next construction.
class LocalContext {
  public:
    LocalContext() = default;

    explicit LocalContext(std::filesystem::path persist_path)
        : persist_path_(std::move(persist_path)) {
        namespace fs = std::filesystem;
        if (persist_path_.empty() || !fs::exists(persist_path_)) return;
        std::ifstream in(persist_path_);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            nlohmann::json rec = nlohmann::json::parse(line);
            entries_[rec.at("key").get<std::string>()] =
                detail::response_from_json(rec.at("response"));
        }
    }

    /// Cache key for a request; nearby searches get their center snapped
    /// to the grid cell.
    static std::string cache_key(const ProviderRequest& request) {
        if (const auto* search = std::get_if<PlaceSearchRequest>(&request)) {
            PlaceSearchRequest snapped = *search;
            snapped.center = GeoPoint(std::floor(search->center.lat * 100.0) / 100.0,
                                      std::floor(search->center.lon * 100.0) / 100.0);
            return request_key(snapped);
        }
        return request_key(request);
    }

    static bool cacheable(const ProviderRequest& request) {
        struct Visitor {
            bool operator()(const GeocodeRequest&) { return true; }
            bool operator()(const PlaceDetailsRequest&) { return true; }
            bool operator()(const DirectionsRequest&) { return true; }
            bool operator()(const PlaceSearchRequest&) { return true; }
            bool operator()(const DistanceMatrixRequest& q) {
                // only point-to-point lookups land in the travel-time map
                return q.origins.size() == 1 && q.destinations.size() == 1;
            }
            bool operator()(const ReverseGeocodeRequest&) { return false; }
            bool operator()(const TimezoneRequest&) { return false; }
        };
        return std::visit(Visitor{}, request);
    }

    std::optional<ProviderResponse> lookup(const ProviderRequest& request) const {
        if (!cacheable(request)) return std::nullopt;
        std::shared_lock lock(mutex_);
        auto it = entries_.find(cache_key(request));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void store(const ProviderRequest& request, const ProviderResponse& response) {
        if (!cacheable(request)) return;
        if (std::holds_alternative<NotFound>(response)) return;
        std::unique_lock lock(mutex_);
        const std::string key = cache_key(request);
        entries_[key] = response;
        if (!persist_path_.empty()) {
            nlohmann::json rec{{"key", key},
                               {"response", detail::response_to_json(response)}};
            if (persist_path_.has_parent_path())
                std::filesystem::create_directories(persist_path_.parent_path());
            std::ofstream out(persist_path_, std::ios::app);
            out << rec.dump() << "\n";
        }
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

  private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, ProviderResponse> entries_;
    std::filesystem::path persist_path_;
};

/// Database-first query: answer from the context when it already knows,
/// otherwise ask the provider and remember every positive answer.
inline ProviderResponse cached_query(LocalContext& ctx, Provider& provider,
                                     const ProviderRequest& request) {
    if (auto hit = ctx.lookup(request)) return *hit;
    ProviderResponse response = provider.handle(request);
    ctx.store(request, response);
    return response;
}

}  // namespace geoflow
