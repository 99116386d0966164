#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "geoflow/fsio.hpp"
#include "geoflow/provider.hpp"
#include "geoflow/spatial.hpp"

namespace geoflow {

class FixtureError : public Error {
  public:
    explicit FixtureError(const std::string& what) : Error(what) {}
};

/// Offline provider backed by a directory of fixture files. Every answer
/// is a pure function of the files, so workflows driven by it replay
/// byte-for-byte. Recognized files (each optional):
///
///   places.json    - array of place records (see place.hpp fields)
///   geocode.json   - array of {name, lat, lon, place_id?, country_code?}
///   routes.json    - array of {origin, destination, mode, route}
///                    keyed by place ids
///   matrix.json    - array of {origin, destination, mode, seconds, meters}
///   timezones.json - array of {lat_cell, lon_cell, id, name, utc_offset_s}
///                    keyed by whole-degree cells
class FixtureProvider : public Provider {
  public:
    explicit FixtureProvider(const std::filesystem::path& dir) : dir_(dir) {
        namespace fs = std::filesystem;
        using nlohmann::json;
        try {
            if (fs::exists(dir / "places.json"))
                for (const auto& jp : json::parse(read_text_file(dir / "places.json")))
                    places_.push_back(detail::place_from_json(jp));
            if (fs::exists(dir / "geocode.json"))
                for (const auto& jg : json::parse(read_text_file(dir / "geocode.json"))) {
                    GeocodeEntry e;
                    e.name = jg.at("name").get<std::string>();
                    e.point = GeoPoint(jg.at("lat").get<double>(), jg.at("lon").get<double>());
                    if (jg.contains("place_id")) e.place_id = jg["place_id"].get<std::string>();
                    if (jg.contains("country_code"))
                        e.country_code = jg["country_code"].get<std::string>();
                    geocode_.push_back(std::move(e));
                }
            if (fs::exists(dir / "routes.json"))
                for (const auto& jr : json::parse(read_text_file(dir / "routes.json")))
                    routes_[{jr.at("origin").get<std::string>(),
                             jr.at("destination").get<std::string>(),
                             jr.at("mode").get<std::string>()}] =
                        detail::route_from_json(jr.at("route"));
            if (fs::exists(dir / "matrix.json"))
                for (const auto& jm : json::parse(read_text_file(dir / "matrix.json")))
                    matrix_[{jm.at("origin").get<std::string>(),
                             jm.at("destination").get<std::string>(),
                             jm.at("mode").get<std::string>()}] = {
                        jm.at("seconds").get<double>(), jm.at("meters").get<double>()};
            if (fs::exists(dir / "timezones.json"))
                for (const auto& jt : json::parse(read_text_file(dir / "timezones.json")))
                    timezones_[{jt.at("lat_cell").get<int>(), jt.at("lon_cell").get<int>()}] =
                        TimezoneResult{jt.at("id").get<std::string>(),
                                       jt.at("name").get<std::string>(),
                                       jt.at("utc_offset_s").get<long long>()};
        } catch (const nlohmann::json::exception& e) {
            throw FixtureError("broken fixture in '" + dir.string() + "': " + e.what());
        }
    }

    const std::vector<Place>& places() const { return places_; }
    const std::filesystem::path& dir() const { return dir_; }

    ProviderResponse handle(const ProviderRequest& request) override {
        struct Visitor {
            FixtureProvider& self;
            ProviderResponse operator()(const GeocodeRequest& q) { return self.geocode(q); }
            ProviderResponse operator()(const ReverseGeocodeRequest& q) {
                return self.reverse_geocode(q);
            }
            ProviderResponse operator()(const PlaceSearchRequest& q) {
                return self.place_search(q);
            }
            ProviderResponse operator()(const PlaceDetailsRequest& q) {
                for (const auto& p : self.places_)
                    if (p.id == q.place_id) return PlaceResult{p};
                return NotFound{"no place '" + q.place_id + "'"};
            }
            ProviderResponse operator()(const DirectionsRequest& q) {
                return self.directions(q);
            }
            ProviderResponse operator()(const DistanceMatrixRequest& q) {
                return self.distance_matrix(q);
            }
            ProviderResponse operator()(const TimezoneRequest& q) {
                auto it = self.timezones_.find({static_cast<int>(std::floor(q.point.lat)),
                                                static_cast<int>(std::floor(q.point.lon))});
                if (it == self.timezones_.end())
                    return NotFound{"no timezone cell for " + detail::fmt_point(q.point)};
                return it->second;
            }
        };
        return std::visit(Visitor{*this}, request);
    }

  private:
    struct GeocodeEntry {
        std::string name;
        GeoPoint point;
        std::string place_id;
        std::string country_code;
    };

    static bool same_point(const GeoPoint& a, const GeoPoint& b) {
        return std::abs(a.lat - b.lat) <= 1e-9 && std::abs(a.lon - b.lon) <= 1e-9;
    }

    ProviderResponse geocode(const GeocodeRequest& q) {
        std::vector<const GeocodeEntry*> named;
        for (const auto& e : geocode_)
            if (e.name == q.text) named.push_back(&e);
        if (named.empty()) return NotFound{"no geocode entry for '" + q.text + "'"};

        // region hint narrows the candidates when it matches anything;
        // an unknown code is ignored rather than turned into a miss
        if (!q.region.empty()) {
            std::vector<const GeocodeEntry*> regional;
            for (const auto* e : named)
                if (e->country_code == q.region) regional.push_back(e);
            if (!regional.empty()) named = std::move(regional);
        }
        const GeocodeEntry* pick = named.front();
        if (q.anchor)
            for (const auto* e : named)
                if (haversine(*q.anchor, e->point) < haversine(*q.anchor, pick->point))
                    pick = e;
        return PointResult{pick->point, pick->place_id};
    }

    ProviderResponse reverse_geocode(const ReverseGeocodeRequest& q) {
        const Place* best = nullptr;
        double best_d = 0.0;
        for (const auto& p : places_) {
            double d = haversine(q.point, p.point);
            if (!best || d < best_d) {
                best = &p;
                best_d = d;
            }
        }
        if (!best || best_d > 1000.0)
            return NotFound{"nothing within 1 km of " + detail::fmt_point(q.point)};
        return TextResult{best->name};
    }

    ProviderResponse place_search(const PlaceSearchRequest& q) {
        std::vector<std::pair<double, const Place*>> hits;
        for (const auto& p : places_) {
            double d = haversine(q.center, p.point);
            if (d > q.radius_m) continue;
            if (!q.type.empty() && !p.has_type(q.type)) continue;
            if (!q.keyword.empty() &&
                !detail::instruction_contains(p.name, q.keyword))
                continue;
            if (q.min_rating && (!p.rating || *p.rating < *q.min_rating)) continue;
            if (q.open_now && (!p.open_now || *p.open_now != *q.open_now)) continue;
            hits.push_back({d, &p});
        }
        std::sort(hits.begin(), hits.end(),
                  [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first < b.first
                                                : a.second->id < b.second->id;
                  });
        PlacesResult out;
        for (const auto& [d, p] : hits) out.places.push_back(*p);
        return out;
    }

    // fixture routing is keyed by place ids, so request points must match
    // a known place exactly (fixture coordinates round-trip exactly
    // through the serializer)
    const Place* place_at(const GeoPoint& pt) const {
        for (const auto& p : places_)
            if (same_point(p.point, pt)) return &p;
        return nullptr;
    }

    ProviderResponse directions(const DirectionsRequest& q) {
        const Place* o = place_at(q.origin);
        const Place* d = place_at(q.destination);
        if (!o || !d)
            return NotFound{"no fixture place at the requested endpoints"};
        auto it = routes_.find({o->id, d->id, q.mode});
        if (it == routes_.end())
            return NotFound{"no fixture route " + o->id + " -> " + d->id + " (" + q.mode + ")"};
        return RouteResult{it->second};
    }

    ProviderResponse distance_matrix(const DistanceMatrixRequest& q) {
        MatrixResult m;
        for (const auto& opt : q.origins) {
            std::vector<double> srow, mrow;
            const Place* o = place_at(opt);
            for (const auto& dpt : q.destinations) {
                const Place* d = place_at(dpt);
                if (!o || !d) return NotFound{"matrix endpoints must be fixture places"};
                if (o->id == d->id) {
                    srow.push_back(0.0);
                    mrow.push_back(0.0);
                    continue;
                }
                auto it = matrix_.find({o->id, d->id, q.mode});
                if (it == matrix_.end())
                    return NotFound{"no matrix entry " + o->id + " -> " + d->id + " (" +
                                    q.mode + ")"};
                srow.push_back(it->second.first);
                mrow.push_back(it->second.second);
            }
            m.seconds.push_back(std::move(srow));
            m.meters.push_back(std::move(mrow));
        }
        return m;
    }

    std::filesystem::path dir_;
    std::vector<Place> places_;
    std::vector<GeocodeEntry> geocode_;
    std::map<std::tuple<std::string, std::string, std::string>, Route> routes_;
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, double>>
        matrix_;
    std::map<std::pair<int, int>, TimezoneResult> timezones_;
};

}  // namespace geoflow
