#pragma once

#include <array>
#include <optional>
#include <string>

#include "geoflow/provider.hpp"

namespace geoflow {

class GeocodeNotFound : public Error {
  public:
    explicit GeocodeNotFound(const std::string& what) : Error(what) {}
};

class MissingAnchor : public Error {
  public:
    explicit MissingAnchor(const std::string& what) : Error(what) {}
};

/// Search radii tried, in order, when plain geocoding misses. Each stage
/// runs one keyword place search around the anchor; the first stage with
/// any hit settles the result.
inline constexpr std::array<double, 3> kGeocodeFallbackRadiiM{10000.0, 50000.0, 100000.0};

struct GeocodeResolution {
    GeoPoint point;
    std::string place_id;  // "" if only a bare point is known
    int stage = 0;         // 0 = direct geocode; 1..3 = fallback ladder stage
};

/// Resolve free text to a point: plain geocode first, then keyword place
/// searches at expanding radii around the anchor. Within the first
/// non-empty stage the hit nearest the anchor wins (ties by smallest
/// place id). Needs the anchor as soon as the ladder is entered.
inline GeocodeResolution geocode_with_fallback(Provider& provider, const std::string& text,
                                               std::optional<GeoPoint> anchor = std::nullopt,
                                               const std::string& region = "") {
    ProviderResponse direct = provider.handle(GeocodeRequest{text, anchor, region});
    if (const auto* hit = std::get_if<PointResult>(&direct))
        return {hit->point, hit->place_id, 0};

    if (!anchor)
        throw MissingAnchor("geocode fallback for '" + text +
                            "' needs an anchor point and none was given");

    for (std::size_t i = 0; i < kGeocodeFallbackRadiiM.size(); ++i) {
        PlaceSearchRequest search;
        search.center = *anchor;
        search.radius_m = kGeocodeFallbackRadiiM[i];
        search.keyword = text;
        ProviderResponse resp = provider.handle(search);
        const auto* hits = std::get_if<PlacesResult>(&resp);
        if (!hits || hits->places.empty()) continue;
        const Place* best = &hits->places.front();
        double best_d = haversine(*anchor, best->point);
        for (const auto& p : hits->places) {
            double d = haversine(*anchor, p.point);
            if (d < best_d || (d == best_d && p.id < best->id)) {
                best = &p;
                best_d = d;
            }
        }
        return {best->point, best->id, static_cast<int>(i) + 1};
    }
    throw GeocodeNotFound("'" + text + "' not found by geocoding or any fallback stage");
}

}  // namespace geoflow
