#pragma once

#include <charconv>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "geoflow/place.hpp"
#include "geoflow/route.hpp"

namespace geoflow {

struct GeocodeRequest {
    std::string text;
    std::optional<GeoPoint> anchor;
    std::string region;  // country-code hint, "" = none
};

struct ReverseGeocodeRequest {
    GeoPoint point;
};

struct PlaceSearchRequest {
    GeoPoint center;
    double radius_m = 0.0;
    std::string type;     // "" = any
    std::string keyword;  // "" = any; case-insensitive substring of the name
    std::optional<double> min_rating;
    std::optional<bool> open_now;
};

struct PlaceDetailsRequest {
    std::string place_id;
};

struct DirectionsRequest {
    GeoPoint origin;
    GeoPoint destination;
    std::string mode;
    std::vector<GeoPoint> waypoints;
};

struct DistanceMatrixRequest {
    std::vector<GeoPoint> origins;
    std::vector<GeoPoint> destinations;
    std::string mode;
};

struct TimezoneRequest {
    GeoPoint point;
    long long timestamp_s = 0;
};

using ProviderRequest =
    std::variant<GeocodeRequest, ReverseGeocodeRequest, PlaceSearchRequest,
                 PlaceDetailsRequest, DirectionsRequest, DistanceMatrixRequest,
                 TimezoneRequest>;

/// Negative result: the provider understood the request but has nothing
/// for it. Errors (I/O, malformed fixtures) are exceptions instead, so a
/// NotFound is always a trustworthy "no such thing".
struct NotFound {
    std::string detail;
};

struct PointResult {
    GeoPoint point;
    std::string place_id;  // "" when the source has no place record
};

struct TextResult {
    std::string text;
};

struct PlacesResult {
    std::vector<Place> places;
};

struct PlaceResult {
    Place place;
};

struct RouteResult {
    Route route;
};

struct MatrixResult {
    std::vector<std::vector<double>> seconds;
    std::vector<std::vector<double>> meters;
};

struct TimezoneResult {
    std::string id;
    std::string name;
    long long utc_offset_s = 0;
};

using ProviderResponse =
    std::variant<NotFound, PointResult, TextResult, PlacesResult, PlaceResult,
                 RouteResult, MatrixResult, TimezoneResult>;

class Provider {
  public:
    virtual ~Provider() = default;
    virtual ProviderResponse handle(const ProviderRequest& request) = 0;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string fmt_point(const GeoPoint& p) {
    return fmt_double(p.lat) + "," + fmt_double(p.lon);
}

}  // namespace detail

inline std::string_view request_kind(const ProviderRequest& r) {
    struct Visitor {
        std::string_view operator()(const GeocodeRequest&) { return "geocode"; }
        std::string_view operator()(const ReverseGeocodeRequest&) { return "reverse_geocode"; }
        std::string_view operator()(const PlaceSearchRequest&) { return "place_search"; }
        std::string_view operator()(const PlaceDetailsRequest&) { return "place_details"; }
        std::string_view operator()(const DirectionsRequest&) { return "directions"; }
        std::string_view operator()(const DistanceMatrixRequest&) { return "distance_matrix"; }
        std::string_view operator()(const TimezoneRequest&) { return "timezone"; }
    };
    return std::visit(Visitor{}, r);
}

/// Stable textual identity of a request, used as the cache key and for
/// per-request call accounting in tests.
inline std::string request_key(const ProviderRequest& r) {
    using detail::fmt_double;
    using detail::fmt_point;
    struct Visitor {
        std::string operator()(const GeocodeRequest& q) {
            std::string k = "geocode|" + q.text + "|" + q.region + "|";
            if (q.anchor) k += fmt_point(*q.anchor);
            return k;
        }
        std::string operator()(const ReverseGeocodeRequest& q) {
            return "reverse_geocode|" + fmt_point(q.point);
        }
        std::string operator()(const PlaceSearchRequest& q) {
            std::string k = "place_search|" + fmt_point(q.center) + "|" +
                            fmt_double(q.radius_m) + "|" + q.type + "|" + q.keyword + "|";
            if (q.min_rating) k += fmt_double(*q.min_rating);
            k += "|";
            if (q.open_now) k += *q.open_now ? "open" : "closed";
            return k;
        }
        std::string operator()(const PlaceDetailsRequest& q) {
            return "place_details|" + q.place_id;
        }
        std::string operator()(const DirectionsRequest& q) {
            std::string k = "directions|" + fmt_point(q.origin) + "|" +
                            fmt_point(q.destination) + "|" + q.mode;
            for (const auto& w : q.waypoints) k += "|" + fmt_point(w);
            return k;
        }
        std::string operator()(const DistanceMatrixRequest& q) {
            std::string k = "distance_matrix|" + q.mode;
            for (const auto& o : q.origins) k += "|o:" + fmt_point(o);
            for (const auto& d : q.destinations) k += "|d:" + fmt_point(d);
            return k;
        }
        std::string operator()(const TimezoneRequest& q) {
            return "timezone|" + fmt_point(q.point) + "|" + std::to_string(q.timestamp_s);
        }
    };
    return std::visit(Visitor{}, r);
}

/// Wrapper that counts calls reaching the inner provider. Tests use it to
/// prove the cache layer short-circuits repeat queries.
class CountingProvider : public Provider {
  public:
    explicit CountingProvider(Provider& inner) : inner_(inner) {}

    ProviderResponse handle(const ProviderRequest& request) override {
        {
            std::lock_guard lock(mutex_);
            ++total_;
            ++by_kind_[std::string(request_kind(request))];
            ++by_key_[request_key(request)];
        }
        return inner_.handle(request);
    }

    int total() const {
        std::lock_guard lock(mutex_);
        return total_;
    }
    int count(const std::string& kind) const {
        std::lock_guard lock(mutex_);
        auto it = by_kind_.find(kind);
        return it == by_kind_.end() ? 0 : it->second;
    }
    int count_key(const std::string& key) const {
        std::lock_guard lock(mutex_);
        auto it = by_key_.find(key);
        return it == by_key_.end() ? 0 : it->second;
    }
    void reset() {
        std::lock_guard lock(mutex_);
        total_ = 0;
        by_kind_.clear();
        by_key_.clear();
    }

  private:
    Provider& inner_;
    mutable std::mutex mutex_;
    int total_ = 0;
    std::map<std::string, int> by_kind_;
    std::map<std::string, int> by_key_;
};

}  // namespace geoflow
