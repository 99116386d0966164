#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoflow/place.hpp"

namespace geoflow {

class EmptyCandidates : public Error {
  public:
    explicit EmptyCandidates(const std::string& what) : Error(what) {}
};

class NegativeRadius : public Error {
  public:
    explicit NegativeRadius(const std::string& what) : Error(what) {}
};

class TooFewPoints : public Error {
  public:
    explicit TooFewPoints(const std::string& what) : Error(what) {}
};

/// Distance from an anchor used by nearest(): straight-line by default;
/// callers that want travel time resolve it through a provider and pass
/// the precomputed costs instead.
inline const Place& nearest(const GeoPoint& anchor, const std::vector<Place>& candidates) {
    if (candidates.empty()) throw EmptyCandidates("nearest over an empty candidate set");
    const Place* best = &candidates.front();
    double best_d = haversine(anchor, best->point);
    for (const auto& c : candidates) {
        double d = haversine(anchor, c.point);
        if (d < best_d || (d == best_d && c.id < best->id)) {
            best = &c;
            best_d = d;
        }
    }
    return *best;
}

/// nearest() under explicit per-candidate costs (e.g. travel seconds from
/// a provider matrix). Ties go to the lexicographically smallest id.
inline const Place& nearest_by_cost(const std::vector<Place>& candidates,
                                    const std::vector<double>& costs) {
    if (candidates.empty()) throw EmptyCandidates("nearest over an empty candidate set");
    if (costs.size() != candidates.size())
        throw EmptyCandidates("cost list does not match candidate list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (costs[i] < costs[best] ||
            (costs[i] == costs[best] && candidates[i].id < candidates[best].id))
            best = i;
    return candidates[best];
}

/// Candidates within `radius_m` of the center (boundary inclusive), in
/// their original order.
inline std::vector<Place> within_radius(const GeoPoint& center, double radius_m,
                                        const std::vector<Place>& candidates) {
    if (radius_m < 0.0) throw NegativeRadius("radius must be non-negative");
    std::vector<Place> out;
    for (const auto& c : candidates)
        if (haversine(center, c.point) <= radius_m) out.push_back(c);
    return out;
}

/// The pair of indices (i < j) whose mutual great-circle distance is
/// largest; ties resolve to the lexicographically smallest index pair.
inline std::pair<std::size_t, std::size_t> pairwise_extremes(
    const std::vector<GeoPoint>& points) {
    if (points.size() < 2)
        throw TooFewPoints("pairwise extremes need at least two points");
    std::pair<std::size_t, std::size_t> best{0, 1};
    double best_d = haversine(points[0], points[1]);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            double d = haversine(points[i], points[j]);
            if (d > best_d) {
                best = {i, j};
                best_d = d;
            }
        }
    return best;
}

/// Attribute filter over places. All set constraints must hold; a place
/// missing an attribute that a constraint needs is excluded.
struct PlaceConstraints {
    std::optional<double> min_rating;
    std::optional<int> max_price;
    std::vector<std::string> required_types;
    std::optional<bool> open_now;
};

inline std::vector<Place> filter_places(const std::vector<Place>& places,
                                        const PlaceConstraints& constraints) {
    std::vector<Place> out;
    for (const auto& p : places) {
        if (constraints.min_rating &&
            (!p.rating || *p.rating < *constraints.min_rating))
            continue;
        if (constraints.max_price &&
            (!p.price_level || *p.price_level > *constraints.max_price))
            continue;
        if (constraints.open_now && (!p.open_now || *p.open_now != *constraints.open_now))
            continue;
        bool types_ok = true;
        for (const auto& t : constraints.required_types)
            if (!p.has_type(t)) types_ok = false;
        if (!types_ok) continue;
        out.push_back(p);
    }
    return out;
}

}  // namespace geoflow
