#pragma once

#include <cmath>
#include <string>

#include "geoflow/core.hpp"

namespace geoflow {

class InvalidCoordinate : public Error {
  public:
    explicit InvalidCoordinate(const std::string& what) : Error(what) {}
};

class DegenerateBearing : public Error {
  public:
    explicit DegenerateBearing(const std::string& what) : Error(what) {}
};

/// Mean Earth radius in meters, shared by every spherical formula here so
/// distances stay mutually consistent.
inline constexpr double kEarthRadiusM = 6371000.0;

inline constexpr double deg2rad(double d) { return d * M_PI / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / M_PI; }

/// A latitude/longitude pair in degrees. Latitude must lie in [-90, 90];
/// longitude is normalized into [-180, 180) at construction (so 180 and
/// -180 are the same point), anything further out is rejected.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw InvalidCoordinate("latitude " + std::to_string(lat) +
                                    " outside [-90, 90]");
        if (!(lon >= -180.0 && lon <= 180.0))
            throw InvalidCoordinate("longitude " + std::to_string(lon) +
                                    " outside [-180, 180]");
        if (lon == 180.0) lon = -180.0;
    }

    bool operator==(const GeoPoint&) const = default;
};

/// Great-circle distance in meters on the mean-radius sphere, via the
/// haversine form (numerically stable for nearby points, exact up to the
/// spherical model for antipodal ones).
inline double haversine(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(b.lat - a.lat);
    const double dlambda = deg2rad(b.lon - a.lon);
    const double s = std::sin(dphi / 2.0) * std::sin(dphi / 2.0) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2.0) *
                         std::sin(dlambda / 2.0);
    return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(s), std::sqrt(1.0 - s));
}

/// Initial (forward) bearing from a to b, degrees clockwise from true
/// north, in [0, 360). Undefined for coincident points.
inline double bearing(const GeoPoint& a, const GeoPoint& b) {
    if (a == b)
        throw DegenerateBearing("bearing is undefined for coincident points");
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dlambda = deg2rad(b.lon - a.lon);
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) -
                     std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    double theta = rad2deg(std::atan2(y, x));
    theta = std::fmod(theta + 360.0, 360.0);
    return theta;
}

/// Map a bearing to one of the eight compass directions. Sectors are 45
/// degrees wide, half-open, centred on the principal directions: N covers
/// [337.5, 360) and [0, 22.5), NE covers [22.5, 67.5), and so on.
inline std::string bearing_to_direction(double bearing_deg) {
    static const char* names[8] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
    double b = std::fmod(bearing_deg, 360.0);
    if (b < 0.0) b += 360.0;
    int sector = static_cast<int>(std::floor((b + 22.5) / 45.0)) % 8;
    return names[sector];
}

}  // namespace geoflow
