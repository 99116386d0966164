#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/geo.hpp"
#include "geoflow/geocode.hpp"
#include "geoflow/graph.hpp"
#include "geoflow/hours.hpp"
#include "geoflow/local_context.hpp"
#include "geoflow/provider.hpp"
#include "geoflow/route.hpp"
#include "geoflow/spatial.hpp"
#include "geoflow/tsp.hpp"
#include "geoflow/values.hpp"

namespace geoflow {

/// Raised by an operator body when its inputs are structurally fine but the
/// work itself cannot be done (no such place, provider miss, bad parameter
/// value...). The engine converts it into a failed step.
class OperatorError : public Error {
  public:
    using Error::Error;
};

/// One resolved input of an operator at execution time: the concept node it
/// came from plus the bound value.
struct OpInput {
    std::string node_id;
    CoreConcept concept_ = CoreConcept::Location;
    FunctionalRole role = FunctionalRole::Cond;
    const Value* value = nullptr;
};

/// Everything an operator body gets to see.
struct ExecArgs {
    std::vector<OpInput> inputs;                  // canonical (sorted id) order
    ParamMap params;                              // merged parameter factors
    std::vector<const ConceptNode*> output_nodes; // metadata; phrases carry query text
    Provider* provider = nullptr;
    LocalContext* context = nullptr;
};

using OperatorImpl = std::function<std::vector<Value>(const ExecArgs&)>;

namespace ops {

// ---------------------------------------------------------------- helpers

inline const ParamValue* find_param(const ExecArgs& a, const std::string& name) {
    auto it = a.params.find(name);
    return it == a.params.end() ? nullptr : &it->second;
}

inline double require_number(const ExecArgs& a, const std::string& name) {
    const ParamValue* p = find_param(a, name);
    if (!p || p->kind != ParamValue::Kind::Number)
        throw OperatorError("missing numeric parameter '" + name + "'");
    return p->number;
}

inline double number_or(const ExecArgs& a, const std::string& name, double fallback) {
    const ParamValue* p = find_param(a, name);
    if (!p) return fallback;
    if (p->kind != ParamValue::Kind::Number)
        throw OperatorError("parameter '" + name + "' must be a number");
    return p->number;
}

inline std::string require_text(const ExecArgs& a, const std::string& name) {
    const ParamValue* p = find_param(a, name);
    if (!p || p->kind != ParamValue::Kind::Text)
        throw OperatorError("missing text parameter '" + name + "'");
    return p->text;
}

inline std::string text_or(const ExecArgs& a, const std::string& name,
                           const std::string& fallback) {
    const ParamValue* p = find_param(a, name);
    if (!p) return fallback;
    if (p->kind != ParamValue::Kind::Text)
        throw OperatorError("parameter '" + name + "' must be text");
    return p->text;
}

inline bool flag_or(const ExecArgs& a, const std::string& name, bool fallback) {
    const ParamValue* p = find_param(a, name);
    if (!p) return fallback;
    if (p->kind == ParamValue::Kind::Text) {
        if (p->text == "true") return true;
        if (p->text == "false") return false;
        throw OperatorError("parameter '" + name + "' must be true or false");
    }
    return p->number != 0.0;
}

/// A Location input may be bound to a raw point or a resolved place.
inline GeoPoint as_point(const Value& v) {
    if (const auto* p = std::get_if<GeoPoint>(&v)) return *p;
    if (const auto* pl = std::get_if<Place>(&v)) return pl->point;
    throw OperatorError("expected a point-like value, got " +
                        std::string(value_kind(v)));
}

inline const Place& as_place(const Value& v) {
    if (const auto* p = std::get_if<Place>(&v)) return *p;
    throw OperatorError("expected a place, got " + std::string(value_kind(v)));
}

inline PlaceList as_place_list(const Value& v) {
    if (const auto* ps = std::get_if<PlaceList>(&v)) return *ps;
    if (const auto* p = std::get_if<Place>(&v)) return {*p};
    throw OperatorError("expected places, got " + std::string(value_kind(v)));
}

inline const Route& as_route(const Value& v) {
    if (const auto* r = std::get_if<Route>(&v)) return *r;
    throw OperatorError("expected a route, got " + std::string(value_kind(v)));
}

inline double as_scalar(const Value& v) {
    if (const auto* s = std::get_if<Scalar>(&v)) return s->value;
    throw OperatorError("expected a scalar, got " + std::string(value_kind(v)));
}

inline const Text& as_text(const Value& v) {
    if (const auto* t = std::get_if<Text>(&v)) return *t;
    throw OperatorError("expected text, got " + std::string(value_kind(v)));
}

/// First input carrying the given concept. Operators whose signatures mix
/// concepts use this instead of positional access: after canonicalization
/// input order is lexicographic by node id, so positions carry no meaning.
inline const OpInput& input_by_concept(const ExecArgs& a, CoreConcept c) {
    for (const auto& in : a.inputs)
        if (in.concept_ == c) return in;
    throw OperatorError(std::string("no input with concept ") +
                        std::string(to_string(c)));
}

inline const OpInput& input_at(const ExecArgs& a, std::size_t i) {
    if (i >= a.inputs.size())
        throw OperatorError("expected at least " + std::to_string(i + 1) + " inputs");
    return a.inputs[i];
}

/// When two same-concept inputs feed an operator that cares which is which
/// (bearing, directions between two locations), a text parameter naming the
/// node id disambiguates; otherwise canonical order stands.
inline std::pair<const OpInput*, const OpInput*> oriented_pair(
    const ExecArgs& a, const std::string& first_param) {
    if (a.inputs.size() != 2) throw OperatorError("expected exactly 2 inputs");
    const OpInput* first = &a.inputs[0];
    const OpInput* second = &a.inputs[1];
    if (const ParamValue* p = find_param(a, first_param)) {
        if (p->kind != ParamValue::Kind::Text)
            throw OperatorError("parameter '" + first_param + "' must name a node");
        if (second->node_id == p->text) std::swap(first, second);
        else if (first->node_id != p->text)
            throw OperatorError("parameter '" + first_param + "' names no input node");
    }
    return {first, second};
}

inline Provider& provider_of(const ExecArgs& a) {
    if (!a.provider) throw OperatorError("operator requires a provider");
    return *a.provider;
}

inline LocalContext& context_of(const ExecArgs& a) {
    if (!a.context) throw OperatorError("operator requires a local context");
    return *a.context;
}

inline const ConceptNode& sole_output(const ExecArgs& a) {
    if (a.output_nodes.size() != 1 || !a.output_nodes[0])
        throw OperatorError("expected exactly one output node");
    return *a.output_nodes[0];
}

// Takes the response by value: callers hand over the provider's return
// directly, and the extracted alternative is moved out. Returning a
// reference here would dangle once the response temporary dies.
template <typename T>
T expect(ProviderResponse r, const char* what) {
    if (auto* v = std::get_if<T>(&r)) return std::move(*v);
    if (const auto* nf = std::get_if<NotFound>(&r))
        throw OperatorError(std::string(what) + ": " +
                            (nf->detail.empty() ? "not found" : nf->detail));
    throw OperatorError(std::string(what) + ": unexpected provider response");
}

/// Travel seconds for one hop. A one-cell matrix request keeps a single
/// provider path for both single legs and full matrices.
inline double leg_seconds(Provider& provider, const GeoPoint& from, const GeoPoint& to,
                          const std::string& mode) {
    DistanceMatrixRequest req{{from}, {to}, mode};
    const auto& m = expect<MatrixResult>(provider.handle(req), "travel time");
    if (m.seconds.size() != 1 || m.seconds[0].size() != 1)
        throw OperatorError("travel time: malformed matrix");
    return m.seconds[0][0];
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, '|'))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

// ------------------------------------------------------- lookup operators

inline Value op_geocode(const ExecArgs& a) {
    const ConceptNode& out = sole_output(a);
    if (out.phrase.empty()) throw OperatorError("geocode: output node has no phrase");
    std::optional<GeoPoint> anchor;
    if (!a.inputs.empty()) anchor = as_point(*input_at(a, 0).value);
    try {
        GeocodeResolution res = geocode_with_fallback(provider_of(a), out.phrase,
                                                      anchor, text_or(a, "region", ""));
        return res.point;
    } catch (const GeocodeNotFound& e) {
        throw OperatorError(e.what());
    } catch (const MissingAnchor& e) {
        throw OperatorError(e.what());
    }
}

inline Value op_batch_geocode(const ExecArgs& a) {
    GeoPoint anchor = as_point(*input_at(a, 0).value);
    std::vector<std::string> names = split_list(require_text(a, "names"));
    if (names.empty()) throw OperatorError("batch_geocode: empty name list");
    PlaceList out;
    for (const auto& name : names) {
        try {
            GeocodeResolution res = geocode_with_fallback(provider_of(a), name, anchor);
            Place p;
            p.id = res.place_id.empty() ? name : res.place_id;
            p.name = name;
            p.point = res.point;
            out.push_back(std::move(p));
        } catch (const GeocodeNotFound& e) {
            throw OperatorError(e.what());
        }
    }
    return out;
}

inline Value op_reverse_geocode(const ExecArgs& a) {
    GeoPoint at = as_point(*input_at(a, 0).value);
    const auto& t = expect<TextResult>(provider_of(a).handle(ReverseGeocodeRequest{at}),
                                       "reverse_geocode");
    return Text{t.text};
}

inline Value op_timezone(const ExecArgs& a) {
    GeoPoint at = as_point(*input_at(a, 0).value);
    const auto& tz =
        expect<TimezoneResult>(provider_of(a).handle(TimezoneRequest{at}), "timezone");
    return Scalar{double(tz.utc_offset_s), "s"};
}

inline PlaceSearchRequest build_search(const ExecArgs& a, const GeoPoint& center) {
    PlaceSearchRequest req;
    req.center = center;
    req.radius_m = require_number(a, "radius");
    if (req.radius_m < 0) throw OperatorError("search radius must be non-negative");
    req.type = text_or(a, "type", "");
    req.keyword = text_or(a, "keyword", "");
    if (const ParamValue* p = find_param(a, "min_rating")) {
        if (p->kind != ParamValue::Kind::Number)
            throw OperatorError("parameter 'min_rating' must be a number");
        req.min_rating = p->number;
    }
    if (find_param(a, "open_now")) req.open_now = flag_or(a, "open_now", false);
    return req;
}

inline Value op_place_search(const ExecArgs& a) {
    GeoPoint center = as_point(*input_at(a, 0).value);
    const auto& res = expect<PlacesResult>(
        provider_of(a).handle(build_search(a, center)), "place_search");
    return res.places;
}

inline Value op_find_place(const ExecArgs& a) {
    const ConceptNode& out = sole_output(a);
    GeoPoint center = as_point(*input_at(a, 0).value);
    PlaceSearchRequest req;
    req.center = center;
    req.radius_m = number_or(a, "radius", 5000.0);
    req.type = text_or(a, "type", "");
    req.keyword = text_or(a, "keyword", out.phrase);
    const auto& res =
        expect<PlacesResult>(provider_of(a).handle(req), "find_place");
    if (res.places.empty())
        throw OperatorError("find_place: no match for '" + req.keyword + "'");
    return res.places.front();  // provider sorts by distance, then id
}

inline Value op_place_details(const ExecArgs& a) {
    const Place& p = as_place(*input_at(a, 0).value);
    return expect<PlaceResult>(provider_of(a).handle(PlaceDetailsRequest{p.id}),
                               "place_details")
        .place;
}

inline Value op_batch_place_details(const ExecArgs& a) {
    PlaceList in = as_place_list(*input_at(a, 0).value);
    PlaceList out;
    out.reserve(in.size());
    for (const auto& p : in)
        out.push_back(expect<PlaceResult>(provider_of(a).handle(PlaceDetailsRequest{p.id}),
                                          "batch_place_details")
                          .place);
    return out;
}

// ------------------------------------------------------ routing operators

inline Value op_directions(const ExecArgs& a) {
    if (a.inputs.size() != 2) throw OperatorError("directions: expected 2 inputs");
    // The origin is the Location input; the destination is the other one.
    // With two Locations an 'origin' parameter can still disambiguate.
    const OpInput* origin = nullptr;
    const OpInput* dest = nullptr;
    if (a.inputs[0].concept_ == CoreConcept::Location &&
        a.inputs[1].concept_ != CoreConcept::Location) {
        origin = &a.inputs[0];
        dest = &a.inputs[1];
    } else if (a.inputs[1].concept_ == CoreConcept::Location &&
               a.inputs[0].concept_ != CoreConcept::Location) {
        origin = &a.inputs[1];
        dest = &a.inputs[0];
    } else {
        auto [f, s] = oriented_pair(a, "origin");
        origin = f;
        dest = s;
    }
    DirectionsRequest req;
    req.origin = as_point(*origin->value);
    req.destination = as_point(*dest->value);
    req.mode = text_or(a, "mode", "driving");
    return expect<RouteResult>(provider_of(a).handle(req), "directions").route;
}

inline Value op_distance_matrix(const ExecArgs& a) {
    PlaceList places = as_place_list(*input_at(a, 0).value);
    if (places.empty()) throw OperatorError("distance_matrix: no places");
    DistanceMatrixRequest req;
    for (const auto& p : places) {
        req.origins.push_back(p.point);
        req.destinations.push_back(p.point);
    }
    req.mode = text_or(a, "mode", "driving");
    const auto& m = expect<MatrixResult>(provider_of(a).handle(req), "distance_matrix");
    RouteList out;  // row-major: cell (i, j) at index i * n + j
    for (std::size_t i = 0; i < m.seconds.size(); ++i)
        for (std::size_t j = 0; j < m.seconds[i].size(); ++j) {
            Route r;
            r.summary = places[i].name + " -> " + places[j].name;
            r.mode = req.mode;
            r.legs.push_back(RouteLeg{m.meters[i][j], m.seconds[i][j], {}});
            out.push_back(std::move(r));
        }
    return out;
}

inline Value op_extract_distance(const ExecArgs& a) {
    return Scalar{extract_distance(as_route(*input_at(a, 0).value)), "m"};
}

inline Value op_extract_duration(const ExecArgs& a) {
    return Scalar{extract_duration(as_route(*input_at(a, 0).value)), "s"};
}

inline Value op_sum_durations(const ExecArgs& a) {
    if (a.inputs.size() < 2) throw OperatorError("sum_durations: expected 2 inputs");
    double total = 0.0;
    for (const auto& in : a.inputs) total += extract_duration(as_route(*in.value));
    return Scalar{total, "s"};
}

inline Value op_compare_routes(const ExecArgs& a) {
    if (a.inputs.size() < 2) throw OperatorError("compare_routes: expected 2 inputs");
    RouteList routes;
    for (const auto& in : a.inputs) routes.push_back(as_route(*in.value));
    std::string metric = text_or(a, "metric", "duration");
    return routes[compare_routes(routes, metric)];
}

inline Value op_steps_analysis(const ExecArgs& a) {
    const Route& r = as_route(*input_at(a, 0).value);
    std::string stat = require_text(a, "stat");
    StepsSummary s = steps_analysis(r, text_or(a, "landmark", ""));
    if (stat == "left_turns") return Scalar{double(s.left_turns), ""};
    if (stat == "right_turns") return Scalar{double(s.right_turns), ""};
    if (stat == "roundabout_exits") return Scalar{double(s.roundabout_exits), ""};
    if (stat == "after_landmark") {
        if (!s.after_landmark)
            throw OperatorError("steps_analysis: no step follows the landmark");
        return Text{*s.after_landmark};
    }
    throw OperatorError("steps_analysis: unknown stat '" + stat + "'");
}

// ------------------------------------------------------ spatial operators

inline Value op_nearest(const ExecArgs& a) {
    if (a.inputs.size() != 2) throw OperatorError("nearest: expected 2 inputs");
    const OpInput& anchor_in = input_by_concept(a, CoreConcept::Location);
    const OpInput* cand_in = &a.inputs[0] == &anchor_in ? &a.inputs[1] : &a.inputs[0];
    GeoPoint anchor = as_point(*anchor_in.value);
    PlaceList candidates = as_place_list(*cand_in->value);
    std::string metric = text_or(a, "metric", "haversine");
    if (metric == "haversine") return nearest(anchor, candidates);
    if (metric == "travel_time") {
        DistanceMatrixRequest req;
        req.origins.push_back(anchor);
        for (const auto& p : candidates) req.destinations.push_back(p.point);
        req.mode = text_or(a, "mode", "driving");
        const auto& m = expect<MatrixResult>(provider_of(a).handle(req), "nearest");
        if (m.seconds.size() != 1 || m.seconds[0].size() != candidates.size())
            throw OperatorError("nearest: malformed matrix");
        return nearest_by_cost(candidates, m.seconds[0]);
    }
    throw OperatorError("nearest: unknown metric '" + metric + "'");
}

inline Value op_within_radius(const ExecArgs& a) {
    if (a.inputs.size() != 2) throw OperatorError("within_radius: expected 2 inputs");
    const OpInput* center_in = nullptr;
    const OpInput* cand_in = nullptr;
    for (const auto& in : a.inputs) {
        if (std::holds_alternative<PlaceList>(*in.value)) cand_in = &in;
        else center_in = &in;
    }
    if (!center_in || !cand_in)
        throw OperatorError("within_radius: need one center and one place list");
    return within_radius(as_point(*center_in->value), require_number(a, "radius"),
                         as_place_list(*cand_in->value));
}

inline Value op_pairwise_extremes(const ExecArgs& a) {
    PlaceList places = as_place_list(*input_at(a, 0).value);
    std::vector<GeoPoint> pts;
    pts.reserve(places.size());
    for (const auto& p : places) pts.push_back(p.point);
    try {
        auto [i, j] = pairwise_extremes(pts);
        return Scalar{haversine(pts[i], pts[j]), "m"};
    } catch (const TooFewPoints& e) {
        throw OperatorError(e.what());
    }
}

inline Value op_haversine(const ExecArgs& a) {
    if (a.inputs.size() != 2) throw OperatorError("haversine: expected 2 inputs");
    return Scalar{haversine(as_point(*a.inputs[0].value), as_point(*a.inputs[1].value)),
                  "m"};
}

inline Value op_bearing(const ExecArgs& a) {
    auto [from, to] = oriented_pair(a, "from");
    try {
        return Scalar{bearing(as_point(*from->value), as_point(*to->value)), "deg"};
    } catch (const DegenerateBearing& e) {
        throw OperatorError(e.what());
    }
}

inline Value op_bearing_to_direction(const ExecArgs& a) {
    return Text{std::string(bearing_to_direction(as_scalar(*input_at(a, 0).value)))};
}

inline Value op_locate(const ExecArgs& a) {
    return as_place(*input_at(a, 0).value).point;
}

// ---------------------------------------------------- filtering / counting

inline Value op_filter_places(const ExecArgs& a) {
    PlaceList in = as_place_list(*input_at(a, 0).value);
    PlaceConstraints c;
    if (const ParamValue* p = find_param(a, "min_rating")) {
        if (p->kind != ParamValue::Kind::Number)
            throw OperatorError("parameter 'min_rating' must be a number");
        c.min_rating = p->number;
    }
    if (const ParamValue* p = find_param(a, "max_price")) {
        if (p->kind != ParamValue::Kind::Number)
            throw OperatorError("parameter 'max_price' must be a number");
        c.max_price = int(p->number);
    }
    if (const ParamValue* p = find_param(a, "required_types")) {
        if (p->kind != ParamValue::Kind::Text)
            throw OperatorError("parameter 'required_types' must be text");
        c.required_types = split_list(p->text);
    }
    if (find_param(a, "open_now")) c.open_now = flag_or(a, "open_now", false);
    return filter_places(in, c);
}

inline Value op_temporal_filter(const ExecArgs& a) {
    if (a.inputs.size() != 2) throw OperatorError("temporal_filter: expected 2 inputs");
    const OpInput* period_in = nullptr;
    const OpInput* items_in = nullptr;
    for (const auto& in : a.inputs) {
        if (std::holds_alternative<PlaceList>(*in.value)) items_in = &in;
        else period_in = &in;
    }
    if (!period_in || !items_in)
        throw OperatorError("temporal_filter: need one period and one item list");
    std::string period;
    if (const auto* t = std::get_if<Text>(period_in->value)) period = *t;
    else throw OperatorError("temporal_filter: period input must be text");
    PlaceList out;
    for (const auto& p : as_place_list(*items_in->value))
        if (p.has_type(period)) out.push_back(p);
    return out;
}

inline Value op_count(const ExecArgs& a) {
    return Scalar{double(as_place_list(*input_at(a, 0).value).size()), ""};
}

inline Value op_proportion_of(const ExecArgs& a) {
    double denom = require_number(a, "denominator");
    if (denom == 0.0) throw OperatorError("proportion_of: zero denominator");
    return Scalar{as_scalar(*input_at(a, 0).value) / denom, ""};
}

inline Value op_rating_of(const ExecArgs& a) {
    const Place& p = as_place(*input_at(a, 0).value);
    if (!p.rating) throw OperatorError("rating_of: '" + p.name + "' has no rating");
    return Scalar{*p.rating, ""};
}

inline Value op_open_at_time(const ExecArgs& a) {
    const Place& p = as_place(*input_at(a, 0).value);
    if (!p.hours) throw OperatorError("open_at_time: '" + p.name + "' has no hours");
    int day = int(require_number(a, "day"));
    int minute = int(require_number(a, "minute"));
    try {
        return open_at_time(*p.hours, DayMinute{day, minute});
    } catch (const InvalidTime& e) {
        throw OperatorError(e.what());
    }
}

// ---------------------------------------------------------- tour planning

inline Value op_tsp_tw(const ExecArgs& a) {
    PlaceList stops = as_place_list(*input_at(a, 0).value);
    if (stops.empty()) throw OperatorError("tsp_tw: no stops");
    DistanceMatrixRequest req;
    for (const auto& p : stops) {
        req.origins.push_back(p.point);
        req.destinations.push_back(p.point);
    }
    req.mode = text_or(a, "mode", "driving");
    const auto& m = expect<MatrixResult>(provider_of(a).handle(req), "tsp_tw");
    TspProblem problem;
    problem.matrix = m.seconds;
    problem.service_s.assign(stops.size(), number_or(a, "service_s", 0.0));
    problem.windows.assign(stops.size(), std::nullopt);
    problem.start_s = 0.0;
    if (find_param(a, "budget_s")) problem.budget_s = require_number(a, "budget_s");
    TspResult res = tsp_tw(problem);
    if (!res.feasible_complete)
        throw OperatorError("tsp_tw: no feasible tour visits every stop");
    Order out;
    for (int idx : res.order) out.visits.push_back(stops[size_t(idx)].name);
    return out;
}

// ----------------------------------------------------------- time algebra

/// Finish time for a fixed-order tour: start at `origin`, drive to each stop
/// in order, stay `stay_min` minutes at each. Travel comes from the provider;
/// total travel seconds are rounded to the nearest minute once at the end so
/// per-leg rounding noise cannot accumulate.
inline DayMinute calculate_finish_time(Provider& provider, const DayMinute& start,
                                       const GeoPoint& origin, const PlaceList& stops,
                                       double stay_min, const std::string& mode) {
    double travel_s = 0.0;
    GeoPoint prev = origin;
    for (const auto& stop : stops) {
        travel_s += leg_seconds(provider, prev, stop.point, mode);
        prev = stop.point;
    }
    long total_min =
        long(std::llround(travel_s / 60.0)) + long(stops.size()) * long(stay_min);
    long wk = (long(start.week_minute()) + total_min) % long(kMinutesPerWeek);
    if (wk < 0) wk += kMinutesPerWeek;
    return DayMinute::from_week_minute(int(wk));
}

inline Value op_calculate_finish_time(const ExecArgs& a) {
    const OpInput& origin_in = input_by_concept(a, CoreConcept::Location);
    const OpInput& stops_in = input_by_concept(a, CoreConcept::Object);
    DayMinute start{int(require_number(a, "day")), int(require_number(a, "minute"))};
    return calculate_finish_time(provider_of(a), start, as_point(*origin_in.value),
                                 as_place_list(*stops_in.value),
                                 number_or(a, "stay_min", 0.0),
                                 text_or(a, "mode", "driving"));
}

inline Value op_latest_departure(const ExecArgs& a) {
    const OpInput& origin_in = input_by_concept(a, CoreConcept::Location);
    const OpInput& stops_in = input_by_concept(a, CoreConcept::Object);
    DayMinute deadline{int(require_number(a, "deadline_day")),
                       int(require_number(a, "deadline_minute"))};
    PlaceList stops = as_place_list(*stops_in.value);
    GeoPoint origin = as_point(*origin_in.value);
    std::string mode = text_or(a, "mode", "driving");
    double stay_min = number_or(a, "stay_min", 0.0);
    double travel_s = 0.0;
    GeoPoint prev = origin;
    for (const auto& stop : stops) {
        travel_s += leg_seconds(provider_of(a), prev, stop.point, mode);
        prev = stop.point;
    }
    long total_min =
        long(std::llround(travel_s / 60.0)) + long(stops.size()) * long(stay_min);
    long wk = (long(deadline.week_minute()) - total_min) % long(kMinutesPerWeek);
    if (wk < 0) wk += kMinutesPerWeek;
    return DayMinute::from_week_minute(int(wk));
}

// -------------------------------------------------- cached local queries

inline Value op_query_local_place(const ExecArgs& a) {
    const Place& p = as_place(*input_at(a, 0).value);
    ProviderResponse r =
        cached_query(context_of(a), provider_of(a), PlaceDetailsRequest{p.id});
    return expect<PlaceResult>(r, "query_local_place").place;
}

inline Value op_query_local_coordinates(const ExecArgs& a) {
    const ConceptNode& out = sole_output(a);
    if (out.phrase.empty())
        throw OperatorError("query_local_coordinates: output node has no phrase");
    GeocodeRequest req;
    req.text = out.phrase;
    if (!a.inputs.empty()) req.anchor = as_point(*input_at(a, 0).value);
    ProviderResponse r = cached_query(context_of(a), provider_of(a), req);
    return expect<PointResult>(r, "query_local_coordinates").point;
}

inline Value op_query_local_routes(const ExecArgs& a) {
    const OpInput& origin_in = input_by_concept(a, CoreConcept::Location);
    const OpInput& dest_in = input_by_concept(a, CoreConcept::Object);
    DirectionsRequest req;
    req.origin = as_point(*origin_in.value);
    req.destination = as_point(*dest_in.value);
    req.mode = text_or(a, "mode", "driving");
    ProviderResponse r = cached_query(context_of(a), provider_of(a), req);
    return expect<RouteResult>(r, "query_local_routes").route;
}

inline Value op_query_local_travel_time(const ExecArgs& a) {
    const OpInput& origin_in = input_by_concept(a, CoreConcept::Location);
    const OpInput& dest_in = input_by_concept(a, CoreConcept::Object);
    DistanceMatrixRequest req{{as_point(*origin_in.value)},
                              {as_point(*dest_in.value)},
                              text_or(a, "mode", "driving")};
    ProviderResponse r = cached_query(context_of(a), provider_of(a), req);
    const auto& m = expect<MatrixResult>(r, "query_local_travel_time");
    if (m.seconds.size() != 1 || m.seconds[0].size() != 1)
        throw OperatorError("query_local_travel_time: malformed matrix");
    return Scalar{m.seconds[0][0], "s"};
}

inline Value op_query_local_places_batch(const ExecArgs& a) {
    PlaceList in = as_place_list(*input_at(a, 0).value);
    PlaceList out;
    out.reserve(in.size());
    for (const auto& p : in) {
        ProviderResponse r =
            cached_query(context_of(a), provider_of(a), PlaceDetailsRequest{p.id});
        out.push_back(expect<PlaceResult>(r, "query_local_places_batch").place);
    }
    return out;
}

inline Value op_query_local_nearby_places(const ExecArgs& a) {
    GeoPoint center = as_point(*input_at(a, 0).value);
    ProviderResponse r =
        cached_query(context_of(a), provider_of(a), build_search(a, center));
    return expect<PlacesResult>(r, "query_local_nearby_places").places;
}

}  // namespace ops

/// Name -> implementation table the engine dispatches through. Kept separate
/// from OperatorRegistry (which is declarative metadata) so alternative
/// bodies can be swapped in for tests.
class OperatorImpls {
  public:
    void add(const std::string& name, OperatorImpl impl) {
        impls_[name] = std::move(impl);
    }

    const OperatorImpl* find(const std::string& name) const {
        auto it = impls_.find(name);
        return it == impls_.end() ? nullptr : &it->second;
    }

    bool contains(const std::string& name) const { return impls_.count(name) > 0; }

  private:
    std::map<std::string, OperatorImpl> impls_;
};

inline OperatorImpls default_operator_impls() {
    using namespace ops;
    OperatorImpls t;
    auto one = [&t](const char* name, Value (*fn)(const ExecArgs&)) {
        t.add(name, [fn](const ExecArgs& a) { return std::vector<Value>{fn(a)}; });
    };
    one("geocode", op_geocode);
    one("batch_geocode", op_batch_geocode);
    one("reverse_geocode", op_reverse_geocode);
    one("timezone", op_timezone);
    one("place_search", op_place_search);
    one("event_search", op_place_search);  // same provider path, Event-typed output
    one("find_place", op_find_place);
    one("place_details", op_place_details);
    one("batch_place_details", op_batch_place_details);
    one("directions", op_directions);
    one("distance_matrix", op_distance_matrix);
    one("extract_distance", op_extract_distance);
    one("extract_duration", op_extract_duration);
    one("sum_durations", op_sum_durations);
    one("compare_routes", op_compare_routes);
    one("steps_analysis", op_steps_analysis);
    one("nearest", op_nearest);
    one("within_radius", op_within_radius);
    one("pairwise_extremes", op_pairwise_extremes);
    one("haversine", op_haversine);
    one("bearing", op_bearing);
    one("bearing_to_direction", op_bearing_to_direction);
    one("locate", op_locate);
    one("filter_places", op_filter_places);
    one("temporal_filter", op_temporal_filter);
    one("count_items", op_count);
    one("count_places", op_count);
    one("proportion_of", op_proportion_of);
    one("rating_of", op_rating_of);
    one("open_at_time", op_open_at_time);
    one("tsp_tw", op_tsp_tw);
    one("calculate_finish_time", op_calculate_finish_time);
    one("latest_departure", op_latest_departure);
    one("query_local_place", op_query_local_place);
    one("query_local_coordinates", op_query_local_coordinates);
    one("query_local_routes", op_query_local_routes);
    one("query_local_travel_time", op_query_local_travel_time);
    one("query_local_places_batch", op_query_local_places_batch);
    one("query_local_nearby_places", op_query_local_nearby_places);
    t.add("filter_routes", [](const ExecArgs& a) {
        RouteList in;
        if (const auto* rs = std::get_if<RouteList>(a.inputs.at(0).value)) in = *rs;
        else if (const auto* r = std::get_if<Route>(a.inputs.at(0).value)) in = {*r};
        else throw OperatorError("filter_routes: expected routes");
        auto idx = filter_routes(in, ops::require_text(a, "keyword"),
                                 ops::flag_or(a, "avoid", false));
        RouteList out;
        for (std::size_t i : idx) out.push_back(in[i]);
        return std::vector<Value>{Value{out}};
    });
    return t;
}

}  // namespace geoflow
