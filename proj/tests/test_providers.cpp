// Provider stack: fixture lookups, the geocode fallback ladder, and the
// local write-through cache (including its persistence file).

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "geoflow/fixture_provider.hpp"
#include "geoflow/geocode.hpp"
#include "geoflow/local_context.hpp"
#include "geoflow/provider.hpp"
#include "support.hpp"

namespace {

using namespace geoflow;

FixtureProvider& fixtures() {
    static FixtureProvider p(testsupport::data_dir() / "fixtures");
    return p;
}

const GeoPoint kHotel{40.002, -75.001};
const GeoPoint kCafeA{40.008, -75.001};
const GeoPoint kAnchor{40.0, -75.0};

TEST(Geocode, ExactNameGivesPointAndPlaceId) {
    auto r = fixtures().handle(GeocodeRequest{"Grand Plaza Hotel", std::nullopt, ""});
    auto* pt = std::get_if<PointResult>(&r);
    ASSERT_NE(pt, nullptr);
    EXPECT_DOUBLE_EQ(pt->point.lat, 40.002);
    EXPECT_DOUBLE_EQ(pt->point.lon, -75.001);
    EXPECT_EQ(pt->place_id, "pl_hotel");
}

TEST(Geocode, UnknownNameIsNotFound) {
    auto r = fixtures().handle(GeocodeRequest{"Atlantis Spire", std::nullopt, ""});
    EXPECT_TRUE(std::holds_alternative<NotFound>(r));
}

TEST(Geocode, RegionHintNarrowsHomonyms) {
    // two Springfields: one US (39.8,-75.2), one CA (45.5,-73.4)
    auto us = fixtures().handle(GeocodeRequest{"Springfield", std::nullopt, "us"});
    auto ca = fixtures().handle(GeocodeRequest{"Springfield", std::nullopt, "ca"});
    EXPECT_EQ(std::get<PointResult>(us).place_id, "pl_spring_us");
    EXPECT_EQ(std::get<PointResult>(ca).place_id, "pl_spring_ca");
}

TEST(Geocode, UnknownRegionCodeIsIgnoredNotAMiss) {
    auto r = fixtures().handle(GeocodeRequest{"Springfield", std::nullopt, "xx"});
    auto* pt = std::get_if<PointResult>(&r);
    ASSERT_NE(pt, nullptr);
    EXPECT_EQ(pt->place_id, "pl_spring_us");  // falls back to the first entry
}

TEST(Geocode, AnchorPicksNearestHomonym) {
    GeoPoint near_ca{45.4, -73.5};
    auto r = fixtures().handle(GeocodeRequest{"Springfield", near_ca, ""});
    EXPECT_EQ(std::get<PointResult>(r).place_id, "pl_spring_ca");

    auto r2 = fixtures().handle(GeocodeRequest{"Springfield", kAnchor, ""});
    EXPECT_EQ(std::get<PointResult>(r2).place_id, "pl_spring_us");
}

TEST(Geocode, RegionNarrowsBeforeAnchorRanks) {
    // the anchor sits next to the US Springfield, but the region hint has
    // already cut the candidate list down to the Canadian one
    auto r = fixtures().handle(GeocodeRequest{"Springfield", kAnchor, "ca"});
    EXPECT_EQ(std::get<PointResult>(r).place_id, "pl_spring_ca");
}

TEST(ReverseGeocode, NearestPlaceWithinAKilometer) {
    auto r = fixtures().handle(ReverseGeocodeRequest{GeoPoint{40.0081, -75.0012}});
    auto* t = std::get_if<TextResult>(&r);
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->text, "Brew & Bean");
}

TEST(ReverseGeocode, RemotePointIsNotFound) {
    auto r = fixtures().handle(ReverseGeocodeRequest{GeoPoint{42.0, -75.0}});
    EXPECT_TRUE(std::holds_alternative<NotFound>(r));
}

TEST(Timezone, CellLookupFloorsCoordinates) {
    // floor(40.008) = 40, floor(-75.001) = -76
    auto r = fixtures().handle(TimezoneRequest{kCafeA, 0});
    auto* tz = std::get_if<TimezoneResult>(&r);
    ASSERT_NE(tz, nullptr);
    EXPECT_EQ(tz->id, "America/New_York");
    EXPECT_EQ(tz->utc_offset_s, -18000);

    auto r2 = fixtures().handle(TimezoneRequest{GeoPoint{45.5, -73.4}, 0});
    EXPECT_EQ(std::get<TimezoneResult>(r2).id, "America/Toronto");
}

TEST(Timezone, UnknownCellIsNotFound) {
    auto r = fixtures().handle(TimezoneRequest{GeoPoint{10.5, 10.5}, 0});
    EXPECT_TRUE(std::holds_alternative<NotFound>(r));
}

TEST(Matrix, DiagonalIsZeroWithoutAFixtureEntry) {
    const GeoPoint gallery{40.0045, -75.0};
    const GeoPoint garden{40.0072, -75.0};
    DistanceMatrixRequest q{{gallery, garden}, {gallery, garden}, "driving"};
    auto r = fixtures().handle(q);
    auto* m = std::get_if<MatrixResult>(&r);
    ASSERT_NE(m, nullptr);
    ASSERT_EQ(m->seconds.size(), 2u);
    EXPECT_DOUBLE_EQ(m->seconds[0][0], 0.0);
    EXPECT_DOUBLE_EQ(m->seconds[1][1], 0.0);
    EXPECT_DOUBLE_EQ(m->meters[0][0], 0.0);
    EXPECT_DOUBLE_EQ(m->seconds[0][1], 300.0);
    EXPECT_DOUBLE_EQ(m->seconds[1][0], 310.0);
    EXPECT_DOUBLE_EQ(m->meters[0][1], 1200.0);
}

TEST(Matrix, MissingPairIsNotFound) {
    // cafe_a -> hotel has no fixture row (only hotel -> cafe_a does)
    DistanceMatrixRequest q{{kCafeA}, {kHotel}, "driving"};
    auto r = fixtures().handle(q);
    EXPECT_TRUE(std::holds_alternative<NotFound>(r));
}

TEST(Matrix, NonPlacePointIsNotFound) {
    DistanceMatrixRequest q{{GeoPoint{40.5, -75.5}}, {kHotel}, "driving"};
    EXPECT_TRUE(std::holds_alternative<NotFound>(fixtures().handle(q)));
}

// --- fallback ladder -------------------------------------------------------

// Three lookout points sit ~8, ~40, and ~90 km north of the city anchor.
// None of them has a geocode entry, so each must be found by the keyword
// search ladder at the 10, 50, and 100 km stages respectively.

TEST(FallbackLadder, DirectHitSkipsTheLadder) {
    CountingProvider counter(fixtures());
    auto res = geocode_with_fallback(counter, "Riverton", kAnchor, "");
    EXPECT_EQ(res.stage, 0);
    EXPECT_EQ(res.place_id, "pl_center");
    EXPECT_EQ(counter.count("geocode"), 1);
    EXPECT_EQ(counter.count("place_search"), 0);
}

TEST(FallbackLadder, NearPointResolvesAtFirstStage) {
    CountingProvider counter(fixtures());
    auto res = geocode_with_fallback(counter, "Stonebridge Lookout", kAnchor, "");
    EXPECT_EQ(res.stage, 1);
    EXPECT_EQ(res.place_id, "pl_fb_near");
    EXPECT_NEAR(haversine(kAnchor, res.point), 8000.0, 150.0);
    // one failed geocode, one search; no later stage was touched
    EXPECT_EQ(counter.count("geocode"), 1);
    EXPECT_EQ(counter.count("place_search"), 1);
    EXPECT_EQ(counter.total(), 2);
}

TEST(FallbackLadder, MidPointResolvesAtSecondStage) {
    CountingProvider counter(fixtures());
    auto res = geocode_with_fallback(counter, "Gorge Overlook", kAnchor, "");
    EXPECT_EQ(res.stage, 2);
    EXPECT_EQ(res.place_id, "pl_fb_mid");
    EXPECT_NEAR(haversine(kAnchor, res.point), 40000.0, 500.0);
    EXPECT_EQ(counter.count("place_search"), 2);
}

TEST(FallbackLadder, FarPointResolvesAtThirdStage) {
    CountingProvider counter(fixtures());
    auto res = geocode_with_fallback(counter, "Summit Beacon", kAnchor, "");
    EXPECT_EQ(res.stage, 3);
    EXPECT_EQ(res.place_id, "pl_fb_far");
    EXPECT_NEAR(haversine(kAnchor, res.point), 90000.0, 1000.0);
    EXPECT_EQ(counter.count("place_search"), 3);
}

TEST(FallbackLadder, NothingAnywhereThrowsAfterAllStages) {
    CountingProvider counter(fixtures());
    EXPECT_THROW(geocode_with_fallback(counter, "Atlantis Spire", kAnchor, ""),
                 GeocodeNotFound);
    EXPECT_EQ(counter.count("place_search"), 3);
}

TEST(FallbackLadder, MissThrowsWithoutAnAnchor) {
    EXPECT_THROW(geocode_with_fallback(fixtures(), "Stonebridge Lookout", std::nullopt, ""),
                 MissingAnchor);
}

TEST(FallbackLadder, NearestHitWinsWithinAStage) {
    // "Museum" matches two places inside the 10 km ring; the anchor sits
    // exactly on one of them, so that one must win
    GeoPoint at_science{40.0, -74.98};
    auto res = geocode_with_fallback(fixtures(), "Museum", at_science, "");
    EXPECT_EQ(res.stage, 1);
    EXPECT_EQ(res.place_id, "pl_science");

    GeoPoint at_art{40.006, -74.992};
    auto res2 = geocode_with_fallback(fixtures(), "Museum", at_art, "");
    EXPECT_EQ(res2.place_id, "pl_museum");
}

// --- local context cache ---------------------------------------------------

TEST(LocalCache, SecondIdenticalQueryNeverReachesTheProvider) {
    CountingProvider counter(fixtures());
    LocalContext ctx;

    std::vector<ProviderRequest> queries;
    queries.emplace_back(GeocodeRequest{"Riverton", std::nullopt, ""});
    queries.emplace_back(PlaceDetailsRequest{"pl_cafe_a"});
    // a batch lookup is just a loop of detail queries
    queries.emplace_back(PlaceDetailsRequest{"pl_cafe_b"});
    queries.emplace_back(PlaceDetailsRequest{"pl_museum"});
    queries.emplace_back(DirectionsRequest{kHotel, kCafeA, "driving", {}});
    queries.emplace_back(DistanceMatrixRequest{{kHotel}, {kCafeA}, "driving"});
    queries.emplace_back(PlaceSearchRequest{kHotel, 1500.0, "cafe", "", std::nullopt, std::nullopt});

    for (int round = 0; round < 2; ++round) {
        for (const auto& q : queries) {
            auto r = cached_query(ctx, counter, q);
            EXPECT_FALSE(std::holds_alternative<NotFound>(r));
        }
    }

    // exactly one provider call per distinct request, not per issue
    for (const auto& q : queries) EXPECT_EQ(counter.count_key(request_key(q)), 1);
    EXPECT_EQ(counter.total(), static_cast<int>(queries.size()));
    EXPECT_EQ(ctx.size(), queries.size());
}

TEST(LocalCache, CachedAnswerEqualsTheDirectAnswer) {
    CountingProvider counter(fixtures());
    LocalContext ctx;
    DirectionsRequest q{kHotel, kCafeA, "driving", {}};

    auto first = cached_query(ctx, counter, q);
    auto second = cached_query(ctx, counter, q);
    const auto& a = std::get<RouteResult>(first).route;
    const auto& b = std::get<RouteResult>(second).route;
    EXPECT_EQ(a, b);
    EXPECT_DOUBLE_EQ(extract_distance(a), 3500.0);
    EXPECT_DOUBLE_EQ(extract_duration(a), 540.0);
    EXPECT_EQ(counter.count("directions"), 1);
}

TEST(LocalCache, NegativeAnswersAreNeverCached) {
    CountingProvider counter(fixtures());
    LocalContext ctx;
    PlaceDetailsRequest q{"pl_nope"};

    EXPECT_TRUE(std::holds_alternative<NotFound>(cached_query(ctx, counter, q)));
    EXPECT_TRUE(std::holds_alternative<NotFound>(cached_query(ctx, counter, q)));
    EXPECT_EQ(counter.count_key(request_key(ProviderRequest{q})), 2);
    EXPECT_EQ(ctx.size(), 0u);
}

TEST(LocalCache, OnlySingleCellMatricesAreCached) {
    CountingProvider counter(fixtures());
    LocalContext ctx;
    DistanceMatrixRequest wide{{kHotel}, {kCafeA, kHotel}, "driving"};

    cached_query(ctx, counter, wide);
    cached_query(ctx, counter, wide);
    EXPECT_EQ(counter.count("distance_matrix"), 2);
    EXPECT_EQ(ctx.size(), 0u);
}

TEST(LocalCache, ReverseGeocodeAndTimezoneBypassTheCache) {
    CountingProvider counter(fixtures());
    LocalContext ctx;

    ReverseGeocodeRequest rev{kCafeA};
    TimezoneRequest tz{kCafeA, 0};
    for (int i = 0; i < 2; ++i) {
        cached_query(ctx, counter, rev);
        cached_query(ctx, counter, tz);
    }
    EXPECT_EQ(counter.count("reverse_geocode"), 2);
    EXPECT_EQ(counter.count("timezone"), 2);
    EXPECT_EQ(ctx.size(), 0u);
}

TEST(LocalCache, SearchCentersSnapToTheSameGridCell) {
    CountingProvider counter(fixtures());
    LocalContext ctx;

    // both centers floor to the (40.00, -75.01) cell
    PlaceSearchRequest a{GeoPoint{40.0021, -75.0009}, 1500.0, "cafe", "", std::nullopt, std::nullopt};
    PlaceSearchRequest b{GeoPoint{40.0079, -75.0001}, 1500.0, "cafe", "", std::nullopt, std::nullopt};
    cached_query(ctx, counter, a);
    cached_query(ctx, counter, b);
    EXPECT_EQ(counter.count("place_search"), 1);

    // one cell over, the key changes and the provider is asked again
    PlaceSearchRequest c{GeoPoint{40.0121, -75.0009}, 1500.0, "cafe", "", std::nullopt, std::nullopt};
    cached_query(ctx, counter, c);
    EXPECT_EQ(counter.count("place_search"), 2);
}

TEST(LocalCache, PreSeededEntryShadowsTheProvider) {
    CountingProvider counter(fixtures());
    LocalContext ctx;
    GeocodeRequest q{"Riverton", std::nullopt, ""};
    ctx.store(q, PointResult{GeoPoint{1.0, 2.0}, "pl_fake"});

    auto r = cached_query(ctx, counter, q);
    auto* pt = std::get_if<PointResult>(&r);
    ASSERT_NE(pt, nullptr);
    EXPECT_DOUBLE_EQ(pt->point.lat, 1.0);
    EXPECT_EQ(pt->place_id, "pl_fake");
    EXPECT_EQ(counter.total(), 0);
}

TEST(LocalCache, PersistedEntriesSurviveReconstruction) {
    namespace fs = std::filesystem;
    fs::path file = fs::temp_directory_path() / "geoflow_cache_test" / "cache.jsonl";
    std::error_code ec;
    fs::remove(file, ec);

    {
        CountingProvider counter(fixtures());
        LocalContext ctx(file);
        cached_query(ctx, counter, GeocodeRequest{"Riverton", std::nullopt, ""});
        cached_query(ctx, counter, PlaceDetailsRequest{"pl_cafe_a"});
        EXPECT_EQ(ctx.size(), 2u);
    }

    std::ifstream in(file);
    ASSERT_TRUE(in.good());
    int lines = 0;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) ++lines;
    EXPECT_EQ(lines, 2);

    CountingProvider counter(fixtures());
    LocalContext reloaded(file);
    EXPECT_EQ(reloaded.size(), 2u);
    auto r = cached_query(reloaded, counter, GeocodeRequest{"Riverton", std::nullopt, ""});
    EXPECT_EQ(std::get<PointResult>(r).place_id, "pl_center");
    auto d = cached_query(reloaded, counter, PlaceDetailsRequest{"pl_cafe_a"});
    EXPECT_EQ(std::get<PlaceResult>(d).place.name, "Brew & Bean");
    EXPECT_EQ(counter.total(), 0);

    fs::remove(file, ec);
}

}  // namespace
