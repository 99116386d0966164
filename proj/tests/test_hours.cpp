#include <gtest/gtest.h>

#include <random>

#include "geoflow/hours.hpp"
#include "support.hpp"

using namespace geoflow;

TEST(Hours, MatchesMinuteScanOnRandomSchedules) {
    // 100 random schedules, the first 25 forced to carry a period that
    // spills past midnight, checked against an independently painted
    // 7x1440 openness table at every minute of the week.
    std::mt19937 rng(91);
    int cross_midnight_seen = 0;
    for (int i = 0; i < 100; ++i) {
        WeeklyHours h = testsupport::random_hours(rng, i < 25);
        for (const auto& p : h.periods)
            if (p.close.day != p.open.day) {
                ++cross_midnight_seen;
                break;
            }
        std::vector<bool> table = testsupport::scan_week(h);
        for (int wm = 0; wm < kMinutesPerWeek; ++wm) {
            DayMinute t = DayMinute::from_week_minute(wm);
            ASSERT_EQ(open_at_time(h, t), table[size_t(wm)])
                << "schedule " << i << " at day " << t.day << " minute "
                << t.minute;
        }
    }
    EXPECT_GE(cross_midnight_seen, 20);
}

TEST(Hours, AlwaysOpenIsOpenEverywhere) {
    WeeklyHours h;
    h.always_open = true;
    for (int wm = 0; wm < kMinutesPerWeek; wm += 97)
        EXPECT_TRUE(open_at_time(h, DayMinute::from_week_minute(wm)));
}

TEST(Hours, EmptyScheduleIsClosedEverywhere) {
    WeeklyHours h;
    for (int wm = 0; wm < kMinutesPerWeek; wm += 97)
        EXPECT_FALSE(open_at_time(h, DayMinute::from_week_minute(wm)));
}

TEST(Hours, IntervalsAreHalfOpen) {
    WeeklyHours h;
    h.periods.push_back({DayMinute(2, 540), DayMinute(2, 1020)});  // Wed 9-17
    EXPECT_TRUE(open_at_time(h, DayMinute(2, 540)));    // opening minute counts
    EXPECT_TRUE(open_at_time(h, DayMinute(2, 1019)));
    EXPECT_FALSE(open_at_time(h, DayMinute(2, 1020)));  // closing minute doesn't
    EXPECT_FALSE(open_at_time(h, DayMinute(2, 539)));
    EXPECT_FALSE(open_at_time(h, DayMinute(3, 540)));   // other days unaffected
}

TEST(Hours, CrossMidnightPeriod) {
    // Friday 23:00 to Saturday 02:00.
    WeeklyHours h;
    h.periods.push_back({DayMinute(4, 1380), DayMinute(5, 120)});
    EXPECT_TRUE(open_at_time(h, DayMinute(4, 1380)));
    EXPECT_TRUE(open_at_time(h, DayMinute(4, 1439)));
    EXPECT_TRUE(open_at_time(h, DayMinute(5, 0)));
    EXPECT_TRUE(open_at_time(h, DayMinute(5, 119)));
    EXPECT_FALSE(open_at_time(h, DayMinute(5, 120)));
    EXPECT_FALSE(open_at_time(h, DayMinute(4, 1379)));
}

TEST(Hours, WeekWrapPeriod) {
    // Sunday 23:00 into Monday 02:00 wraps the week boundary (day 6 -> 0).
    WeeklyHours h;
    h.periods.push_back({DayMinute(6, 1380), DayMinute(0, 120)});
    EXPECT_TRUE(open_at_time(h, DayMinute(6, 1400)));
    EXPECT_TRUE(open_at_time(h, DayMinute(0, 60)));
    EXPECT_FALSE(open_at_time(h, DayMinute(0, 120)));
    EXPECT_FALSE(open_at_time(h, DayMinute(3, 0)));
}

TEST(Hours, OverlappingPeriodsUnion) {
    WeeklyHours h;
    h.periods.push_back({DayMinute(1, 480), DayMinute(1, 720)});
    h.periods.push_back({DayMinute(1, 600), DayMinute(1, 900)});
    for (int m = 480; m < 900; ++m)
        EXPECT_TRUE(open_at_time(h, DayMinute(1, m))) << m;
    EXPECT_FALSE(open_at_time(h, DayMinute(1, 900)));
}

TEST(Hours, DayMinuteRejectsOutOfRange) {
    EXPECT_THROW(DayMinute(7, 0), InvalidTime);
    EXPECT_THROW(DayMinute(-1, 0), InvalidTime);
    EXPECT_THROW(DayMinute(0, 1440), InvalidTime);
    EXPECT_THROW(DayMinute(0, -1), InvalidTime);
}

TEST(Hours, WeekMinuteRoundTrip) {
    for (int wm = 0; wm < kMinutesPerWeek; wm += 53)
        EXPECT_EQ(DayMinute::from_week_minute(wm).week_minute(), wm);
    // Wrapping in both directions.
    EXPECT_EQ(DayMinute::from_week_minute(kMinutesPerWeek + 5).week_minute(), 5);
    EXPECT_EQ(DayMinute::from_week_minute(-1).week_minute(), kMinutesPerWeek - 1);
}
