#pragma once

#include <string>
#include <vector>

#include "geoflow/core.hpp"

namespace geoflow {

inline constexpr int kMinutesPerDay = 1440;
inline constexpr int kMinutesPerWeek = 7 * kMinutesPerDay;

class InvalidTime : public Error {
  public:
    explicit InvalidTime(const std::string& what) : Error(what) {}
};

/// A moment in the circular week: day 0 = Monday, minute in [0, 1440).
struct DayMinute {
    int day = 0;
    int minute = 0;

    DayMinute() = default;
    DayMinute(int d, int m) : day(d), minute(m) {
        if (d < 0 || d > 6) throw InvalidTime("day " + std::to_string(d) + " outside 0..6");
        if (m < 0 || m >= kMinutesPerDay)
            throw InvalidTime("minute " + std::to_string(m) + " outside 0..1439");
    }

    int week_minute() const { return day * kMinutesPerDay + minute; }

    static DayMinute from_week_minute(int wm) {
        wm %= kMinutesPerWeek;
        if (wm < 0) wm += kMinutesPerWeek;
        return DayMinute(wm / kMinutesPerDay, wm % kMinutesPerDay);
    }

    bool operator==(const DayMinute&) const = default;
};

/// One opening period. Close may land on a later day than open, or wrap
/// past the end of the week (e.g. Saturday 23:00 to Sunday 02:00 is the
/// pair ((6, 1380), (0, 120))). The interval is half-open: a place open
/// 09:00-17:00 is open at 09:00 and closed at 17:00 sharp.
struct OpenPeriod {
    DayMinute open;
    DayMinute close;

    bool operator==(const OpenPeriod&) const = default;
};

struct WeeklyHours {
    bool always_open = false;
    std::vector<OpenPeriod> periods;

    bool operator==(const WeeklyHours&) const = default;
};

/// Is the place open at the given moment? Periods are intervals on the
/// circular week, so a period never covers less than it says just because
/// it crosses midnight or the Sunday/Monday boundary.
inline bool open_at_time(const WeeklyHours& hours, const DayMinute& when) {
    if (hours.always_open) return true;
    const int t = when.week_minute();
    for (const auto& p : hours.periods) {
        const int start = p.open.week_minute();
        int end = p.close.week_minute();
        if (end <= start) end += kMinutesPerWeek;  // wraps; open==close means all week
        if (t >= start && t < end) return true;
        if (t + kMinutesPerWeek >= start && t + kMinutesPerWeek < end) return true;
    }
    return false;
}

}  // namespace geoflow
