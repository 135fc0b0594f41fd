#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace mosaic {

// Calendar date with day-serial arithmetic. Stored as days since the civil
// epoch 1970-01-01, so ordering and differencing are integer operations.
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);

    static Date parse_iso(const std::string& s);  // "YYYY-MM-DD"

    std::string to_iso() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    std::int64_t serial() const { return serial_; }

    Date plus_days(std::int64_t n) const;

    auto operator<=>(const Date&) const = default;

private:
    std::int64_t serial_ = 0;
};

struct DateRange {
    Date first;
    Date last;  // inclusive

    bool contains(const Date& d) const { return first <= d && d <= last; }
    bool overlaps(const DateRange& o) const {
        return first <= o.last && o.first <= last;
    }
};

}  // namespace mosaic
