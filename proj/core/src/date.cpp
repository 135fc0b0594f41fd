#include "mosaic/date.hpp"

#include <cstdio>

#include "mosaic/errors.hpp"

namespace mosaic {
namespace {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097LL + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw ParseError("invalid calendar date");
    serial_ = days_from_civil(year, month, day);
    // reject non-existent dates like Feb 30
    if (this->year() != year || this->month() != month || this->day() != day)
        throw ParseError("invalid calendar date");
}

Date Date::parse_iso(const std::string& s) {
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
        throw ParseError("invalid ISO date: '" + s + "'");
    return Date(y, m, d);
}

std::string Date::to_iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

int Date::year() const {
    int y;
    unsigned m, d;
    civil_from_days(serial_, y, m, d);
    return y;
}

unsigned Date::month() const {
    int y;
    unsigned m, d;
    civil_from_days(serial_, y, m, d);
    return m;
}

unsigned Date::day() const {
    int y;
    unsigned m, d;
    civil_from_days(serial_, y, m, d);
    return d;
}

Date Date::plus_days(std::int64_t n) const {
    Date r;
    r.serial_ = serial_ + n;
    return r;
}

}  // namespace mosaic
