#include "cellgraph/core.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace cellgraph {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') {
            throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

}  // namespace

Timestamp Timestamp::parse_iso8601(std::string_view text) {
    // 2012-07-14T21:03:55Z  or  2012-07-14T21:03:55+00:00
    const bool zulu = text.size() == 20 && text[19] == 'Z';
    const bool offset = text.size() == 25 && text.substr(19) == "+00:00";
    if (!zulu && !offset) {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "': expected UTC ISO-8601");
    }
    if (text[4] != '-' || text[7] != '-' || text[10] != 'T' || text[13] != ':' || text[16] != ':') {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "'");
    }
    using namespace std::chrono;
    const int y = parse_fixed(text, 0, 4);
    const int mo = parse_fixed(text, 5, 2);
    const int d = parse_fixed(text, 8, 2);
    const int h = parse_fixed(text, 11, 2);
    const int mi = parse_fixed(text, 14, 2);
    const int s = parse_fixed(text, 17, 2);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw InvalidArgument("bad timestamp '" + std::string(text) + "': field out of range");
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return Timestamp{static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s};
}

std::string Timestamp::to_iso8601() const {
    using namespace std::chrono;
    std::int64_t days = seconds_ / 86400;
    std::int64_t rem = seconds_ % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    return buf;
}

TimeWindow make_window(Timestamp start, Timestamp end) {
    if (!(start < end)) {
        throw InvalidArgument("time window must satisfy start < end");
    }
    return {start, end};
}

}  // namespace cellgraph
