#include "botcal/time.hpp"

#include <charconv>
#include <cstdio>

#include "botcal/error.hpp"

namespace botcal {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    const char* first = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(first, first + len, value);
    if (ec != std::errc{} || ptr != first + len) {
        throw ParseError("bad timestamp '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SS then Z or +00:00
    const bool zulu = text.size() == 20 && text[19] == 'Z';
    const bool offset = text.size() == 25 && text.substr(19) == "+00:00";
    if (!(zulu || offset) || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':') {
        throw ParseError("bad timestamp '" + std::string(text) + "', expected YYYY-MM-DDTHH:MM:SSZ");
    }
    using namespace std::chrono;
    const year_month_day ymd{year{read_int(text, 0, 4)},
                             month{static_cast<unsigned>(read_int(text, 5, 2))},
                             day{static_cast<unsigned>(read_int(text, 8, 2))}};
    const int hh = read_int(text, 11, 2);
    const int mm = read_int(text, 14, 2);
    const int ss = read_int(text, 17, 2);
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) {
        throw ParseError("timestamp out of range '" + std::string(text) + "'");
    }
    return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_start = floor<days>(ts);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{ts - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

}  // namespace botcal
