#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace slopewatch {

// Proleptic Gregorian calendar date stored as days since 1970-01-01.
// Conversions follow the days_from_civil / civil_from_days algorithms, so all
// arithmetic is exact integer arithmetic.
class Date {
public:
    constexpr Date() = default;

    static constexpr Date from_ymd(int year, unsigned month, unsigned day) noexcept {
        const int y = year - (month <= 2 ? 1 : 0);
        const int era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned mp = month > 2 ? month - 3 : month + 9;
        const unsigned doy = (153 * mp + 2) / 5 + day - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return Date(era * 146097 + static_cast<int>(doe) - 719468);
    }

    static constexpr Date from_days(std::int64_t days) noexcept { return Date(days); }

    /// Parses strict ISO-8601 `YYYY-MM-DD`; returns nullopt for anything else
    /// (including impossible dates such as 2018-02-30).
    static std::optional<Date> parse(std::string_view text) noexcept {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
        auto digits = [&](std::size_t from, std::size_t len, int& out) {
            out = 0;
            for (std::size_t i = from; i < from + len; ++i) {
                if (text[i] < '0' || text[i] > '9') return false;
                out = out * 10 + (text[i] - '0');
            }
            return true;
        };
        int y = 0, m = 0, d = 0;
        if (!digits(0, 4, y) || !digits(5, 2, m) || !digits(8, 2, d)) return std::nullopt;
        if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, static_cast<unsigned>(m)))
            return std::nullopt;
        return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    }

    [[nodiscard]] constexpr std::int64_t days_since_epoch() const noexcept { return days_; }

    struct Ymd {
        int year;
        unsigned month;
        unsigned day;
    };

    [[nodiscard]] constexpr Ymd ymd() const noexcept {
        const std::int64_t z = days_ + 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const auto doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        const auto y = static_cast<int>(yoe + era * 400 + (m <= 2 ? 1 : 0));
        return {y, m, d};
    }

    [[nodiscard]] std::string iso() const {
        const auto [y, m, d] = ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
        return buf;
    }

    [[nodiscard]] constexpr Date plus_days(std::int64_t n) const noexcept { return Date(days_ + n); }

    friend constexpr std::int64_t operator-(Date a, Date b) noexcept { return a.days_ - b.days_; }
    friend constexpr auto operator<=>(Date, Date) = default;

private:
    constexpr explicit Date(std::int64_t days) noexcept : days_(days) {}

    static constexpr int days_in_month(int y, unsigned m) noexcept {
        constexpr int table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
        return m == 2 && leap ? 29 : table[m - 1];
    }

    std::int64_t days_ = 0;
};

}  // namespace slopewatch
