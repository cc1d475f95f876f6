#pragma once

#include <cstdint>
#include <string>

namespace rmab {

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

// Inverse of days_from_civil.
void civil_from_days(std::int64_t days, int* year, unsigned* month,
                     unsigned* day);

// Parses strict ISO-8601 YYYY-MM-DD. Throws DataError on malformed input.
std::int64_t parse_iso_date(const std::string& text);

std::string format_iso_date(std::int64_t days);

// Start of the Monday-anchored calendar week containing the given day.
std::int64_t monday_on_or_before(std::int64_t days);

}  // namespace rmab
