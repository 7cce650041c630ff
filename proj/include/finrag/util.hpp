#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finrag {

// 64-bit FNV-1a. Used for request digests and corpus digests; stable across
// platforms and runs, which replay fixtures depend on.
std::uint64_t fnv1a64(std::string_view data);

// Lowercase 16-char hex rendering of a 64-bit hash.
std::string to_hex64(std::uint64_t value);

std::string lower_ascii(std::string_view s);
std::string trim(std::string_view s);

bool is_ascii_digit(char c);
bool is_ascii_alnum(char c);

// Case-insensitive substring / whole-word containment. Word boundaries are
// non-alphanumeric characters or string ends.
bool contains_ci(std::string_view haystack, std::string_view needle);
bool contains_word_ci(std::string_view haystack, std::string_view needle);

// Shortest round-trip decimal rendering of a double ("0.75", "41932.20339").
std::string format_double(double value);

// Round to `places` decimal digits, half away from zero.
double round_places(double value, int places);

// Whole-string conversion; nullopt if any character is left over.
std::optional<double> parse_double(std::string_view s);
std::optional<long> parse_long(std::string_view s);

// Financial-string numeric parse: strips '$' and thousands separators,
// "(x)" means -x, trailing '%' divides by 100, "a/b" becomes the quotient.
// nullopt when what remains is not a number.
std::optional<double> parse_financial_number(std::string_view s);

// Last whitespace-delimited token that parses as a financial number, with
// trailing sentence punctuation removed but meaningful decoration ($, %,
// parentheses) kept. nullopt when no token qualifies.
std::optional<std::string> last_numeric_token(std::string_view text);

// |a - b| <= rel * max(|a|, |b|): the relative-closeness rule used for
// answer matching and chain validation.
bool rel_close(double a, double b, double rel);

// Items of a numbered list ("1. foo" / "2) bar"), numbering stripped,
// non-matching lines ignored.
std::vector<std::string> parse_numbered_lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);             // throws IoError
void write_file(const std::filesystem::path& path, std::string_view); // throws IoError

std::vector<std::string> split_lines(std::string_view text);

}  // namespace finrag
