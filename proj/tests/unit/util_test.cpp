#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "finrag/errors.hpp"
#include "finrag/util.hpp"

using namespace finrag;

TEST_CASE("fnv1a64 matches the published reference vectors") {
    // Reference values from the FNV test suite (64-bit FNV-1a).
    CHECK(fnv1a64("") == UINT64_C(14695981039346656037));
    CHECK(fnv1a64("a") == UINT64_C(0xaf63dc4c8601ec8c));
    CHECK(fnv1a64("foobar") == UINT64_C(0x85944171f73967e8));
}

TEST_CASE("to_hex64 is 16 lowercase hex chars, zero padded") {
    CHECK(to_hex64(0) == "0000000000000000");
    CHECK(to_hex64(UINT64_C(0xdeadbeef)) == "00000000deadbeef");
    CHECK(to_hex64(UINT64_C(0xcbf29ce484222325)) == "cbf29ce484222325");
}

TEST_CASE("lower_ascii and trim") {
    CHECK(lower_ascii("AbC-12") == "abc-12");
    CHECK(trim("  x y\t\n") == "x y");
    CHECK(trim("\r\n") == "");
}

TEST_CASE("contains_word_ci honors word boundaries") {
    CHECK(contains_word_ci("for UPS in 2006", "ups"));
    CHECK(contains_word_ci("UPS", "UPS"));
    CHECK_FALSE(contains_word_ci("groups of values", "ups"));
    CHECK(contains_ci("groups of values", "ups"));
    CHECK(contains_word_ci("Apple's revenue", "apple"));
}

TEST_CASE("format_double renders shortest round-trip form") {
    CHECK(format_double(0.75) == "0.75");
    CHECK(format_double(3.2) == "3.2");
    CHECK(format_double(31921.0) == "31921");
    CHECK(format_double(-0.2666) == "-0.2666");
    CHECK(format_double(41932.20339) == "41932.20339");
}

TEST_CASE("round_places rounds half away from zero") {
    CHECK(round_places(0.5, 0) == doctest::Approx(1.0));
    CHECK(round_places(-0.5, 0) == doctest::Approx(-1.0));
    CHECK(round_places(1.25, 1) == doctest::Approx(1.3));   // 1.25 is exact in binary
    CHECK(round_places(-1.25, 1) == doctest::Approx(-1.3));
    CHECK(round_places(41932.203389830508, 5) == doctest::Approx(41932.20339));
    CHECK(round_places(3.1999999999999993, 5) == doctest::Approx(3.2));
}

TEST_CASE("parse_double and parse_long reject partial parses") {
    CHECK(parse_double("3.5") == doctest::Approx(3.5));
    CHECK(parse_double("-2") == doctest::Approx(-2.0));
    CHECK_FALSE(parse_double("3.5x").has_value());
    CHECK_FALSE(parse_double("").has_value());
    CHECK(parse_long("42").value() == 42);
    CHECK_FALSE(parse_long("42.0").has_value());
    CHECK_FALSE(parse_long("x42").has_value());
}

TEST_CASE("parse_financial_number handles money, percent, parens, fractions") {
    CHECK(parse_financial_number("1234") == doctest::Approx(1234.0));
    CHECK(parse_financial_number("$1,234.5") == doctest::Approx(1234.5));
    CHECK(parse_financial_number("(3.2)") == doctest::Approx(-3.2));
    CHECK(parse_financial_number("23.6%") == doctest::Approx(0.236));
    CHECK(parse_financial_number("90%") == doctest::Approx(0.90));
    CHECK(parse_financial_number("3/4") == doctest::Approx(0.75));
    CHECK(parse_financial_number("(23.6%)") == doctest::Approx(-0.236));
    CHECK(parse_financial_number("$ 42,905") == doctest::Approx(42905.0));
    CHECK(parse_financial_number(" -14.44% ") == doctest::Approx(-0.1444));
    CHECK_FALSE(parse_financial_number("1/0").has_value());    // zero denominator
    CHECK_FALSE(parse_financial_number("1/2/3").has_value());  // two slashes
    CHECK_FALSE(parse_financial_number("abc").has_value());
    CHECK_FALSE(parse_financial_number("").has_value());
    CHECK_FALSE(parse_financial_number("%").has_value());
    CHECK_FALSE(parse_financial_number("()").has_value());
    CHECK_FALSE(parse_financial_number("12'345").has_value());  // not a separator we accept
}

TEST_CASE("last_numeric_token finds the final number-bearing token") {
    CHECK(last_numeric_token("revenue grew 14.1% year over year.").value() == "14.1%");
    CHECK(last_numeric_token("So the answer is 41932.20339.").value() == "41932.20339");
    CHECK(last_numeric_token("values were 3 then 7").value() == "7");
    CHECK(last_numeric_token("a loss of (1.5) was recorded").value() == "(1.5)");
    CHECK(last_numeric_token("totals: $1,234,").value() == "$1,234");
    CHECK_FALSE(last_numeric_token("no numbers here").has_value());
    CHECK_FALSE(last_numeric_token("").has_value());
}

TEST_CASE("rel_close is symmetric relative closeness with 1 percent default use") {
    CHECK(rel_close(100.0, 101.0, 0.01));        // 1.0 <= 1.01
    CHECK(rel_close(101.0, 100.0, 0.01));
    CHECK_FALSE(rel_close(100.0, 101.5, 0.01));  // 1.5 > 1.015
    CHECK(rel_close(0.0, 0.0, 0.01));
    CHECK_FALSE(rel_close(0.0, 0.001, 0.01));    // rel of max(|a|,|b|) = 1e-5
    CHECK(rel_close(-5.0, -5.04, 0.01));
}

TEST_CASE("parse_numbered_lines strips numbering and ignores chatter") {
    const auto items = parse_numbered_lines(
        "Here is the decomposition:\n1. First sub-question?\n2) Second sub-question?\n"
        "note: something else\n3. Third\n");
    REQUIRE(items.size() == 3);
    CHECK(items[0] == "First sub-question?");
    CHECK(items[1] == "Second sub-question?");
    CHECK(items[2] == "Third");
    CHECK(parse_numbered_lines("no list at all").empty());
}

TEST_CASE("read_file and write_file round-trip and raise IoError") {
    const auto path = std::filesystem::temp_directory_path() / "finrag_util_io_test.txt";
    write_file(path, "line1\nline2");
    CHECK(read_file(path) == "line1\nline2");
    std::filesystem::remove(path);
    CHECK_THROWS_AS((void)read_file(path), IoError);

    const auto lines = split_lines("a\r\nb\nc");
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "a");
    CHECK(lines[1] == "b");
    CHECK(lines[2] == "c");
}
