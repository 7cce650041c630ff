#include "finrag/util.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "finrag/errors.hpp"

namespace finrag {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string to_hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return std::string(s.substr(begin, end - begin));
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ascii_alnum(char c) {
    return is_ascii_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return true;
    const std::string h = lower_ascii(haystack);
    const std::string n = lower_ascii(needle);
    return h.find(n) != std::string::npos;
}

bool contains_word_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    const std::string h = lower_ascii(haystack);
    const std::string n = lower_ascii(needle);
    std::size_t pos = 0;
    while ((pos = h.find(n, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_ascii_alnum(h[pos - 1]);
        const std::size_t after = pos + n.size();
        const bool right_ok = after >= h.size() || !is_ascii_alnum(h[after]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf.data(), ptr);
}

double round_places(double value, int places) {
    const double scale = std::pow(10.0, places);
    return std::round(value * scale) / scale;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double out = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return out;
}

std::optional<long> parse_long(std::string_view s) {
    if (s.empty()) return std::nullopt;
    long out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return out;
}

std::optional<double> parse_financial_number(std::string_view s) {
    std::string work = trim(s);
    if (work.empty()) return std::nullopt;

    bool negate = false;
    if (work.front() == '(' && work.back() == ')') {
        negate = true;
        work = trim(std::string_view(work).substr(1, work.size() - 2));
        if (work.empty()) return std::nullopt;
    }

    std::string cleaned;
    cleaned.reserve(work.size());
    for (char c : work) {
        if (c == '$' || c == ',') continue;
        cleaned.push_back(c);
    }
    cleaned = trim(cleaned);
    if (cleaned.empty()) return std::nullopt;

    double scale = 1.0;
    if (cleaned.back() == '%') {
        scale = 0.01;
        cleaned = trim(std::string_view(cleaned).substr(0, cleaned.size() - 1));
        if (cleaned.empty()) return std::nullopt;
    }

    std::optional<double> value;
    // "a/b" fractions: exactly one slash, numeric on both sides.
    const std::size_t slash = cleaned.find('/');
    if (slash != std::string::npos && cleaned.find('/', slash + 1) == std::string::npos) {
        const auto numerator = parse_double(trim(std::string_view(cleaned).substr(0, slash)));
        const auto denominator = parse_double(trim(std::string_view(cleaned).substr(slash + 1)));
        if (numerator && denominator && *denominator != 0.0) {
            value = *numerator / *denominator;
        }
    } else {
        value = parse_double(cleaned);
    }

    if (!value || !std::isfinite(*value)) return std::nullopt;
    return (negate ? -1.0 : 1.0) * scale * *value;
}

std::optional<std::string> last_numeric_token(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));

    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        std::string token = *it;
        // Trailing sentence punctuation is noise; '%', ')' and '$' are not.
        // A decimal point is always followed by digits, so a final '.' can go.
        while (!token.empty() && (token.back() == '.' || token.back() == ',' ||
                                  token.back() == ';' || token.back() == ':' ||
                                  token.back() == '!' || token.back() == '?')) {
            token.pop_back();
        }
        if (!token.empty() && parse_financial_number(token)) return token;
    }
    return std::nullopt;
}

bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

std::vector<std::string> parse_numbered_lines(std::string_view text) {
    std::vector<std::string> items;
    for (const auto& raw : split_lines(text)) {
        const std::string line = trim(raw);
        std::size_t i = 0;
        while (i < line.size() && is_ascii_digit(line[i])) ++i;
        if (i == 0 || i >= line.size()) continue;
        if (line[i] != '.' && line[i] != ')') continue;
        std::string item = trim(std::string_view(line).substr(i + 1));
        if (!item.empty()) items.push_back(std::move(item));
    }
    return items;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write to " + path.string());
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

}  // namespace finrag
