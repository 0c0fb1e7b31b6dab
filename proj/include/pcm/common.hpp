// Shared basics: error type, bit helpers, integer utilities.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcm {

using Bits = std::vector<std::uint8_t>;

// Thrown on precondition violations (bad m, K out of range, ...).
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown on malformed input files; message carries the line number.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidParameter(msg);
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
    require(is_power_of_two(n), "expected a power of two, got " + std::to_string(n));
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

// Decimal formatting for wide counters (search-space sizes need 128 bits at m=5).
inline std::string to_string_u128(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

} // namespace pcm
