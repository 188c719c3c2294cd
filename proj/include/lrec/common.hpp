#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrec {

// Unbounded integer for counters and number-tuple encodings. Counter values in
// graph rounds reach n^q and label encodings reach (n+1)^d, both past 64 bits
// at large parameters.
using BigInt = boost::multiprecision::cpp_int;

// Raised when a semi-graph materialization would exceed the configured node or
// pair budget. Mapped to exit code 3 by the CLI.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Floor division, also correct for negative numerators. C++ '/' truncates
// toward zero; the recursion below needs floor((l-1)/d) = -1 at l = 0.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long long floor_div_ll(long long a, long long b) {
    long long q = a / b;
    if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

// FNV-1a, used for state hashes in transcripts.
inline std::uint64_t fnv1a(const void* data, std::size_t size,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x00000100000001b3ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s,
                           std::uint64_t seed = 0xcbf29ce484222325ull) {
    return fnv1a(s.data(), s.size(), seed);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

struct VecU32Hash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const {
        std::uint64_t h = v.size();
        for (auto x : v) h = hash_combine(h, 0x9e3779b97f4a7c15ull ^ x);
        return static_cast<std::size_t>(h);
    }
};

struct PairU32Hash {
    std::size_t operator()(const std::pair<std::uint32_t, std::uint32_t>& p) const {
        return static_cast<std::size_t>(
            hash_combine(0x517cc1b727220a95ull ^ p.first, p.second));
    }
};

}  // namespace lrec
