#pragma once

#include <cstdint>
#include <vector>

namespace lrec {

// SplitMix64. Self-contained so that seeded runs produce identical streams on
// every platform; std::uniform_int_distribution makes no such promise.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n), n > 0. Rejection-free modulo is fine here: draws are
    // for test-case generation and agent choices, not statistics.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::uint64_t fork() { return next_u64(); }

  private:
    std::uint64_t state_;
};

}  // namespace lrec
