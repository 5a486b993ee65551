#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trifuse {

// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

// SplitMix64 finalizer, used for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard and every value mapping below is spelled out explicitly, so a
// given seed yields the same stream on every platform. The standard
// <random> distributions are implementation-defined and deliberately not
// used here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

    std::uint64_t next() { return gen_(); }

    // [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller; u1 is shifted into (0,1] so log never
    // sees zero
    double gaussian();

    // unbiased integer in [0, n), n > 0, via rejection sampling
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // independent substream for a named purpose
    Rng child(std::string_view tag) const { return Rng(splitmix64(seed_ ^ fnv1a64(tag))); }

    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 gen_;
    std::uint64_t seed_;
};

}  // namespace trifuse
