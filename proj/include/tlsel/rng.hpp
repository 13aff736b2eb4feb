#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace tlsel {

// splitmix64 stream. Hand-rolled so that draws are reproducible across
// standard libraries and platforms, which <random> distributions are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform in [0, n); n > 0
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t seed_part(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t seed_part(const char* s) { return seed_part(std::string_view(s)); }
inline std::uint64_t seed_part(const std::string& s) { return seed_part(std::string_view(s)); }

template <class T>
    requires std::is_integral_v<T>
std::uint64_t seed_part(T v) {
    return static_cast<std::uint64_t>(v);
}

}  // namespace detail

// Deterministic stream-id derivation: folds each part into the base seed.
// Used everywhere a sub-computation needs its own independent stream, e.g.
// (master seed, task id, step k, run r) -> run stream.
template <class... Parts>
std::uint64_t derive_seed(std::uint64_t base, const Parts&... parts) {
    std::uint64_t h = detail::mix64(base + 0x9e3779b97f4a7c15ull);
    ((h = detail::mix64(h ^ (detail::seed_part(parts) + 0x9e3779b97f4a7c15ull +
                             (h << 6) + (h >> 2)))),
     ...);
    return h;
}

// First k elements of a seeded partial Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                           Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::size_t j = i + rng.next_index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace tlsel
