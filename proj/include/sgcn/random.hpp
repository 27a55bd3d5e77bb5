#ifndef SGCN_RANDOM_HPP
#define SGCN_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace sgcn {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Independent deterministic stream for (seed, stream-tag, index).
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::uint64_t s = detail::splitmix64(seed);
    s = detail::splitmix64(s ^ detail::splitmix64(stream + 0x51ed270b27e8a5c1ULL));
    s = detail::splitmix64(s ^ detail::splitmix64(index + 0x2545f4914f6cdd1dULL));
    return Rng(s);
}

/// Uniform integer in [0, bound).
inline std::size_t uniform_index(Rng& rng, std::size_t bound) {
    return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
}

template <typename T>
void shuffle_in_place(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::swap(values[i - 1], values[uniform_index(rng, i)]);
    }
}

// Stream tags keep the consumers of a single user seed decorrelated.
namespace streams {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t batch = 3;
} // namespace streams

} // namespace sgcn

#endif // SGCN_RANDOM_HPP
