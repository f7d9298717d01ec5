#pragma once

#include <cstdint>
#include <cstddef>

namespace grn {

/// Deterministic 64-bit generator (splitmix64). Used everywhere instead of
/// <random> engines so that streams are bit-reproducible across platforms,
/// standard libraries and worker counts.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

    /// Uniform double in [0, 1), 53 significant bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    bool bernoulli(double p) { return next_unit() < p; }

    /// Uniform integer in [0, n). Lemire multiply-shift; bias is below 2^-32
    /// for the population sizes used here.
    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

  private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Derives an independent child seed from a base seed and up to three stream
/// coordinates (e.g. stream tag, generation, offspring index). Pure function:
/// parallel and serial schedules obtain the same seeds.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = detail::mix64(base ^ 0x6a09e667f3bcc909ULL);
    h = detail::mix64(h ^ (stream + 0x9e3779b97f4a7c15ULL));
    h = detail::mix64(h ^ (a + 0xbb67ae8584caa73bULL));
    h = detail::mix64(h ^ (b + 0x3c6ef372fe94f82bULL));
    return h;
}

/// Stream tags for derive_seed: keeps unrelated random streams disjoint.
enum SeedStream : std::uint64_t {
    kSeedGenomeInit = 1,
    kSeedMutation = 2,
    kSeedEvaluation = 3,
    kSeedParentPick = 4,
    kSeedEpisodeState = 5,
};

} // namespace grn
