#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace glyphspot {

// Deterministic 64-bit generator (SplitMix64). All randomness in the library
// flows through this type so that runs are reproducible from a seed alone,
// independent of platform or standard-library internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double next_double();

    // Uniform integer in [0, n). n must be > 0. Uses rejection sampling so the
    // result is unbiased and depends only on the stream, not on n's factors.
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached, so draws come in a fixed order.
    double next_gaussian();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Substream seeded from (seed, tag); used so per-page randomness does not
    // depend on generation order.
    static Rng derive(std::uint64_t seed, std::string_view tag);

private:
    std::uint64_t state_;
    bool has_cached_gaussian_ = false;
    double cached_gaussian_ = 0.0;
};

// FNV-1a 64-bit hash; also used for input digests in run metadata.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace glyphspot
