#pragma once

#include <cmath>
#include <cstdint>

namespace rmt {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Counter-based stream keyed by (seed, trial, i, j). Each key owns an
// independent splitmix64 sequence, so sampling entry (i,j) of trial k never
// depends on evaluation order, worker count, or what other entries were drawn.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) : state_(key) {}

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t trial,
                                    std::uint64_t i, std::uint64_t j) {
        std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
        k = mix64(k ^ (trial + 0xbb67ae8584caa73bULL));
        k = mix64(k ^ (i + 0x3c6ef372fe94f82bULL));
        k = mix64(k ^ (j + 0xa54ff53a5f1d36f1ULL));
        return k;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // uniform in the open interval (0,1); never returns an exact endpoint
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    // standard normal, Box-Muller; consumes two uniforms per pair
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rmt
