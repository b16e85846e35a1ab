#pragma once

// Seedable deterministic random streams. All randomness in the library goes
// through RngStream so that a fixed (seed, label) pair reproduces the same
// draw sequence on every platform; std::mt19937_64 output is standardized,
// and the uniform/normal transforms below avoid the implementation-defined
// <random> distributions.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mln {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::string label = {})
        : seed_(seed),
          label_(std::move(label)),
          engine_(detail::splitmix64(seed ^ detail::fnv1a64(label_))) {}

    // Child streams are keyed by label, not by draw position, so per-layer
    // and per-phase work stays reproducible regardless of execution order.
    RngStream child(std::string_view label) const {
        std::string full = label_.empty()
                               ? std::string(label)
                               : label_ + "/" + std::string(label);
        return RngStream(seed_, std::move(full));
    }

    std::uint64_t seed() const { return seed_; }
    const std::string& label() const { return label_; }

    std::uint64_t u64() { return engine_(); }

    // uniform on [0,1)
    double uniform01() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    // uniform on (0,1]
    double uniform01_open() {
        return static_cast<double>((u64() >> 11) + 1) * 0x1.0p-53;
    }

    // uniform integer in [0, n), n > 0 (Lemire's multiply-shift rejection)
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t x = u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                x = u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) { return uniform01() < p; }

    double normal(double mean = 0.0, double sd = 1.0) {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::string label_;
    std::mt19937_64 engine_;
};

}  // namespace mln
