#pragma once

// Random primitives used by the generator: the truncated power law that
// drives degree and community-size sequences, stochastic rounding, and
// uniform sampling in a d-dimensional ball.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mln/rng.hpp"

namespace mln {

// Truncated power law on integers k in [lo, hi]:
//   P(X = k) = int_k^{k+1} x^-gamma dx / int_lo^{hi+1} x^-gamma dx
// Sampling inverts the continuous truncated CDF and floors, which lands in
// bucket k with exactly the mass above; O(1) per draw.
class TruncatedPowerLaw {
public:
    TruncatedPowerLaw(double gamma, std::uint64_t lo, std::uint64_t hi)
        : gamma_(gamma), lo_(lo), hi_(hi) {
        if (lo == 0 || lo > hi)
            throw std::invalid_argument("TruncatedPowerLaw: need 1 <= lo <= hi");
        if (!(gamma > 0.0))
            throw std::invalid_argument("TruncatedPowerLaw: need gamma > 0");
        a_lo_ = anti(static_cast<double>(lo_));
        a_hi_ = anti(static_cast<double>(hi_) + 1.0);
        norm_ = a_hi_ - a_lo_;
    }

    double gamma() const { return gamma_; }
    std::uint64_t lo() const { return lo_; }
    std::uint64_t hi() const { return hi_; }

    double pmf(std::uint64_t k) const {
        if (k < lo_ || k > hi_)
            throw std::domain_error("TruncatedPowerLaw::pmf: k out of range");
        const double a = anti(static_cast<double>(k));
        const double b = anti(static_cast<double>(k) + 1.0);
        return (b - a) / norm_;
    }

    // P(X >= k); k may sit anywhere in [lo, hi+1].
    double cdf_at_least(std::uint64_t k) const {
        if (k <= lo_) return 1.0;
        if (k > hi_) return 0.0;
        return (a_hi_ - anti(static_cast<double>(k))) / norm_;
    }

    std::uint64_t sample(RngStream& rng) const {
        if (lo_ == hi_) return lo_;
        const double u = rng.uniform01();
        const double y = a_lo_ + u * norm_;
        const double x = inv_anti(y);
        if (!(x > static_cast<double>(lo_))) return lo_;
        auto k = static_cast<std::uint64_t>(x);
        if (k < lo_) k = lo_;
        if (k > hi_) k = hi_;
        return k;
    }

    std::vector<std::uint64_t> sample(std::size_t count, RngStream& rng) const {
        std::vector<std::uint64_t> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(sample(rng));
        return out;
    }

private:
    // Antiderivative of x^-gamma; the gamma == 1 branch keeps the sampler
    // total even though the model's parameter tables exclude it.
    double anti(double x) const {
        if (gamma_ == 1.0) return std::log(x);
        return std::pow(x, 1.0 - gamma_) / (1.0 - gamma_);
    }

    double inv_anti(double y) const {
        if (gamma_ == 1.0) return std::exp(y);
        return std::pow((1.0 - gamma_) * y, 1.0 / (1.0 - gamma_));
    }

    double gamma_;
    std::uint64_t lo_, hi_;
    double a_lo_ = 0.0, a_hi_ = 0.0, norm_ = 1.0;
};

// floor(x) + Bernoulli(frac(x)); expectation is exactly x.
inline std::uint64_t stochastic_round(double x, RngStream& rng) {
    if (x < 0.0) throw std::domain_error("stochastic_round: negative input");
    const double f = std::floor(x);
    const double frac = x - f;
    auto base = static_cast<std::uint64_t>(f);
    return (frac > 0.0 && rng.bernoulli(frac)) ? base + 1 : base;
}

// Uniform point in the closed unit d-ball: Gaussian direction scaled by
// U^(1/d).
inline std::vector<double> sample_unit_ball(std::size_t d, RngStream& rng) {
    if (d == 0) throw std::invalid_argument("sample_unit_ball: d >= 1");
    std::vector<double> p(d);
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            p[i] = rng.normal();
            norm2 += p[i] * p[i];
        }
    } while (norm2 == 0.0);
    const double radius = std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
    const double scale = radius / std::sqrt(norm2);
    for (double& c : p) c *= scale;
    return p;
}

}  // namespace mln
