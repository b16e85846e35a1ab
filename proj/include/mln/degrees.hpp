#pragma once

// Active-actor selection and label-correlated degree sequences. The degree
// ordering is driven by latent values X_a = a/n + sigma * Z with sigma
// looked up from an empirically calibrated table so that the Kendall
// correlation between labels and the degree ranking hits the requested tau.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mln/measures.hpp"
#include "mln/rng.hpp"
#include "mln/sampling.hpp"

namespace mln {

inline std::vector<std::uint8_t> select_active(std::uint32_t n, double q,
                                               RngStream& rng) {
    if (!(q > 0.0 && q <= 1.0))
        throw std::domain_error("select_active: q must lie in (0,1]");
    std::vector<std::uint8_t> mask(n, 0);
    if (q >= 1.0) {
        std::fill(mask.begin(), mask.end(), 1);
        return mask;
    }
    for (std::uint32_t a = 0; a < n; ++a) mask[a] = rng.bernoulli(q) ? 1 : 0;
    return mask;
}

struct DegreeSequence {
    std::vector<std::uint32_t> degrees;  // sorted non-increasing
    bool parity_decremented = false;
};

// n_active i.i.d. draws from tpl(gamma, delta, Delta), sorted non-increasing;
// the largest entry drops by one when the sum is odd.
inline DegreeSequence generate_degrees(std::size_t n_active, double gamma,
                                       std::uint32_t delta, std::uint32_t Delta,
                                       RngStream& rng) {
    TruncatedPowerLaw law(gamma, delta, Delta);
    DegreeSequence out;
    out.degrees.reserve(n_active);
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < n_active; ++i) {
        const auto d = static_cast<std::uint32_t>(law.sample(rng));
        out.degrees.push_back(d);
        sum += d;
    }
    std::sort(out.degrees.begin(), out.degrees.end(),
              std::greater<std::uint32_t>());
    if (sum % 2 == 1 && !out.degrees.empty()) {
        --out.degrees.front();
        out.parity_decremented = true;
        std::sort(out.degrees.begin(), out.degrees.end(),
                  std::greater<std::uint32_t>());
    }
    return out;
}

// Monotone sigma -> expected-tau table, calibrated once at large n and
// interpolated linearly on tau.
class SigmaTable {
public:
    SigmaTable() = default;
    SigmaTable(std::vector<double> sigma, std::vector<double> tau,
               std::uint64_t n_cal = 0)
        : sigma_(std::move(sigma)), tau_(std::move(tau)), n_cal_(n_cal) {
        if (sigma_.size() != tau_.size() || sigma_.empty())
            throw std::invalid_argument("SigmaTable: mismatched grid");
        enforce_monotone();
    }

    const std::vector<double>& sigma() const { return sigma_; }
    const std::vector<double>& tau() const { return tau_; }
    std::uint64_t n_cal() const { return n_cal_; }
    bool empty() const { return sigma_.empty(); }

    // sigma for a target tau in [0,1]; 0 maps to the largest tabulated
    // sigma, 1 to sigma = 0.
    double sigma_for_tau(double target) const {
        if (!(target >= 0.0 && target <= 1.0))
            throw std::domain_error("sigma_for_tau: target outside [0,1]");
        if (empty()) throw std::logic_error("sigma_for_tau: empty table");
        if (target >= tau_.front()) return sigma_.front();
        if (target <= tau_.back()) return sigma_.back();
        std::size_t k = 0;
        while (k + 1 < tau_.size() && tau_[k + 1] > target) ++k;
        // tau_[k] > target >= tau_[k+1]
        const double t0 = tau_[k], t1 = tau_[k + 1];
        if (t0 == t1) return sigma_[k];
        const double w = (t0 - target) / (t0 - t1);
        return sigma_[k] + w * (sigma_[k + 1] - sigma_[k]);
    }

    // Built-in n=10^6 calibration shipped with the library.
    static const SigmaTable& builtin();

private:
    void enforce_monotone() {
        // Mild measurement noise can break monotonicity between adjacent
        // grid points; clamp to a non-increasing envelope from the right.
        for (std::size_t k = tau_.size(); k-- > 1;)
            tau_[k - 1] = std::max(tau_[k - 1], tau_[k]);
        tau_.front() = 1.0;  // sigma = 0 is deterministic
    }

    std::vector<double> sigma_;
    std::vector<double> tau_;
    std::uint64_t n_cal_ = 0;
};

// Mean tau between labels 1..n_cal and X_a = a/n_cal + sigma * Z over reps
// repetitions, for each sigma in the grid.
inline SigmaTable build_sigma_table(std::uint64_t n_cal,
                                    const std::vector<double>& grid,
                                    std::uint32_t reps, RngStream& rng) {
    if (grid.empty()) throw std::invalid_argument("build_sigma_table: empty grid");
    std::vector<double> taus(grid.size(), 0.0);
    std::vector<double> labels(n_cal), xs(n_cal);
    for (std::uint64_t a = 0; a < n_cal; ++a)
        labels[a] = static_cast<double>(a + 1);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double sigma = grid[g];
        if (sigma == 0.0) {
            taus[g] = 1.0;
            continue;
        }
        double acc = 0.0;
        for (std::uint32_t rep = 0; rep < reps; ++rep) {
            RngStream stream = rng.child("sigma=" + std::to_string(g) +
                                         "/rep=" + std::to_string(rep));
            for (std::uint64_t a = 0; a < n_cal; ++a)
                xs[a] = stream.normal(static_cast<double>(a + 1) /
                                          static_cast<double>(n_cal),
                                      sigma);
            acc += kendall_tau_b(labels, xs);
        }
        taus[g] = acc / reps;
    }
    return SigmaTable(grid, std::move(taus), n_cal);
}

// Per-layer output of Phases 1-2.
struct DegreePlan {
    std::vector<std::uint8_t> active;
    std::vector<std::uint32_t> degree;  // per actor, 0 for inactive
    double achieved_tau = 0.0;          // label/ordering correlation actually hit
    bool parity_decremented = false;
};

// Assigns the sorted degree list to active actors so that the label/degree
// ordering correlation is as close as possible to tau. Twenty candidate
// orderings are generated with the calibrated sigma and the closest one is
// kept; negative tau flips the kept ordering.
inline DegreePlan assign_degrees(const std::vector<std::uint8_t>& active,
                                 const std::vector<std::uint32_t>& sorted_degrees,
                                 double tau, const SigmaTable& table,
                                 RngStream& rng, std::uint32_t candidates = 20) {
    const std::uint32_t n = static_cast<std::uint32_t>(active.size());
    std::vector<std::uint32_t> actors;
    for (std::uint32_t a = 0; a < n; ++a)
        if (active[a]) actors.push_back(a);
    const std::size_t N = actors.size();
    if (sorted_degrees.size() != N)
        throw std::invalid_argument("assign_degrees: degree count != active count");

    DegreePlan plan;
    plan.active = active;
    plan.degree.assign(n, 0);

    if (N == 0) return plan;
    if (N == 1) {
        plan.degree[actors[0]] = sorted_degrees[0];
        plan.achieved_tau = tau < 0 ? -1.0 : 1.0;
        return plan;
    }

    const double target = std::abs(tau);
    const double sigma = table.sigma_for_tau(target);

    std::vector<double> labels(N);
    for (std::size_t i = 0; i < N; ++i)
        labels[i] = static_cast<double>(actors[i] + 1);

    // order[r] = index into actors of the rank-(r+1) actor (smallest X first).
    std::vector<std::uint32_t> best_order(N);
    double best_tau = 0.0;

    if (sigma == 0.0) {
        for (std::size_t i = 0; i < N; ++i)
            best_order[i] = static_cast<std::uint32_t>(i);
        best_tau = 1.0;
    } else {
        std::vector<double> xs(N);
        std::vector<std::uint32_t> order(N);
        bool have_best = false;
        for (std::uint32_t c = 0; c < candidates; ++c) {
            RngStream stream = rng.child("candidate=" + std::to_string(c));
            for (std::size_t i = 0; i < N; ++i)
                xs[i] = stream.normal(
                    static_cast<double>(actors[i] + 1) / static_cast<double>(n),
                    sigma);
            const double t = kendall_tau_b(labels, xs);
            if (!have_best || std::abs(t - target) < std::abs(best_tau - target)) {
                have_best = true;
                best_tau = t;
                for (std::size_t i = 0; i < N; ++i)
                    order[i] = static_cast<std::uint32_t>(i);
                std::sort(order.begin(), order.end(),
                          [&](std::uint32_t a, std::uint32_t b) {
                              if (xs[a] != xs[b]) return xs[a] < xs[b];
                              return a < b;  // ties by label, probability 0
                          });
                best_order = order;
            }
        }
    }

    if (tau < 0.0) {
        std::reverse(best_order.begin(), best_order.end());
        best_tau = -best_tau;
    }

    // Rank r (smallest X) receives the r-th largest degree.
    for (std::size_t r = 0; r < N; ++r)
        plan.degree[actors[best_order[r]]] = sorted_degrees[r];
    plan.achieved_tau = best_tau;
    return plan;
}

}  // namespace mln

#include "mln/sigma_table_data.hpp"  // defines SigmaTable::builtin()
