#pragma once

// Community-size sequences summing exactly to the active count, the shared
// geometric reference layer, greedy farthest-point community assignment,
// and the correlation-strength reshuffle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mln/rng.hpp"
#include "mln/sampling.hpp"
#include "mln/types.hpp"

namespace mln {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommunitySizes {
    std::vector<std::uint32_t> sizes;
    bool exceeded_S = false;  // some size was pushed past S by the +1 fix
};

// Draws sizes until they cover N, then resolves the overshoot x: shrink the
// last community when it stays >= s, otherwise delete it and spread +1
// increments over c - x earlier communities, preferring ones still below S.
template <class SizeSampler>
inline CommunitySizes generate_community_sizes_with(std::uint64_t N,
                                                    std::uint32_t s,
                                                    std::uint32_t S,
                                                    SizeSampler&& next_size,
                                                    RngStream& rng) {
    CommunitySizes out;
    if (N == 0) return out;
    if (N < s)
        throw GenerationError("n too small for minimum community size");
    std::uint64_t sum = 0;
    while (sum < N) {
        const std::uint32_t c = next_size();
        out.sizes.push_back(c);
        sum += c;
    }
    const std::uint64_t x = sum - N;
    if (x > 0) {
        const std::uint32_t last = out.sizes.back();
        if (last >= x + s) {
            out.sizes.back() = static_cast<std::uint32_t>(last - x);
        } else {
            out.sizes.pop_back();
            std::uint64_t increments = last - x;  // c - x, with c < x + s
            while (increments-- > 0) {
                std::vector<std::uint32_t> below;
                for (std::uint32_t j = 0; j < out.sizes.size(); ++j)
                    if (out.sizes[j] < S) below.push_back(j);
                std::uint32_t pick;
                if (!below.empty()) {
                    pick = below[rng.below(below.size())];
                } else {
                    pick = static_cast<std::uint32_t>(rng.below(out.sizes.size()));
                    out.exceeded_S = true;
                }
                ++out.sizes[pick];
            }
        }
    }
    return out;
}

// The tpl(beta, s, S) instantiation used by the generator.
inline CommunitySizes generate_community_sizes(std::uint64_t N, double beta,
                                               std::uint32_t s, std::uint32_t S,
                                               RngStream& rng) {
    if (N > 0 && N >= s) {
        TruncatedPowerLaw law(beta, s, S);
        return generate_community_sizes_with(
            N, s, S,
            [&] { return static_cast<std::uint32_t>(law.sample(rng)); }, rng);
    }
    return generate_community_sizes_with(
        N, s, S, [] { return std::uint32_t{0}; }, rng);
}

// Latent positions shared by every layer of one generation run.
struct ReferenceLayer {
    std::uint32_t n = 0;
    std::uint32_t d = 0;
    std::vector<double> coords;  // row-major, n x d

    const double* point(std::uint32_t a) const { return coords.data() + std::size_t(a) * d; }

    double dist2(std::uint32_t a, std::uint32_t b) const {
        const double* pa = point(a);
        const double* pb = point(b);
        double sum = 0.0;
        for (std::uint32_t k = 0; k < d; ++k) {
            const double t = pa[k] - pb[k];
            sum += t * t;
        }
        return sum;
    }

    double norm2(std::uint32_t a) const {
        const double* pa = point(a);
        double sum = 0.0;
        for (std::uint32_t k = 0; k < d; ++k) sum += pa[k] * pa[k];
        return sum;
    }
};

inline ReferenceLayer build_reference_layer(std::uint32_t n, std::uint32_t d,
                                            RngStream& rng) {
    ReferenceLayer ref;
    ref.n = n;
    ref.d = d;
    ref.coords.resize(std::size_t(n) * d);
    for (std::uint32_t a = 0; a < n; ++a) {
        const auto p = sample_unit_ball(d, rng);
        std::copy(p.begin(), p.end(), ref.coords.begin() + std::size_t(a) * d);
    }
    return ref;
}

namespace detail {

// Uniform grid over [-1,1]^d holding the not-yet-assigned active points;
// supports farthest-remaining queries via a precomputed norm order and
// k-nearest queries via expanding cell rings. Exact for d <= 3; callers
// fall back to brute force above that.
class BallGrid {
public:
    BallGrid(const ReferenceLayer& ref, const std::vector<std::uint32_t>& points)
        : ref_(ref) {
        const std::size_t m = points.size();
        cells_per_axis_ = std::max<std::uint32_t>(
            1, static_cast<std::uint32_t>(
                   std::floor(std::pow(static_cast<double>(m) / 2.0 + 1.0,
                                       1.0 / ref.d))));
        cells_per_axis_ = std::min<std::uint32_t>(cells_per_axis_, 1u << 10);
        cell_width_ = 2.0 / cells_per_axis_;
        std::uint64_t n_cells = 1;
        for (std::uint32_t k = 0; k < ref.d; ++k) n_cells *= cells_per_axis_;
        cells_.assign(n_cells, {});
        slot_.assign(ref.n, {0, 0});
        present_.assign(ref.n, 0);
        for (auto a : points) insert(a);
    }

    void remove(std::uint32_t a) {
        if (!present_[a]) return;
        auto [c, pos] = slot_[a];
        auto& vec = cells_[c];
        vec[pos] = vec.back();
        slot_[vec[pos]] = {c, pos};
        vec.pop_back();
        present_[a] = 0;
    }

    // k nearest remaining points to `seed` (which must already be removed).
    std::vector<std::uint32_t> nearest(std::uint32_t seed, std::size_t k) const {
        std::vector<std::uint32_t> result;
        if (k == 0) return result;
        // (dist2, label) max-heap of current best k
        std::vector<std::pair<double, std::uint32_t>> heap;
        heap.reserve(k + 1);
        auto cmp = [](const std::pair<double, std::uint32_t>& a,
                      const std::pair<double, std::uint32_t>& b) {
            return a < b;
        };
        const std::uint32_t d = ref_.d;
        std::vector<std::int64_t> base(d);
        for (std::uint32_t kk = 0; kk < d; ++kk)
            base[kk] = coord_cell(ref_.point(seed)[kk]);

        std::vector<std::int64_t> cur(d);
        for (std::uint32_t ring = 0;; ++ring) {
            bool any_cell = visit_ring(seed, base, cur, 0, ring, k, heap, cmp);
            if (heap.size() == k) {
                // Cells at Chebyshev distance ring+1 are at least
                // ring * cell_width away in Euclidean terms.
                const double lb = static_cast<double>(ring) * cell_width_;
                if (heap.front().first <= lb * lb) break;
            }
            if (!any_cell && ring > cells_per_axis_) break;  // grid exhausted
        }
        std::sort_heap(heap.begin(), heap.end(), cmp);
        result.reserve(heap.size());
        for (auto& [d2, a] : heap) result.push_back(a);
        return result;
    }

private:
    std::int64_t coord_cell(double x) const {
        auto c = static_cast<std::int64_t>((x + 1.0) / cell_width_);
        if (c < 0) c = 0;
        if (c >= cells_per_axis_) c = cells_per_axis_ - 1;
        return c;
    }

    std::uint64_t cell_index(const std::vector<std::int64_t>& coords) const {
        std::uint64_t idx = 0;
        for (auto c : coords) idx = idx * cells_per_axis_ + static_cast<std::uint64_t>(c);
        return idx;
    }

    void insert(std::uint32_t a) {
        std::vector<std::int64_t> c(ref_.d);
        for (std::uint32_t k = 0; k < ref_.d; ++k)
            c[k] = coord_cell(ref_.point(a)[k]);
        const std::uint64_t idx = cell_index(c);
        slot_[a] = {idx, static_cast<std::uint32_t>(cells_[idx].size())};
        cells_[idx].push_back(a);
        present_[a] = 1;
    }

    template <class Cmp>
    void scan_cell(std::uint32_t seed, std::uint64_t idx, std::size_t k,
                   std::vector<std::pair<double, std::uint32_t>>& heap,
                   Cmp cmp) const {
        for (auto a : cells_[idx]) {
            const double d2 = ref_.dist2(seed, a);
            std::pair<double, std::uint32_t> cand{d2, a};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), cmp);
            } else if (cand < heap.front()) {
                std::pop_heap(heap.begin(), heap.end(), cmp);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), cmp);
            }
        }
    }

    // Recursively enumerates cells whose Chebyshev distance from `base`
    // equals `ring`; returns whether any in-bounds cell was visited.
    template <class Cmp>
    bool visit_ring(std::uint32_t seed, const std::vector<std::int64_t>& base,
                    std::vector<std::int64_t>& cur, std::uint32_t dim,
                    std::uint32_t ring, std::size_t k,
                    std::vector<std::pair<double, std::uint32_t>>& heap,
                    Cmp cmp) const {
        if (dim == ref_.d) {
            std::int64_t cheb = 0;
            for (std::uint32_t kk = 0; kk < ref_.d; ++kk)
                cheb = std::max(cheb, std::abs(cur[kk] - base[kk]));
            if (cheb != static_cast<std::int64_t>(ring)) return false;
            scan_cell(seed, cell_index(cur), k, heap, cmp);
            return true;
        }
        bool any = false;
        const std::int64_t lo = base[dim] - static_cast<std::int64_t>(ring);
        const std::int64_t hi = base[dim] + static_cast<std::int64_t>(ring);
        for (std::int64_t c = lo; c <= hi; ++c) {
            if (c < 0 || c >= cells_per_axis_) continue;
            // Prune interior coordinates unless a later dim can still reach
            // the ring; cheap relative to cell scans, so keep it simple and
            // filter at the leaf.
            cur[dim] = c;
            any |= visit_ring(seed, base, cur, dim + 1, ring, k, heap, cmp);
        }
        return any;
    }

    const ReferenceLayer& ref_;
    std::uint32_t cells_per_axis_ = 1;
    double cell_width_ = 2.0;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> slot_;
    std::vector<std::uint8_t> present_;
};

}  // namespace detail

// Greedy geometric assignment: communities are processed in a uniformly
// random order; each takes the remaining active actor farthest from the
// origin plus its size-1 nearest remaining neighbours. Inactive actors get
// community 0; community ids follow the order of `sizes` (1-based).
inline std::vector<std::int32_t> assign_geometric(
    const ReferenceLayer& ref, const std::vector<std::uint8_t>& active,
    const std::vector<std::uint32_t>& sizes, RngStream& rng) {
    const std::uint32_t n = ref.n;
    std::vector<std::int32_t> part(n, 0);
    std::vector<std::uint32_t> pool;
    for (std::uint32_t a = 0; a < n; ++a)
        if (active[a]) pool.push_back(a);

    std::uint64_t need = 0;
    for (auto s : sizes) need += s;
    if (need != pool.size())
        throw std::invalid_argument("assign_geometric: sizes must sum to the active count");
    if (sizes.empty()) return part;

    std::vector<std::uint32_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    // Farthest-from-origin order, ties by label.
    std::vector<std::uint32_t> by_norm = pool;
    std::sort(by_norm.begin(), by_norm.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double na = ref.norm2(a), nb = ref.norm2(b);
        if (na != nb) return na > nb;
        return a < b;
    });
    std::vector<std::uint8_t> assigned(n, 0);
    std::size_t cursor = 0;

    const bool use_grid = ref.d <= 3;
    detail::BallGrid grid(ref, use_grid ? pool : std::vector<std::uint32_t>{});

    for (auto j : order) {
        const std::uint32_t size = sizes[j];
        while (cursor < by_norm.size() && assigned[by_norm[cursor]]) ++cursor;
        const std::uint32_t seedling = by_norm[cursor];
        assigned[seedling] = 1;
        part[seedling] = static_cast<std::int32_t>(j) + 1;
        if (use_grid) grid.remove(seedling);

        std::vector<std::uint32_t> members;
        if (size > 1) {
            if (use_grid) {
                members = grid.nearest(seedling, size - 1);
            } else {
                members.reserve(size - 1);
                std::vector<std::pair<double, std::uint32_t>> cand;
                for (auto a : pool)
                    if (!assigned[a]) cand.emplace_back(ref.dist2(seedling, a), a);
                std::partial_sort(cand.begin(),
                                  cand.begin() + std::min<std::size_t>(size - 1, cand.size()),
                                  cand.end());
                for (std::size_t i = 0; i < size - 1 && i < cand.size(); ++i)
                    members.push_back(cand[i].second);
            }
        }
        for (auto a : members) {
            assigned[a] = 1;
            part[a] = static_cast<std::int32_t>(j) + 1;
            if (use_grid) grid.remove(a);
        }
    }
    return part;
}

// Each active actor leaves its community with probability 1 - r; leavers
// are mapped back onto the freed slots by a uniformly random bijection
// (possibly landing on their own slot). Community sizes are unchanged.
inline std::vector<std::int32_t> apply_correlation_strength(
    std::vector<std::int32_t> assignment, double r, RngStream& rng,
    std::uint64_t* leaver_count = nullptr) {
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("apply_correlation_strength: r outside [0,1]");
    if (leaver_count) *leaver_count = 0;
    if (r >= 1.0) return assignment;
    std::vector<std::uint32_t> leavers;
    std::vector<std::int32_t> slots;
    for (std::uint32_t a = 0; a < assignment.size(); ++a) {
        if (assignment[a] == 0) continue;  // inactive
        if (rng.bernoulli(1.0 - r)) {
            leavers.push_back(a);
            slots.push_back(assignment[a]);
        }
    }
    rng.shuffle(slots);
    for (std::size_t i = 0; i < leavers.size(); ++i)
        assignment[leavers[i]] = slots[i];
    if (leaver_count) *leaver_count = leavers.size();
    return assignment;
}

}  // namespace mln
