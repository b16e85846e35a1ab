#pragma once

// Degree splitting into community/background half-edges, the configuration
// model, and the recycle-list rewiring that turns the union multigraph into
// a simple layer graph.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mln/rng.hpp"
#include "mln/sampling.hpp"
#include "mln/types.hpp"

namespace mln {

struct HalfEdgeSplit {
    std::vector<std::uint32_t> Y;  // community half-edges per actor
    std::vector<std::uint32_t> Z;  // background half-edges per actor
};

// Y_a = stochastic_round((1-xi) deg(a)), Z_a = deg(a) - Y_a, then per-community
// parity fixes: a maximum-degree member moves one unit from Z to Y; when no
// member has spare Z the unit moves the other way instead.
inline HalfEdgeSplit split_degrees(const std::vector<std::uint32_t>& degree,
                                   const std::vector<std::int32_t>& partition,
                                   double xi, RngStream& rng) {
    const std::size_t n = degree.size();
    if (partition.size() != n)
        throw std::invalid_argument("split_degrees: partition size mismatch");
    HalfEdgeSplit split;
    split.Y.assign(n, 0);
    split.Z.assign(n, 0);

    std::int32_t max_comm = 0;
    for (auto c : partition) max_comm = std::max(max_comm, c);
    std::vector<std::uint64_t> y_sum(static_cast<std::size_t>(max_comm) + 1, 0);

    for (std::size_t a = 0; a < n; ++a) {
        if (degree[a] == 0) continue;
        const auto y = static_cast<std::uint32_t>(
            stochastic_round((1.0 - xi) * degree[a], rng));
        split.Y[a] = y;
        split.Z[a] = degree[a] - y;
        if (partition[a] > 0) y_sum[static_cast<std::size_t>(partition[a])] += y;
    }

    // Per-community members sorted by degree desc, label asc, so the parity
    // fix picks deterministically among maximum-degree actors.
    std::vector<std::vector<std::uint32_t>> members(
        static_cast<std::size_t>(max_comm) + 1);
    for (std::size_t a = 0; a < n; ++a)
        if (partition[a] > 0)
            members[static_cast<std::size_t>(partition[a])].push_back(
                static_cast<std::uint32_t>(a));

    for (std::size_t c = 1; c < members.size(); ++c) {
        if (y_sum[c] % 2 == 0) continue;
        auto& ms = members[c];
        std::sort(ms.begin(), ms.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (degree[a] != degree[b]) return degree[a] > degree[b];
            return a < b;
        });
        bool fixed = false;
        for (auto a : ms) {
            if (split.Z[a] >= 1) {
                ++split.Y[a];
                --split.Z[a];
                fixed = true;
                break;
            }
        }
        if (!fixed && !ms.empty()) {
            // Whole community has Z = 0; move one unit from Y to Z on the
            // maximum-degree member instead.
            const auto a = ms.front();
            --split.Y[a];
            ++split.Z[a];
        }
    }
    return split;
}

// Uniform random pairing of half-edges; self-loops and multi-edges allowed.
// `nodes[i]` carries `degs[i]` half-edges.
inline std::vector<Edge> configuration_model(
    const std::vector<std::uint32_t>& nodes,
    const std::vector<std::uint32_t>& degs, RngStream& rng) {
    std::vector<std::uint32_t> half;
    std::uint64_t total = 0;
    for (auto d : degs) total += d;
    if (total % 2 != 0)
        throw std::logic_error("configuration_model: odd half-edge count");
    half.reserve(total);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::uint32_t k = 0; k < degs[i]; ++k) half.push_back(nodes[i]);
    rng.shuffle(half);
    std::vector<Edge> edges;
    edges.reserve(half.size() / 2);
    for (std::size_t i = 0; i + 1 < half.size(); i += 2)
        edges.emplace_back(half[i], half[i + 1]);  // not canonicalized yet
    return edges;
}

struct RewireStats {
    std::uint64_t moved_edges = 0;       // community edges handed to background
    std::uint64_t transferred_units = 0; // endpoint units moved with them
    std::uint64_t leftover_bad = 0;      // bad edges the background pass kept
};

namespace detail {

// Mutable multigraph with O(1) multiplicity queries and in-place edge swaps.
struct MultiGraph {
    std::vector<Edge> edges;
    std::unordered_map<std::uint64_t, std::uint32_t> count;

    void build_index() {
        count.clear();
        count.reserve(edges.size() * 2);
        for (const auto& e : edges) ++count[edge_key(e.first, e.second)];
    }

    bool is_loop(std::size_t i) const { return edges[i].first == edges[i].second; }

    bool is_bad(std::size_t i) const {
        if (is_loop(i)) return true;
        return count.at(edge_key(edges[i].first, edges[i].second)) > 1;
    }

    std::uint32_t multiplicity(std::uint64_t key) const {
        auto it = count.find(key);
        return it == count.end() ? 0 : it->second;
    }

    void replace(std::size_t i, Edge e) {
        auto it = count.find(edge_key(edges[i].first, edges[i].second));
        if (--(it->second) == 0) count.erase(it);
        edges[i] = e;
        ++count[edge_key(e.first, e.second)];
    }
};

// One shuffled sweep over the recycle list; each entry attempts a random
// double-edge swap that must not create loops or multi-edges. `blocked`
// optionally holds edge keys that new edges must also avoid (the community
// edge set, during the background pass).
inline void recycle_sweep(MultiGraph& g, std::vector<std::uint32_t>& recycle,
                          const std::unordered_set<std::uint64_t>* blocked,
                          RngStream& rng) {
    rng.shuffle(recycle);
    for (auto ei : recycle) {
        if (g.edges.size() < 2) continue;
        auto pj = static_cast<std::size_t>(rng.below(g.edges.size() - 1));
        if (pj >= ei) ++pj;
        const Edge a = g.edges[ei];
        const Edge b = g.edges[pj];
        // Random orientation of the swap.
        Edge n1, n2;
        if (rng.bernoulli(0.5)) {
            n1 = make_edge(a.first, b.first);
            n2 = make_edge(a.second, b.second);
            if (a.first == b.first || a.second == b.second) continue;
        } else {
            n1 = make_edge(a.first, b.second);
            n2 = make_edge(a.second, b.first);
            if (a.first == b.second || a.second == b.first) continue;
        }
        const std::uint64_t k1 = edge_key(n1.first, n1.second);
        const std::uint64_t k2 = edge_key(n2.first, n2.second);
        if (k1 == k2) continue;
        const std::uint64_t ka = edge_key(a.first, a.second);
        const std::uint64_t kb = edge_key(b.first, b.second);
        // Multiplicity after removing a and b must be zero for both.
        auto residual = [&](std::uint64_t k) {
            std::uint32_t c = g.multiplicity(k);
            if (k == ka) --c;
            if (k == kb) --c;
            return c;
        };
        if (residual(k1) != 0 || residual(k2) != 0) continue;
        if (blocked && (blocked->count(k1) || blocked->count(k2))) continue;
        g.replace(ei, n1);
        g.replace(pj, n2);
    }
}

inline std::vector<std::uint32_t> collect_bad(
    const MultiGraph& g, const std::unordered_set<std::uint64_t>* blocked,
    const std::unordered_set<std::uint32_t>* forced) {
    std::vector<std::uint32_t> recycle;
    std::unordered_map<std::uint64_t, bool> seen;  // first copy survives
    for (std::uint32_t i = 0; i < g.edges.size(); ++i) {
        const Edge& e = g.edges[i];
        const std::uint64_t k = edge_key(e.first, e.second);
        bool bad = false;
        if (e.first == e.second) {
            bad = true;
        } else if (g.multiplicity(k) > 1) {
            auto [it, inserted] = seen.emplace(k, true);
            bad = !inserted;  // every copy beyond the first
        } else if (blocked && blocked->count(k)) {
            bad = true;
        }
        if (!bad && forced && forced->count(i)) bad = true;
        if (bad) recycle.push_back(i);
    }
    return recycle;
}

// Repeats sweeps while the recycle list shrinks. Returns indices of edges
// still bad at stagnation.
inline std::vector<std::uint32_t> rewire_graph(
    MultiGraph& g, const std::unordered_set<std::uint64_t>* blocked,
    const std::unordered_set<std::uint32_t>* forced_first, RngStream& rng) {
    std::vector<std::uint32_t> recycle = collect_bad(g, blocked, forced_first);
    std::size_t prev = recycle.size();
    while (!recycle.empty()) {
        recycle_sweep(g, recycle, blocked, rng);
        recycle = collect_bad(g, blocked, nullptr);
        if (recycle.size() >= prev) break;
        prev = recycle.size();
    }
    return recycle;
}

}  // namespace detail

// Wires one layer: per-community configuration models plus the background
// configuration model, then rewiring to simplicity. Community graphs that
// stagnate hand their bad edges to the background pass.
inline std::vector<Edge> wire_layer(const std::vector<std::int32_t>& partition,
                                    const HalfEdgeSplit& split, RngStream& rng,
                                    RewireStats* stats = nullptr) {
    const std::size_t n = partition.size();
    std::int32_t max_comm = 0;
    for (auto c : partition) max_comm = std::max(max_comm, c);
    std::vector<std::vector<std::uint32_t>> members(
        static_cast<std::size_t>(max_comm) + 1);
    for (std::size_t a = 0; a < n; ++a)
        if (partition[a] > 0)
            members[static_cast<std::size_t>(partition[a])].push_back(
                static_cast<std::uint32_t>(a));

    RewireStats local;
    std::vector<Edge> community_edges;
    std::vector<Edge> moved;

    for (std::size_t c = 1; c < members.size(); ++c) {
        std::vector<std::uint32_t> degs;
        degs.reserve(members[c].size());
        for (auto a : members[c]) degs.push_back(split.Y[a]);
        RngStream cr = rng.child("community=" + std::to_string(c));
        detail::MultiGraph g;
        g.edges = configuration_model(members[c], degs, cr);
        for (auto& e : g.edges) e = make_edge(e.first, e.second);
        g.build_index();
        auto leftover = detail::rewire_graph(g, nullptr, nullptr, cr);
        if (!leftover.empty()) {
            local.moved_edges += leftover.size();
            std::sort(leftover.begin(), leftover.end(),
                      std::greater<std::uint32_t>());
            for (auto i : leftover) {
                moved.push_back(g.edges[i]);
                g.replace(i, g.edges.back());
                // replace() above rewrote slot i with the last edge's value but
                // left the duplicate at the back; drop it from the count too.
                auto it = g.count.find(
                    edge_key(g.edges.back().first, g.edges.back().second));
                if (--(it->second) == 0) g.count.erase(it);
                g.edges.pop_back();
            }
        }
        community_edges.insert(community_edges.end(), g.edges.begin(), g.edges.end());
    }
    local.transferred_units = 2 * local.moved_edges;

    // Background: configuration model over every actor's Z half-edges, with
    // moved community edges appended and force-recycled.
    std::unordered_set<std::uint64_t> community_keys;
    community_keys.reserve(community_edges.size() * 2);
    for (const auto& e : community_edges) community_keys.insert(edge_key(e.first, e.second));

    std::vector<std::uint32_t> all_nodes;
    std::vector<std::uint32_t> z_degs;
    for (std::size_t a = 0; a < n; ++a) {
        if (split.Z[a] > 0) {
            all_nodes.push_back(static_cast<std::uint32_t>(a));
            z_degs.push_back(split.Z[a]);
        }
    }
    RngStream br = rng.child("background");
    detail::MultiGraph bg;
    bg.edges = configuration_model(all_nodes, z_degs, br);
    for (auto& e : bg.edges) e = make_edge(e.first, e.second);
    std::unordered_set<std::uint32_t> forced;
    for (const auto& e : moved) {
        forced.insert(static_cast<std::uint32_t>(bg.edges.size()));
        bg.edges.push_back(e);
    }
    bg.build_index();
    auto leftover = detail::rewire_graph(bg, &community_keys, &forced, br);
    local.leftover_bad = leftover.size();

    std::vector<Edge> result = community_edges;
    result.insert(result.end(), bg.edges.begin(), bg.edges.end());
    std::sort(result.begin(), result.end());
    if (stats) *stats = local;
    return result;
}

}  // namespace mln
