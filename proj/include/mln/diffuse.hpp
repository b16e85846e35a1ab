#pragma once

// Multilayer independent-cascade simulator with AND/OR protocol functions,
// the gain metric, and discount seeding heuristics. Activation coins are
// counter-based hashes of (seed, rep, source, target, layer), so a run is
// reproducible regardless of traversal order and the OR/AND coupling is
// samplewise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mln/rng.hpp"
#include "mln/types.hpp"

namespace mln {

enum class Protocol { AND, OR };

inline const char* to_string(Protocol p) {
    return p == Protocol::AND ? "AND" : "OR";
}

struct SpreadConfig {
    double pi = 0.1;                 // per-attempt activation probability
    Protocol protocol = Protocol::OR;
    double budget = 0.05;            // >= 1: seed count; (0,1): actor fraction
    std::string seeder = "nsd";      // nsd | dcd | list
    std::vector<std::uint32_t> explicit_seeds;  // 0-based, for seeder = list
    std::uint32_t max_steps = 1000000;
    std::uint32_t repetitions = 1;
    std::uint64_t seed = 0;
};

struct DiffusionOutcome {
    std::vector<std::vector<std::uint32_t>> steps;  // newly activated per step
    std::vector<std::uint32_t> final_active;
    double gain = 0.0;
    bool gain_degenerate = false;  // no activatable actors outside the seeds
};

inline std::uint32_t resolve_budget(double budget, std::uint32_t n) {
    if (budget <= 0.0) throw std::domain_error("budget must be positive");
    std::uint32_t k;
    if (budget < 1.0)
        k = static_cast<std::uint32_t>(std::floor(budget * n + 0.5));  // half-up
    else
        k = static_cast<std::uint32_t>(budget);
    k = std::max<std::uint32_t>(k, 1);
    return std::min(k, n);
}

inline std::vector<std::vector<std::vector<std::uint32_t>>> build_adjacency(
    const MultilayerNetwork& net) {
    std::vector<std::vector<std::vector<std::uint32_t>>> adj(net.num_layers());
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        adj[i].assign(net.n, {});
        for (const auto& e : net.layers[i].edges) {
            adj[i][e.first].push_back(e.second);
            adj[i][e.second].push_back(e.first);
        }
    }
    return adj;
}

namespace detail {

// Covered-set discount: score(v) counts v's distinct neighbours (over the
// given layers) not yet covered by picked seeds and their neighbourhoods.
inline std::vector<std::uint32_t> discount_seeds(
    const std::vector<std::vector<std::vector<std::uint32_t>>>& adj,
    std::uint32_t n, std::uint32_t k) {
    // union neighbourhoods
    std::vector<std::vector<std::uint32_t>> un(n);
    {
        std::vector<std::uint32_t> mark(n, UINT32_MAX);
        for (std::uint32_t v = 0; v < n; ++v) {
            for (const auto& layer : adj)
                for (auto w : layer[v])
                    if (mark[w] != v) {
                        mark[w] = v;
                        un[v].push_back(w);
                    }
            std::sort(un[v].begin(), un[v].end());
        }
    }
    std::vector<std::int64_t> score(n);
    for (std::uint32_t v = 0; v < n; ++v)
        score[v] = static_cast<std::int64_t>(un[v].size());

    std::vector<std::uint8_t> picked(n, 0), covered(n, 0);
    std::vector<std::uint32_t> seeds;
    seeds.reserve(k);
    for (std::uint32_t round = 0; round < k; ++round) {
        std::uint32_t best = UINT32_MAX;
        for (std::uint32_t v = 0; v < n; ++v) {
            if (picked[v]) continue;
            if (best == UINT32_MAX || score[v] > score[best]) best = v;
        }
        if (best == UINT32_MAX) break;
        picked[best] = 1;
        seeds.push_back(best);
        // newly covered nodes discount their neighbours' scores
        std::vector<std::uint32_t> fresh;
        if (!covered[best]) {
            covered[best] = 1;
            fresh.push_back(best);
        }
        for (auto w : un[best])
            if (!covered[w]) {
                covered[w] = 1;
                fresh.push_back(w);
            }
        for (auto w : fresh)
            for (auto x : un[w]) --score[x];
    }
    return seeds;
}

inline std::uint64_t coin_hash(std::uint64_t seed, std::uint32_t rep,
                               std::uint32_t src, std::uint32_t dst,
                               std::uint32_t layer) {
    std::uint64_t h = seed;
    h = detail::splitmix64(h ^ (static_cast<std::uint64_t>(rep) << 32 ^ layer));
    h = detail::splitmix64(h ^ (static_cast<std::uint64_t>(src) << 32 ^ dst));
    return detail::splitmix64(h);
}

}  // namespace detail

// Neighbourhood-size discount over all layers; ties by actor label.
inline std::vector<std::uint32_t> seed_nsd(const MultilayerNetwork& net,
                                           std::uint32_t budget) {
    const auto adj = build_adjacency(net);
    return detail::discount_seeds(adj, net.n, std::min(budget, net.n));
}

// Degree-centrality discount on a single layer (the single-layer reduction
// of seed_nsd).
inline std::vector<std::uint32_t> seed_dcd(const MultilayerNetwork& net,
                                           std::size_t layer,
                                           std::uint32_t budget) {
    MultilayerNetwork single;
    single.n = net.n;
    single.layers.push_back(net.layers.at(layer));
    const auto adj = build_adjacency(single);
    return detail::discount_seeds(adj, net.n, std::min(budget, net.n));
}

// One cascade. Sources activated at step k-1 attempt, once per (source,
// target, layer), to signal inactive neighbours with probability pi; after
// the step's attempts each inactive actor applies the protocol to the
// signals received this step. AND requires a positive signal in every layer
// where the actor has at least one neighbour.
inline DiffusionOutcome run_micm(const MultilayerNetwork& net,
                                 const std::vector<std::uint32_t>& seeds,
                                 double pi, Protocol protocol,
                                 std::uint32_t max_steps, std::uint64_t seed,
                                 std::uint32_t rep = 0) {
    const std::uint32_t n = net.n;
    const std::size_t L = net.num_layers();
    if (L > 64) throw std::invalid_argument("run_micm: more than 64 layers");
    const auto adj = build_adjacency(net);

    std::vector<std::uint64_t> eligible(n, 0);  // layers with >= 1 neighbour
    for (std::size_t l = 0; l < L; ++l)
        for (std::uint32_t v = 0; v < n; ++v)
            if (!adj[l][v].empty()) eligible[v] |= 1ULL << l;

    const auto threshold = static_cast<std::uint64_t>(
        pi >= 1.0 ? UINT64_MAX
                  : pi * 18446744073709551616.0 /* 2^64 */);

    std::vector<std::uint8_t> active(n, 0);
    DiffusionOutcome out;
    std::vector<std::uint32_t> frontier;
    for (auto s : seeds) {
        if (s >= n) throw std::invalid_argument("run_micm: seed out of range");
        if (!active[s]) {
            active[s] = 1;
            frontier.push_back(s);
        }
    }
    out.steps.push_back(frontier);

    std::vector<std::uint64_t> signal(n, 0);
    std::vector<std::uint32_t> touched;
    for (std::uint32_t step = 1; step <= max_steps && !frontier.empty(); ++step) {
        touched.clear();
        for (auto src : frontier) {
            for (std::size_t l = 0; l < L; ++l) {
                for (auto dst : adj[l][src]) {
                    if (active[dst]) continue;
                    const std::uint64_t h = detail::coin_hash(
                        seed, rep, src, dst, static_cast<std::uint32_t>(l));
                    const bool hit = pi >= 1.0 || h < threshold;
                    if (hit) {
                        if (signal[dst] == 0) touched.push_back(dst);
                        signal[dst] |= 1ULL << l;
                    }
                }
            }
        }
        std::vector<std::uint32_t> next;
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        for (auto v : touched) {
            const std::uint64_t sig = signal[v];
            signal[v] = 0;
            if (active[v]) continue;
            const bool fire = protocol == Protocol::OR
                                  ? sig != 0
                                  : (eligible[v] != 0 && (sig & eligible[v]) == eligible[v]);
            if (fire) {
                active[v] = 1;
                next.push_back(v);
            }
        }
        if (next.empty()) break;
        out.steps.push_back(next);
        frontier = std::move(next);
    }

    for (std::uint32_t v = 0; v < n; ++v)
        if (active[v]) out.final_active.push_back(v);
    const std::uint64_t s0 = out.steps.front().size();
    const std::uint64_t reached = out.final_active.size();
    if (n <= s0) {
        out.gain = 0.0;
        out.gain_degenerate = true;
    } else {
        out.gain = static_cast<double>(reached - s0) /
                   static_cast<double>(n - s0);
    }
    return out;
}

struct SweepCell {
    std::string series;
    Protocol protocol;
    double pi;
    double budget;
    double mean_gain = 0.0;
    double std_gain = 0.0;
    double delta_vs_baseline = 0.0;
};

// Mean/std gain per (network series, protocol, pi, budget) cell over
// `reps` repetitions, with deltas against the first series.
inline std::vector<SweepCell> experiment_sweep(
    const std::vector<std::pair<std::string, const MultilayerNetwork*>>& nets,
    const std::vector<std::tuple<Protocol, double, double>>& regimes,
    std::uint32_t reps, std::uint64_t seed) {
    std::vector<SweepCell> cells;
    for (const auto& [name, net] : nets) {
        for (const auto& [proto, pi, budget] : regimes) {
            const auto k = resolve_budget(budget, net->n);
            const auto seeds = seed_nsd(*net, k);
            double sum = 0.0, sum2 = 0.0;
            for (std::uint32_t rep = 0; rep < reps; ++rep) {
                const auto outc =
                    run_micm(*net, seeds, pi, proto, 1000000, seed, rep);
                sum += outc.gain;
                sum2 += outc.gain * outc.gain;
            }
            SweepCell c;
            c.series = name;
            c.protocol = proto;
            c.pi = pi;
            c.budget = budget;
            c.mean_gain = sum / reps;
            c.std_gain = reps > 1 ? std::sqrt(std::max(
                                        0.0, (sum2 - sum * sum / reps) / (reps - 1)))
                                  : 0.0;
            cells.push_back(c);
        }
    }
    // deltas vs the first series' matching regime
    for (auto& c : cells) {
        for (const auto& base : cells) {
            if (base.series == cells.front().series &&
                base.protocol == c.protocol && base.pi == c.pi &&
                base.budget == c.budget) {
                c.delta_vs_baseline = c.mean_gain - base.mean_gain;
                break;
            }
        }
    }
    return cells;
}

}  // namespace mln
