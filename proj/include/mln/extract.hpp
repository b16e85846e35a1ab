#pragma once

// Fits a full generator configuration to an arbitrary multilayer network:
// Louvain community detection, truncated power-law exponent fitting, the
// degree-based relabeling, and the assembled parameter record.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "mln/measures.hpp"
#include "mln/rng.hpp"
#include "mln/sampling.hpp"
#include "mln/types.hpp"

namespace mln {

namespace detail {

struct LouvainGraph {
    std::uint32_t n = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
    std::vector<double> self_loop;  // aggregated intra weight, counted twice in k
    double total_weight = 0.0;      // sum of all edge weights (m)
};

inline void local_moving(LouvainGraph& g, std::vector<std::uint32_t>& comm,
                         double resolution, RngStream& rng, bool& changed) {
    const double two_m = 2.0 * g.total_weight;
    std::vector<double> k(g.n, 0.0), tot(g.n, 0.0);
    for (std::uint32_t u = 0; u < g.n; ++u) {
        double ku = 2.0 * g.self_loop[u];
        for (const auto& [v, w] : g.adj[u]) ku += w;
        k[u] = ku;
    }
    for (std::uint32_t u = 0; u < g.n; ++u) tot[comm[u]] += k[u];

    std::vector<std::uint32_t> order(g.n);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    std::unordered_map<std::uint32_t, double> wc;
    bool moved_any = true;
    while (moved_any) {
        moved_any = false;
        for (auto u : order) {
            wc.clear();
            for (const auto& [v, w] : g.adj[u]) wc[comm[v]] += w;
            const std::uint32_t own = comm[u];
            tot[own] -= k[u];
            const double w_own = wc.count(own) ? wc[own] : 0.0;
            double best_gain = w_own - resolution * tot[own] * k[u] / two_m;
            std::uint32_t best = own;
            for (const auto& [c, w] : wc) {
                if (c == own) continue;
                const double gain = w - resolution * tot[c] * k[u] / two_m;
                // strict improvement only; guarantees termination
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = c;
                }
            }
            tot[best] += k[u];
            if (best != own) {
                comm[u] = best;
                moved_any = true;
                changed = true;
            }
        }
    }
}

inline LouvainGraph aggregate(const LouvainGraph& g,
                              const std::vector<std::uint32_t>& comm,
                              std::vector<std::uint32_t>& remap) {
    remap.assign(g.n, 0);
    std::unordered_map<std::uint32_t, std::uint32_t> ids;
    for (std::uint32_t u = 0; u < g.n; ++u) {
        auto it = ids.emplace(comm[u], static_cast<std::uint32_t>(ids.size()));
        remap[u] = it.first->second;
    }
    LouvainGraph out;
    out.n = static_cast<std::uint32_t>(ids.size());
    out.adj.assign(out.n, {});
    out.self_loop.assign(out.n, 0.0);
    out.total_weight = g.total_weight;
    std::unordered_map<std::uint64_t, double> acc;
    for (std::uint32_t u = 0; u < g.n; ++u) {
        out.self_loop[remap[u]] += g.self_loop[u];
        for (const auto& [v, w] : g.adj[u]) {
            if (v < u) continue;  // undirected: count each pair once
            const std::uint32_t a = remap[u], b = remap[v];
            if (a == b)
                out.self_loop[a] += w;  // intra edge becomes self weight
            else
                acc[(static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                    std::max(a, b)] += w;
        }
    }
    std::vector<std::pair<std::uint64_t, double>> items(acc.begin(), acc.end());
    std::sort(items.begin(), items.end());
    for (const auto& [key, w] : items) {
        const auto a = static_cast<std::uint32_t>(key >> 32);
        const auto b = static_cast<std::uint32_t>(key & 0xffffffffULL);
        out.adj[a].emplace_back(b, w);
        out.adj[b].emplace_back(a, w);
    }
    return out;
}

}  // namespace detail

// Standard two-level Louvain loop on one layer; isolated actors end up in
// community 0, detected communities are numbered 1.. in order of their
// smallest actor. Node sweep order is a seeded permutation, so results are
// reproducible per stream.
inline std::vector<std::int32_t> louvain(std::uint32_t n,
                                         const std::vector<Edge>& edges,
                                         double resolution, RngStream& rng) {
    std::vector<std::int32_t> result(n, 0);
    if (edges.empty()) return result;

    // compress to nodes with degree > 0
    std::vector<std::uint32_t> id(n, 0);
    std::vector<std::uint32_t> actors;
    std::vector<std::uint8_t> present(n, 0);
    for (const auto& e : edges) present[e.first] = present[e.second] = 1;
    for (std::uint32_t a = 0; a < n; ++a)
        if (present[a]) {
            id[a] = static_cast<std::uint32_t>(actors.size());
            actors.push_back(a);
        }

    detail::LouvainGraph g;
    g.n = static_cast<std::uint32_t>(actors.size());
    g.adj.assign(g.n, {});
    g.self_loop.assign(g.n, 0.0);
    for (const auto& e : edges) {
        g.adj[id[e.first]].emplace_back(id[e.second], 1.0);
        g.adj[id[e.second]].emplace_back(id[e.first], 1.0);
        g.total_weight += 1.0;
    }

    // membership of each original node through the levels
    std::vector<std::uint32_t> membership(g.n);
    std::iota(membership.begin(), membership.end(), 0u);

    for (std::uint32_t level = 0;; ++level) {
        std::vector<std::uint32_t> comm(g.n);
        std::iota(comm.begin(), comm.end(), 0u);
        bool changed = false;
        RngStream lr = rng.child("level=" + std::to_string(level));
        detail::local_moving(g, comm, resolution, lr, changed);
        if (!changed) break;
        std::vector<std::uint32_t> remap;
        detail::LouvainGraph next = detail::aggregate(g, comm, remap);
        for (auto& m : membership) m = remap[m];  // remap composes comm
        if (next.n == g.n) break;
        g = std::move(next);
    }

    // stable 1-based ids in order of smallest member actor
    std::unordered_map<std::uint32_t, std::int32_t> order;
    for (std::size_t i = 0; i < actors.size(); ++i) {
        auto it = order.emplace(membership[i],
                                static_cast<std::int32_t>(order.size()) + 1);
        result[actors[i]] = it.first->second;
    }
    return result;
}

inline double modularity(std::uint32_t n, const std::vector<Edge>& edges,
                         const std::vector<std::int32_t>& partition,
                         double resolution = 1.0) {
    if (edges.empty()) return 0.0;
    const double m = static_cast<double>(edges.size());
    std::unordered_map<std::int32_t, double> in_c, tot_c;
    std::vector<double> deg(n, 0.0);
    for (const auto& e : edges) {
        deg[e.first] += 1.0;
        deg[e.second] += 1.0;
        if (partition[e.first] == partition[e.second])
            in_c[partition[e.first]] += 1.0;
    }
    for (std::uint32_t a = 0; a < n; ++a) tot_c[partition[a]] += deg[a];
    double q = 0.0;
    for (const auto& [c, w] : in_c) q += w / m;
    for (const auto& [c, w] : tot_c) {
        const double f = w / (2.0 * m);
        q -= resolution * f * f;
    }
    return q;
}

// Discrete truncated-power-law MLE with the lower cutoff pinned at `floor`
// and the upper cutoff at the observed maximum; golden-section search over
// gamma in (1.01, 6). NaN when the data carry no tail signal.
inline double fit_power_law(const std::vector<std::uint32_t>& values,
                            std::uint32_t floor_value) {
    if (values.size() < 2) return kUndefined;
    std::uint32_t vmax = 0;
    std::unordered_map<std::uint32_t, std::uint32_t> hist;
    for (auto v : values) {
        if (v < floor_value) return kUndefined;
        vmax = std::max(vmax, v);
        ++hist[v];
    }
    if (vmax == floor_value) return kUndefined;  // all values equal

    std::vector<std::pair<std::uint32_t, std::uint32_t>> bins(hist.begin(),
                                                              hist.end());
    auto neg_loglik = [&](double gamma) {
        const TruncatedPowerLaw law(gamma, floor_value, vmax);
        double ll = 0.0;
        for (const auto& [v, c] : bins) ll += c * std::log(law.pmf(v));
        return -ll;
    };

    double lo = 1.01, hi = 6.0;
    const double phi = 0.6180339887498949;
    double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    double fa = neg_loglik(a), fb = neg_loglik(b);
    for (int it = 0; it < 200 && hi - lo > 1e-7; ++it) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = neg_loglik(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = neg_loglik(b);
        }
    }
    return 0.5 * (lo + hi);
}

// Relabeling that sorts actors by first-layer degree descending (ties keep
// original id order): higher degree means lower new label. Returns
// old-id -> new-id, 0-based.
inline std::vector<std::uint32_t> relabel_by_degree(const MultilayerNetwork& net) {
    const auto deg = degrees_of(net.layers.front(), net.n);
    std::vector<std::uint32_t> order(net.n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t x, std::uint32_t y) {
                         return deg[x] > deg[y];
                     });
    std::vector<std::uint32_t> new_id(net.n);
    for (std::uint32_t pos = 0; pos < net.n; ++pos) new_id[order[pos]] = pos;
    return new_id;
}

inline MultilayerNetwork apply_relabeling(const MultilayerNetwork& net,
                                          const std::vector<std::uint32_t>& new_id) {
    MultilayerNetwork out;
    out.n = net.n;
    out.layers.resize(net.num_layers());
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const LayerGraph& src = net.layers[i];
        LayerGraph& dst = out.layers[i];
        dst.edges.reserve(src.edges.size());
        for (const auto& e : src.edges)
            dst.edges.push_back(make_edge(new_id[e.first], new_id[e.second]));
        std::sort(dst.edges.begin(), dst.edges.end());
        dst.active.assign(net.n, 0);
        for (std::uint32_t a = 0; a < net.n; ++a)
            if (src.active[a]) dst.active[new_id[a]] = 1;
        if (src.has_partition()) {
            dst.partition.assign(net.n, 0);
            for (std::uint32_t a = 0; a < net.n; ++a)
                dst.partition[new_id[a]] = src.partition[a];
        }
    }
    return out;
}

struct ExtractionOptions {
    bool detect_partitions = true;  // run Louvain; otherwise use net partitions
    double resolution = 1.0;
    // optional clamps applied after the automatic feasibility squeeze
    double gamma_max = kUndefined;
    std::uint32_t delta_min = 0;
    std::uint32_t s_min = 0;
};

struct ExtractionResult {
    GeneratorConfig config;
    MultilayerNetwork relabeled;  // the network under the new labels
    std::vector<std::vector<std::uint32_t>> degree_sequences;  // per actor
    std::vector<std::vector<std::uint32_t>> community_sizes;
};

// Reads every generator parameter off a network: q from activity, degree
// parameters from positive degrees, tau from the label/degree ordering after
// relabel_by_degree, community parameters from the per-layer partitions,
// r from AMI against the first layer's partition, R from edge correlations.
// Fitted values are squeezed into the feasible parameter ranges so the
// resulting config validates.
inline ExtractionResult extract_config(const MultilayerNetwork& input,
                                       const ExtractionOptions& opts,
                                       RngStream& rng) {
    ExtractionResult res;
    res.relabeled = apply_relabeling(input, relabel_by_degree(input));
    MultilayerNetwork& net = res.relabeled;
    const std::size_t L = net.num_layers();
    GeneratorConfig& cfg = res.config;
    cfg.n = net.n;
    cfg.ell = static_cast<std::uint32_t>(L);
    cfg.d = 2;
    cfg.layers.resize(L);
    res.degree_sequences.resize(L);
    res.community_sizes.resize(L);

    // partitions: reference run on layer 1, then one run per layer
    std::vector<std::int32_t> reference;
    std::vector<std::vector<std::int32_t>> parts(L);
    if (opts.detect_partitions) {
        RngStream ref_rng = rng.child("reference");
        reference = louvain(net.n, net.layers[0].edges, opts.resolution, ref_rng);
        for (std::size_t i = 0; i < L; ++i) {
            RngStream lr = rng.child("louvain/layer=" + std::to_string(i));
            parts[i] = louvain(net.n, net.layers[i].edges, opts.resolution, lr);
        }
    } else {
        for (std::size_t i = 0; i < L; ++i) {
            if (!net.layers[i].has_partition())
                throw std::invalid_argument(
                    "extract_config: partitions requested but missing");
            parts[i] = net.layers[i].partition;
        }
        reference = parts[0];
    }

    for (std::size_t i = 0; i < L; ++i) {
        LayerParams& p = cfg.layers[i];
        const LayerGraph& lg = net.layers[i];
        const auto deg = degrees_of(lg, net.n);

        std::vector<std::uint32_t> pos_deg;
        std::vector<double> labels, degs_d;
        for (std::uint32_t a = 0; a < net.n; ++a) {
            if (deg[a] > 0) {
                pos_deg.push_back(deg[a]);
                labels.push_back(static_cast<double>(a + 1));
                degs_d.push_back(static_cast<double>(deg[a]));
            }
        }
        const std::uint64_t n_active = pos_deg.size();
        p.q = std::max(1e-9, static_cast<double>(n_active) /
                                 static_cast<double>(net.n));

        if (!pos_deg.empty()) {
            p.delta = *std::min_element(pos_deg.begin(), pos_deg.end());
            p.Delta = *std::max_element(pos_deg.begin(), pos_deg.end());
            const double g = fit_power_law(pos_deg, p.delta);
            if (!is_undefined(g)) p.gamma = g;
        }
        const double t = degree_label_tau(labels, degs_d);
        p.tau = is_undefined(t) ? 0.0 : t;

        // community structure
        std::unordered_map<std::int32_t, std::uint32_t> csize;
        for (std::uint32_t a = 0; a < net.n; ++a)
            if (parts[i][a] > 0) ++csize[parts[i][a]];
        std::vector<std::uint32_t> sizes;
        for (const auto& [c, sz] : csize) sizes.push_back(sz);
        std::sort(sizes.begin(), sizes.end());
        if (!sizes.empty()) {
            p.s = sizes.front();
            p.S = sizes.back();
            const double b = fit_power_law(sizes, p.s);
            if (!is_undefined(b)) p.beta = b;
        }
        res.community_sizes[i] = sizes;

        // noise level from the detected partition
        std::size_t inter = 0;
        for (const auto& e : lg.edges)
            inter += parts[i][e.first] != parts[i][e.second];
        p.xi = lg.edges.empty()
                   ? 0.5
                   : static_cast<double>(inter) /
                         static_cast<double>(lg.edges.size());

        // r from AMI against the reference partition, on mutually active actors
        if (L == 1) {
            p.r = 1.0;
        } else {
            PartitionPair pp;
            for (std::uint32_t a = 0; a < net.n; ++a) {
                if (net.layers[0].active[a] && lg.active[a]) {
                    pp.labels_a.push_back(parts[i][a]);
                    pp.labels_b.push_back(reference[a]);
                }
            }
            const double v = ami(pp);
            p.r = is_undefined(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
        }

        res.degree_sequences[i] = deg;
    }

    cfg.R = edge_correlation_matrix(net);
    for (std::size_t i = 0; i < L; ++i) cfg.R[i][i] = 1.0;

    // Feasibility squeeze plus optional user clamps.
    for (std::size_t i = 0; i < L; ++i) {
        LayerParams& p = cfg.layers[i];
        if (opts.delta_min > 0) p.delta = std::max(p.delta, opts.delta_min);
        if (opts.s_min > 0) p.s = std::max(p.s, opts.s_min);
        if (!is_undefined(opts.gamma_max)) p.gamma = std::min(p.gamma, opts.gamma_max);
        p.gamma = std::clamp(p.gamma, 2.01, 2.99);
        p.beta = std::clamp(p.beta, 1.01, 1.99);
        p.xi = std::clamp(p.xi, 1e-4, 1.0 - 1e-4);
        p.tau = std::clamp(p.tau, -1.0, 1.0);
        p.delta = std::max<std::uint32_t>(p.delta, 1);
        p.Delta = std::clamp<std::uint32_t>(std::max(p.Delta, p.delta), p.delta,
                                            cfg.n > 1 ? cfg.n - 1 : 1);
        p.s = std::max(p.s, p.delta + 1);
        p.S = std::clamp<std::uint32_t>(std::max(p.S, p.s), p.s, cfg.n);
    }
    return res;
}

}  // namespace mln
