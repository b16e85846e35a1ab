#pragma once

// Batch edge rewiring that drives the empirical edge-correlation matrix
// toward a target while preserving every actor's degree, community degree,
// and background degree. Pair counts and intersections are maintained
// incrementally so the per-batch matrix refresh is O(layers^2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "mln/measures.hpp"
#include "mln/rng.hpp"
#include "mln/types.hpp"

namespace mln {

// Pair (i, j) drawn with probability proportional to |r_hat - r| over
// entries defined in both matrices; nullopt when every defined discrepancy
// is zero.
inline std::optional<std::pair<std::uint32_t, std::uint32_t>> select_pair(
    const std::vector<std::vector<double>>& r_hat,
    const std::vector<std::vector<double>>& target, RngStream& rng) {
    struct Item {
        std::uint32_t i, j;
        double w;
    };
    std::vector<Item> items;
    double total = 0.0;
    for (std::uint32_t i = 0; i < r_hat.size(); ++i) {
        for (std::uint32_t j = i + 1; j < r_hat.size(); ++j) {
            if (is_undefined(r_hat[i][j]) || is_undefined(target[i][j])) continue;
            const double w = std::abs(r_hat[i][j] - target[i][j]);
            if (w <= 0.0) continue;
            items.push_back({i, j, w});
            total += w;
        }
    }
    if (items.empty()) return std::nullopt;
    double u = rng.uniform01() * total;
    for (const auto& it : items) {
        u -= it.w;
        if (u <= 0.0) return std::make_pair(it.i, it.j);
    }
    return std::make_pair(items.back().i, items.back().j);
}

struct MatchHistory {
    std::vector<double> l2;  // distance before each batch, plus final
    double initial = 0.0;
    double final_best = 0.0;
    std::uint32_t best_batch = 0;  // checkpoint index of the kept network
};

namespace detail {

class EdgeMatchEngine {
public:
    EdgeMatchEngine(const MultilayerNetwork& net,
                    std::vector<std::vector<double>> target,
                    std::uint32_t max_iters = 1000)
        : n_(net.n), target_(std::move(target)), max_iters_(max_iters) {
        const std::size_t L = net.num_layers();
        layers_.resize(L);
        cnt_.assign(L, std::vector<std::uint64_t>(L, 0));
        inter_.assign(L, std::vector<PairSet>(L));
        for (std::size_t i = 0; i < L; ++i) {
            LayerState& ls = layers_[i];
            ls.active = net.layers[i].active;
            ls.comm = net.layers[i].has_partition()
                          ? net.layers[i].partition
                          : std::vector<std::int32_t>(n_, 0);
            ls.adj.assign(n_, {});
            ls.intra_deg.assign(n_, 0);
        }
        // Static per-community sampling weights must reflect the initial
        // intra degrees, so compute them before inserting edges would not
        // matter; intra degrees are invariant under every swap below.
        for (std::size_t i = 0; i < L; ++i)
            for (const auto& e : net.layers[i].edges) add_edge(i, e.first, e.second, false);
        for (std::size_t i = 0; i < L; ++i) build_intra_sampler(i);
    }

    std::size_t num_layers() const { return layers_.size(); }

    std::vector<std::vector<double>> empirical() const {
        const std::size_t L = layers_.size();
        std::vector<std::vector<double>> r(L, std::vector<double>(L, kUndefined));
        for (std::size_t i = 0; i < L; ++i)
            if (!layers_[i].edges.empty()) r[i][i] = 1.0;
        for (std::size_t i = 0; i < L; ++i) {
            for (std::size_t j = i + 1; j < L; ++j) {
                const std::uint64_t mn = std::min(cnt_[i][j], cnt_[j][i]);
                if (mn == 0) continue;
                r[i][j] = r[j][i] =
                    static_cast<double>(inter_[i][j].items.size()) /
                    static_cast<double>(mn);
            }
        }
        return r;
    }

    double distance() const { return matrix_l2_distance(empirical(), target_); }

    std::uint64_t pair_count(std::uint32_t i, std::uint32_t j) const {
        return cnt_[i][j];
    }

    // One raise/lower attempt each; true when a swap was applied.
    bool raise_attempt(std::uint32_t i, std::uint32_t j, RngStream& rng);
    bool lower_attempt(std::uint32_t i, std::uint32_t j, RngStream& rng);

    MatchHistory run(std::uint32_t t, double eps, RngStream& rng);

    void write_back(MultilayerNetwork& net) const {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            net.layers[i].edges = layers_[i].edges;
            std::sort(net.layers[i].edges.begin(), net.layers[i].edges.end());
        }
    }

private:
    struct PairSet {
        std::vector<std::uint64_t> items;
        std::unordered_map<std::uint64_t, std::uint32_t> pos;

        void insert(std::uint64_t key) {
            if (pos.count(key)) return;
            pos.emplace(key, static_cast<std::uint32_t>(items.size()));
            items.push_back(key);
        }
        void erase(std::uint64_t key) {
            auto it = pos.find(key);
            if (it == pos.end()) return;
            const std::uint32_t idx = it->second;
            items[idx] = items.back();
            pos[items[idx]] = idx;
            items.pop_back();
            pos.erase(it);
        }
    };

    struct LayerState {
        std::vector<Edge> edges;
        std::unordered_map<std::uint64_t, std::uint32_t> pos;
        std::vector<std::vector<std::uint32_t>> adj;
        std::vector<std::int32_t> comm;
        std::vector<std::uint8_t> active;
        PairSet inter_edges;  // edges with endpoints in different communities
        std::vector<std::uint32_t> intra_deg;
        // per community: members and prefix sums of intra degree
        std::vector<std::vector<std::uint32_t>> comm_members;
        std::vector<std::vector<std::uint64_t>> comm_prefix;
    };

    struct SwapOp {
        std::uint32_t layer;
        Edge removed[2];
        Edge added[2];
    };

    void add_edge(std::size_t layer, ActorId u, ActorId v, bool log) {
        LayerState& ls = layers_[layer];
        const std::uint64_t key = edge_key(u, v);
        if (!ls.pos.emplace(key, static_cast<std::uint32_t>(ls.edges.size()))
                 .second)
            throw std::logic_error("EdgeMatchEngine: duplicate edge insert");
        ls.edges.push_back(make_edge(u, v));
        ls.adj[u].push_back(v);
        ls.adj[v].push_back(u);
        if (ls.comm[u] != ls.comm[v]) ls.inter_edges.insert(key);
        else ++ls.intra_deg[u], ++ls.intra_deg[v];
        for (std::size_t j = 0; j < layers_.size(); ++j) {
            if (j == layer) continue;
            if (layers_[j].active[u] && layers_[j].active[v]) {
                ++cnt_[layer][j];
                if (layers_[j].pos.count(key)) pair_set(layer, j).insert(key);
            }
        }
        (void)log;
    }

    void remove_edge(std::size_t layer, ActorId u, ActorId v) {
        LayerState& ls = layers_[layer];
        const std::uint64_t key = edge_key(u, v);
        auto it = ls.pos.find(key);
        if (it == ls.pos.end())
            throw std::logic_error("EdgeMatchEngine: removing missing edge");
        const std::uint32_t idx = it->second;
        ls.edges[idx] = ls.edges.back();
        ls.pos[edge_key(ls.edges[idx].first, ls.edges[idx].second)] = idx;
        ls.edges.pop_back();
        ls.pos.erase(it);
        drop_neighbor(ls.adj[u], v);
        drop_neighbor(ls.adj[v], u);
        if (ls.comm[u] != ls.comm[v]) ls.inter_edges.erase(key);
        else --ls.intra_deg[u], --ls.intra_deg[v];
        for (std::size_t j = 0; j < layers_.size(); ++j) {
            if (j == layer) continue;
            if (layers_[j].active[u] && layers_[j].active[v]) {
                --cnt_[layer][j];
                pair_set(layer, j).erase(key);
            }
        }
    }

    static void drop_neighbor(std::vector<std::uint32_t>& adj, ActorId x) {
        for (std::size_t k = 0; k < adj.size(); ++k) {
            if (adj[k] == x) {
                adj[k] = adj.back();
                adj.pop_back();
                return;
            }
        }
        throw std::logic_error("EdgeMatchEngine: adjacency out of sync");
    }

    PairSet& pair_set(std::size_t a, std::size_t b) {
        return a < b ? inter_[a][b] : inter_[b][a];
    }

    void build_intra_sampler(std::size_t layer) {
        LayerState& ls = layers_[layer];
        std::int32_t max_comm = 0;
        for (auto c : ls.comm) max_comm = std::max(max_comm, c);
        ls.comm_members.assign(static_cast<std::size_t>(max_comm) + 1, {});
        ls.comm_prefix.assign(static_cast<std::size_t>(max_comm) + 1, {});
        for (std::uint32_t a = 0; a < n_; ++a)
            if (ls.comm[a] > 0)
                ls.comm_members[static_cast<std::size_t>(ls.comm[a])].push_back(a);
        for (std::size_t c = 1; c < ls.comm_members.size(); ++c) {
            auto& pref = ls.comm_prefix[c];
            pref.reserve(ls.comm_members[c].size());
            std::uint64_t acc = 0;
            for (auto a : ls.comm_members[c]) {
                acc += ls.intra_deg[a];
                pref.push_back(acc);
            }
        }
    }

    // Uniform intra-community edge of `layer` inside community c, as an
    // endpoint pair; nullopt when the community has no intra edges.
    std::optional<Edge> sample_intra_edge(std::size_t layer, std::int32_t c,
                                          RngStream& rng) {
        LayerState& ls = layers_[layer];
        if (c <= 0 || static_cast<std::size_t>(c) >= ls.comm_prefix.size())
            return std::nullopt;
        const auto& pref = ls.comm_prefix[static_cast<std::size_t>(c)];
        if (pref.empty() || pref.back() == 0) return std::nullopt;
        const std::uint64_t w = rng.below(pref.back());
        const auto it = std::upper_bound(pref.begin(), pref.end(), w);
        const auto mi = static_cast<std::size_t>(it - pref.begin());
        const std::uint32_t x = ls.comm_members[static_cast<std::size_t>(c)][mi];
        // uniform intra neighbour of x
        std::uint32_t count = 0;
        std::uint32_t pick = 0;
        for (auto y : ls.adj[x]) {
            if (ls.comm[y] == c) {
                if (rng.below(++count) == 0) pick = y;
            }
        }
        if (count == 0) return std::nullopt;
        return make_edge(x, pick);
    }

    std::optional<std::uint32_t> neighbor_in_comm(std::size_t layer, ActorId u,
                                                  std::int32_t c, RngStream& rng) {
        LayerState& ls = layers_[layer];
        std::uint32_t count = 0, pick = 0;
        for (auto y : ls.adj[u])
            if (ls.comm[y] == c)
                if (rng.below(++count) == 0) pick = y;
        if (count == 0) return std::nullopt;
        return pick;
    }

    std::optional<std::uint32_t> neighbor_outside(std::size_t layer, ActorId u,
                                                  std::int32_t c1, std::int32_t c2,
                                                  std::int32_t c3, RngStream& rng) {
        LayerState& ls = layers_[layer];
        std::uint32_t count = 0, pick = 0;
        for (auto y : ls.adj[u]) {
            const auto c = ls.comm[y];
            if (c != c1 && c != c2 && c != c3)
                if (rng.below(++count) == 0) pick = y;
        }
        if (count == 0) return std::nullopt;
        return pick;
    }

    void apply_swap(std::size_t layer, Edge rm1, Edge rm2, Edge ad1, Edge ad2) {
        remove_edge(layer, rm1.first, rm1.second);
        remove_edge(layer, rm2.first, rm2.second);
        add_edge(layer, ad1.first, ad1.second, true);
        add_edge(layer, ad2.first, ad2.second, true);
        ops_.push_back({static_cast<std::uint32_t>(layer), {rm1, rm2}, {ad1, ad2}});
    }

    void undo_last_op() {
        const SwapOp op = ops_.back();
        ops_.pop_back();
        remove_edge(op.layer, op.added[0].first, op.added[0].second);
        remove_edge(op.layer, op.added[1].first, op.added[1].second);
        add_edge(op.layer, op.removed[0].first, op.removed[0].second, false);
        add_edge(op.layer, op.removed[1].first, op.removed[1].second, false);
    }

    std::uint32_t n_;
    std::vector<std::vector<double>> target_;
    std::uint32_t max_iters_;
    std::vector<LayerState> layers_;
    std::vector<std::vector<std::uint64_t>> cnt_;  // cnt_[i][j] = |E_i^j|
    std::vector<std::vector<PairSet>> inter_;      // upper triangle used
    std::vector<SwapOp> ops_;
};

inline bool EdgeMatchEngine::raise_attempt(std::uint32_t i, std::uint32_t j,
                                           RngStream& rng) {
    const std::uint32_t primary = rng.bernoulli(0.5) ? i : j;
    const std::uint32_t secondary = primary == i ? j : i;
    LayerState& pl = layers_[primary];
    LayerState& sl = layers_[secondary];
    if (pl.edges.empty()) return false;

    // uniform primary edge with both endpoints active in the secondary
    Edge uv{0, 0};
    bool found = false;
    for (std::uint32_t it = 0; it < max_iters_; ++it) {
        const Edge& e = pl.edges[rng.below(pl.edges.size())];
        if (sl.active[e.first] && sl.active[e.second]) {
            uv = e;
            found = true;
            break;
        }
    }
    if (!found) return false;
    if (rng.bernoulli(0.5)) std::swap(uv.first, uv.second);
    const ActorId u = uv.first, v = uv.second;
    if (sl.pos.count(edge_key(u, v))) return false;  // already shared

    const std::int32_t cu = sl.comm[u], cv = sl.comm[v];
    ActorId up, vp;
    if (cu == cv) {
        auto mu = neighbor_in_comm(secondary, u, cu, rng);
        if (!mu) return false;
        auto mv = neighbor_in_comm(secondary, v, cu, rng);
        if (!mv) return false;
        up = *mu;
        vp = *mv;
    } else {
        auto mu = neighbor_outside(secondary, u, cu, cv, cu, rng);
        if (!mu) return false;
        up = *mu;
        auto mv = neighbor_outside(secondary, v, cu, cv, sl.comm[up], rng);
        if (!mv) return false;
        vp = *mv;
    }
    if (up == u || up == v || vp == u || vp == v || up == vp) return false;
    if (sl.pos.count(edge_key(up, vp))) return false;
    apply_swap(secondary, make_edge(u, up), make_edge(v, vp), make_edge(u, v),
               make_edge(up, vp));
    return true;
}

inline bool EdgeMatchEngine::lower_attempt(std::uint32_t i, std::uint32_t j,
                                           RngStream& rng) {
    PairSet& shared = pair_set(i, j);
    if (shared.items.empty()) return false;
    const std::uint32_t secondary = rng.bernoulli(0.5) ? i : j;
    LayerState& sl = layers_[secondary];

    const std::uint64_t key = shared.items[rng.below(shared.items.size())];
    ActorId u = static_cast<ActorId>(key >> 32);
    ActorId v = static_cast<ActorId>(key & 0xffffffffULL);
    if (rng.bernoulli(0.5)) std::swap(u, v);

    const std::int32_t cu = sl.comm[u], cv = sl.comm[v];
    ActorId up, vp;
    if (cu == cv) {
        auto e = sample_intra_edge(secondary, cu, rng);
        if (!e) return false;
        up = e->first;
        vp = e->second;
    } else {
        if (sl.inter_edges.items.empty()) return false;
        bool ok = false;
        for (std::uint32_t it = 0; it < max_iters_; ++it) {
            const std::uint64_t k2 =
                sl.inter_edges.items[rng.below(sl.inter_edges.items.size())];
            const auto a = static_cast<ActorId>(k2 >> 32);
            const auto b = static_cast<ActorId>(k2 & 0xffffffffULL);
            const auto ca = sl.comm[a], cb = sl.comm[b];
            if (ca == cu || ca == cv || cb == cu || cb == cv) continue;
            up = a;
            vp = b;
            ok = true;
            break;
        }
        if (!ok) return false;
    }
    if (rng.bernoulli(0.5)) std::swap(up, vp);
    if (up == u || up == v || vp == u || vp == v || up == vp) return false;
    if (sl.pos.count(edge_key(u, up)) || sl.pos.count(edge_key(v, vp)))
        return false;
    apply_swap(secondary, make_edge(u, v), make_edge(up, vp), make_edge(u, up),
               make_edge(v, vp));
    return true;
}

inline MatchHistory EdgeMatchEngine::run(std::uint32_t t, double eps,
                                         RngStream& rng) {
    MatchHistory hist;
    std::vector<std::size_t> checkpoints;  // op count at each recorded distance
    hist.l2.reserve(t + 1);

    for (std::uint32_t b = 0; b < t; ++b) {
        hist.l2.push_back(distance());
        checkpoints.push_back(ops_.size());
        const auto r_hat = empirical();
        const auto pick = select_pair(r_hat, target_, rng);
        if (!pick) continue;  // nothing to fix; batch still counts
        const auto [i, j] = *pick;
        const std::uint64_t mn = std::min(cnt_[i][j], cnt_[j][i]);
        if (mn == 0) continue;
        const auto attempts = static_cast<std::uint64_t>(
            std::ceil(eps * static_cast<double>(mn)));
        RngStream batch_rng = rng.child("batch=" + std::to_string(b));
        const bool raise = r_hat[i][j] < target_[i][j];
        for (std::uint64_t a = 0; a < attempts; ++a) {
            if (raise)
                raise_attempt(i, j, batch_rng);
            else
                lower_attempt(i, j, batch_rng);
        }
    }
    hist.l2.push_back(distance());
    checkpoints.push_back(ops_.size());

    hist.initial = hist.l2.front();
    std::size_t best = 0;
    for (std::size_t k = 1; k < hist.l2.size(); ++k)
        if (hist.l2[k] < hist.l2[best]) best = k;
    hist.final_best = hist.l2[best];
    hist.best_batch = static_cast<std::uint32_t>(best);

    while (ops_.size() > checkpoints[best]) undo_last_op();
    return hist;
}

}  // namespace detail

// In-place raise/lower wrappers used by tests and tools.
inline std::uint64_t raise_correlation(MultilayerNetwork& net, std::uint32_t i,
                                       std::uint32_t j, std::uint64_t attempts,
                                       RngStream& rng) {
    detail::EdgeMatchEngine engine(net, edge_correlation_matrix(net));
    std::uint64_t done = 0;
    for (std::uint64_t a = 0; a < attempts; ++a)
        done += engine.raise_attempt(i, j, rng);
    engine.write_back(net);
    return done;
}

inline std::uint64_t lower_correlation(MultilayerNetwork& net, std::uint32_t i,
                                       std::uint32_t j, std::uint64_t attempts,
                                       RngStream& rng) {
    detail::EdgeMatchEngine engine(net, edge_correlation_matrix(net));
    std::uint64_t done = 0;
    for (std::uint64_t a = 0; a < attempts; ++a)
        done += engine.lower_attempt(i, j, rng);
    engine.write_back(net);
    return done;
}

// Runs t batches and leaves `net` at the checkpoint with minimal L2
// distance to the target.
inline MatchHistory match_correlations(MultilayerNetwork& net,
                                       const std::vector<std::vector<double>>& target,
                                       std::uint32_t t, double eps, RngStream& rng,
                                       std::uint32_t max_iters = 1000) {
    detail::EdgeMatchEngine engine(net, target, max_iters);
    MatchHistory hist = engine.run(t, eps, rng);
    engine.write_back(net);
    return hist;
}

}  // namespace mln
