#pragma once

// Inter-layer correlation measures: Kendall tau-b on degree sequences,
// adjusted mutual information on partitions, and the edge-correlation
// matrix. Everything here is pure and thread-safe.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mln/types.hpp"

namespace mln {

namespace detail {

// Counts swaps needed to sort v ascending (merge sort); pairs out of order
// are exactly the discordant pairs in Knight's tau algorithm.
inline std::uint64_t merge_count_swaps(std::vector<double>& v,
                                       std::vector<double>& tmp,
                                       std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count_swaps(v, tmp, lo, mid) +
                          merge_count_swaps(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

inline std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

}  // namespace detail

// Kendall tau-b with tie adjustment, O(m log m). Returns NaN when either
// input is fully tied.
inline double kendall_tau_b(const std::vector<double>& x,
                            const std::vector<double>& y) {
    const std::size_t m = x.size();
    if (m != y.size() || m < 2) return kUndefined;

    std::vector<std::uint32_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = static_cast<std::uint32_t>(i);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    // Tie counts in x and joint ties, scanning runs in sorted order.
    std::uint64_t n1 = 0, n3 = 0;
    {
        std::uint64_t run_x = 1, run_xy = 1;
        for (std::size_t i = 1; i < m; ++i) {
            if (x[idx[i]] == x[idx[i - 1]]) {
                ++run_x;
                if (y[idx[i]] == y[idx[i - 1]])
                    ++run_xy;
                else {
                    n3 += detail::tie_pairs(run_xy);
                    run_xy = 1;
                }
            } else {
                n1 += detail::tie_pairs(run_x);
                n3 += detail::tie_pairs(run_xy);
                run_x = run_xy = 1;
            }
        }
        n1 += detail::tie_pairs(run_x);
        n3 += detail::tie_pairs(run_xy);
    }

    std::vector<double> ys(m), tmp(m);
    for (std::size_t i = 0; i < m; ++i) ys[i] = y[idx[i]];
    const std::uint64_t swaps = detail::merge_count_swaps(ys, tmp, 0, m);

    std::uint64_t n2 = 0;
    {
        std::uint64_t run_y = 1;
        for (std::size_t i = 1; i < m; ++i) {
            if (ys[i] == ys[i - 1])
                ++run_y;
            else {
                n2 += detail::tie_pairs(run_y);
                run_y = 1;
            }
        }
        n2 += detail::tie_pairs(run_y);
    }

    const std::uint64_t n0 = static_cast<std::uint64_t>(m) * (m - 1) / 2;
    if (n0 == n1 || n0 == n2) return kUndefined;

    const double con_minus_dis =
        static_cast<double>(n0) - static_cast<double>(n1) -
        static_cast<double>(n2) + static_cast<double>(n3) -
        2.0 * static_cast<double>(swaps);
    const double denom = std::sqrt(static_cast<double>(n0 - n1)) *
                         std::sqrt(static_cast<double>(n0 - n2));
    return con_minus_dis / denom;
}

// Correlation between actor labels and a degree sequence in the generator's
// convention: +1 means the largest degree sits on the smallest label
// (degree rank order equals label order).
inline double degree_label_tau(const std::vector<double>& labels,
                               const std::vector<double>& degrees) {
    const double t = kendall_tau_b(labels, degrees);
    return is_undefined(t) ? t : -t;
}

// Two community labelings restricted to actors active in both layers.
struct PartitionPair {
    std::vector<std::int32_t> labels_a;
    std::vector<std::int32_t> labels_b;
};

inline PartitionPair make_partition_pair(const LayerGraph& a,
                                         const LayerGraph& b,
                                         std::uint32_t n) {
    PartitionPair p;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (a.active[v] && b.active[v]) {
            p.labels_a.push_back(a.partition.empty() ? 0 : a.partition[v]);
            p.labels_b.push_back(b.partition.empty() ? 0 : b.partition[v]);
        }
    }
    return p;
}

namespace detail {

struct Contingency {
    std::vector<std::uint64_t> row;  // sizes of clusters in A
    std::vector<std::uint64_t> col;  // sizes of clusters in B
    std::unordered_map<std::uint64_t, std::uint64_t> cells;  // (i<<32|j) -> count
    std::uint64_t total = 0;
};

inline Contingency build_contingency(const std::vector<std::int32_t>& a,
                                     const std::vector<std::int32_t>& b) {
    Contingency c;
    std::unordered_map<std::int32_t, std::uint32_t> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ia = ra.emplace(a[i], static_cast<std::uint32_t>(ra.size())).first->second;
        auto ib = rb.emplace(b[i], static_cast<std::uint32_t>(rb.size())).first->second;
        if (ia >= c.row.size()) c.row.resize(ia + 1, 0);
        if (ib >= c.col.size()) c.col.resize(ib + 1, 0);
        ++c.row[ia];
        ++c.col[ib];
        ++c.cells[(static_cast<std::uint64_t>(ia) << 32) | ib];
        ++c.total;
    }
    return c;
}

inline double entropy(const std::vector<std::uint64_t>& sizes, double total) {
    double h = 0.0;
    for (auto s : sizes) {
        if (s == 0) continue;
        const double p = static_cast<double>(s) / total;
        h -= p * std::log(p);
    }
    return h;
}

// Expected mutual information under the hypergeometric (permutation) model.
inline double expected_mi(const Contingency& c) {
    const auto N = c.total;
    const double dn = static_cast<double>(N);
    // lg[k] = log(k!) = lgamma(k+1)
    std::vector<double> lg(N + 1);
    lg[0] = 0.0;
    for (std::uint64_t i = 1; i <= N; ++i)
        lg[i] = lg[i - 1] + std::log(static_cast<double>(i));
    auto logfact = [&](std::uint64_t k) { return lg[k]; };

    double emi = 0.0;
    for (std::uint64_t ai : c.row) {
        for (std::uint64_t bj : c.col) {
            const std::uint64_t start =
                ai + bj > N ? ai + bj - N : 1;
            const std::uint64_t end = std::min(ai, bj);
            for (std::uint64_t nij = start; nij <= end; ++nij) {
                const double t1 = static_cast<double>(nij) / dn;
                const double t2 =
                    std::log(dn * static_cast<double>(nij) /
                             (static_cast<double>(ai) * static_cast<double>(bj)));
                const double t3 = std::exp(
                    logfact(ai) + logfact(bj) + logfact(N - ai) + logfact(N - bj) -
                    logfact(N) - logfact(nij) - logfact(ai - nij) -
                    logfact(bj - nij) - logfact(N - ai - bj + nij));
                emi += t1 * t2 * t3;
            }
        }
    }
    return emi;
}

inline bool identical_partitions(const Contingency& c) {
    if (c.row.size() != c.col.size()) return false;
    return c.cells.size() == c.row.size();
}

}  // namespace detail

// Adjusted mutual information with the arithmetic-mean normalizer:
//   AMI = (MI - E[MI]) / (mean(H(A), H(B)) - E[MI]).
// Identical partitions score 1 (including the two-single-cluster case);
// otherwise a vanishing denominator yields the undefined marker.
inline double ami(const PartitionPair& p) {
    if (p.labels_a.empty() || p.labels_a.size() != p.labels_b.size())
        return kUndefined;
    const auto c = detail::build_contingency(p.labels_a, p.labels_b);
    if (detail::identical_partitions(c)) return 1.0;

    const double dn = static_cast<double>(c.total);
    double mi = 0.0;
    for (const auto& [key, count] : c.cells) {
        const auto i = static_cast<std::uint32_t>(key >> 32);
        const auto j = static_cast<std::uint32_t>(key & 0xffffffffULL);
        const double pij = static_cast<double>(count) / dn;
        const double pa = static_cast<double>(c.row[i]) / dn;
        const double pb = static_cast<double>(c.col[j]) / dn;
        mi += pij * std::log(pij / (pa * pb));
    }
    const double ha = detail::entropy(c.row, dn);
    const double hb = detail::entropy(c.col, dn);
    const double emi = detail::expected_mi(c);
    const double denom = 0.5 * (ha + hb) - emi;
    if (std::abs(denom) < 1e-12) return kUndefined;
    return (mi - emi) / denom;
}

// E_i^j: edges of layer i whose endpoints are active in both layer i and
// layer j.
inline std::vector<Edge> mutual_edges(const LayerGraph& li, const LayerGraph& lj) {
    std::vector<Edge> out;
    out.reserve(li.edges.size());
    for (const auto& e : li.edges)
        if (lj.active[e.first] && lj.active[e.second]) out.push_back(e);
    return out;
}

// r_ij = |E_i^j  intersect  E_j^i| / min(|E_i^j|, |E_j^i|); NaN when the
// smaller side is empty.
inline std::vector<std::vector<double>> edge_correlation_matrix(
    const MultilayerNetwork& net) {
    const std::size_t L = net.num_layers();
    std::vector<std::vector<double>> R(L, std::vector<double>(L, kUndefined));
    for (std::size_t i = 0; i < L; ++i)
        if (!net.layers[i].edges.empty()) R[i][i] = 1.0;
    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = i + 1; j < L; ++j) {
            const auto ei = mutual_edges(net.layers[i], net.layers[j]);
            const auto ej = mutual_edges(net.layers[j], net.layers[i]);
            const std::size_t mn = std::min(ei.size(), ej.size());
            if (mn == 0) continue;
            std::unordered_set<std::uint64_t> keys;
            keys.reserve(ei.size() * 2);
            for (const auto& e : ei) keys.insert(edge_key(e));
            std::size_t inter = 0;
            for (const auto& e : ej) inter += keys.count(edge_key(e));
            R[i][j] = R[j][i] =
                static_cast<double>(inter) / static_cast<double>(mn);
        }
    }
    return R;
}

// Degree tau-b, partition AMI, and edge correlation for every layer pair,
// each restricted to actors active in both layers of the pair.
inline CorrelationReport correlation_report(const MultilayerNetwork& net) {
    const std::size_t L = net.num_layers();
    CorrelationReport rep;
    rep.degree_tau.assign(L, std::vector<double>(L, kUndefined));
    rep.partition_ami.assign(L, std::vector<double>(L, kUndefined));
    rep.edge_corr = edge_correlation_matrix(net);

    std::vector<std::vector<std::uint32_t>> deg(L);
    for (std::size_t i = 0; i < L; ++i) deg[i] = degrees_of(net.layers[i], net.n);

    for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = i; j < L; ++j) {
            std::vector<double> di, dj;
            for (std::uint32_t v = 0; v < net.n; ++v) {
                if (net.layers[i].active[v] && net.layers[j].active[v]) {
                    di.push_back(deg[i][v]);
                    dj.push_back(deg[j][v]);
                }
            }
            const double t = kendall_tau_b(di, dj);
            rep.degree_tau[i][j] = rep.degree_tau[j][i] = t;
            if (net.layers[i].has_partition() && net.layers[j].has_partition()) {
                const auto pp =
                    make_partition_pair(net.layers[i], net.layers[j], net.n);
                const double a = ami(pp);
                rep.partition_ami[i][j] = rep.partition_ami[j][i] = a;
            }
        }
    }
    return rep;
}

// Fraction of edges whose endpoints lie in different communities.
inline double noise_fraction(const LayerGraph& layer) {
    if (layer.edges.empty() || !layer.has_partition()) return kUndefined;
    std::size_t inter = 0;
    for (const auto& e : layer.edges)
        inter += layer.partition[e.first] != layer.partition[e.second];
    return static_cast<double>(inter) / static_cast<double>(layer.edges.size());
}

// Frobenius distance between two matrices over entries defined in both.
inline double matrix_l2_distance(const std::vector<std::vector<double>>& a,
                                 const std::vector<std::vector<double>>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            if (is_undefined(a[i][j]) || is_undefined(b[i][j])) continue;
            const double d = a[i][j] - b[i][j];
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

}  // namespace mln
