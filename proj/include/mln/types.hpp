#pragma once

// Domain model: multilayer networks over a fixed actor set, per-layer
// partitions with community 0 reserved for inactive actors, and the
// generator configuration with its range validation.
//
// Actor ids are 0-based internally; file formats are 1-based (see io.hpp).

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mln {

using ActorId = std::uint32_t;
using Edge = std::pair<ActorId, ActorId>;  // canonical: first < second

inline Edge make_edge(ActorId a, ActorId b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

inline std::uint64_t edge_key(ActorId a, ActorId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

inline std::uint64_t edge_key(const Edge& e) { return edge_key(e.first, e.second); }

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

inline bool is_undefined(double x) { return std::isnan(x); }

// One layer: a simple edge set over actor ids, the ground-truth partition
// (0 = inactive), and the activity mask. Immutable once built.
struct LayerGraph {
    std::vector<Edge> edges;
    std::vector<std::int32_t> partition;  // size n when present, else empty
    std::vector<std::uint8_t> active;     // size n

    bool has_partition() const { return !partition.empty(); }
};

struct MultilayerNetwork {
    std::uint32_t n = 0;
    std::vector<LayerGraph> layers;

    std::size_t num_layers() const { return layers.size(); }
};

inline std::vector<std::uint32_t> degrees_of(const LayerGraph& layer,
                                             std::uint32_t n) {
    std::vector<std::uint32_t> deg(n, 0);
    for (const auto& e : layer.edges) {
        ++deg[e.first];
        ++deg[e.second];
    }
    return deg;
}

struct LayerParams {
    double q = 1.0;            // fraction of active actors, (0,1]
    double tau = 0.0;          // degree/label correlation, [-1,1]
    double r = 1.0;            // partition correlation strength, [0,1]
    double gamma = 2.5;        // degree exponent, (2,3)
    std::uint32_t delta = 5;   // min degree, >= 1
    std::uint32_t Delta = 50;  // max degree, delta <= Delta < n
    double beta = 1.5;         // community-size exponent, (1,2)
    std::uint32_t s = 8;       // min community size, delta < s
    std::uint32_t S = 32;      // max community size, s <= S <= n
    double xi = 0.2;           // noise level, (0,1)
};

struct GeneratorConfig {
    std::uint32_t n = 0;
    std::uint32_t ell = 0;
    std::uint32_t d = 2;    // reference-layer dimension
    std::uint32_t t = 100;  // rewiring batches
    double eps = 0.05;      // batch fraction
    std::uint32_t max_sampling_iters = 1000;
    std::uint64_t seed = 0;
    std::vector<LayerParams> layers;

    // Target edge-correlation matrix; empty means "no target" (Phase 6
    // skipped). NaN entries are left unconstrained.
    std::vector<std::vector<double>> R;

    // Optional injections. Degrees are per actor (0 = inactive in that
    // layer); community sizes are a plain size list per layer. Empty inner
    // vectors mean "not injected" for that layer.
    std::vector<std::vector<std::uint32_t>> injected_degrees;
    std::vector<std::vector<std::uint32_t>> injected_comm_sizes;

    bool has_injected_degrees(std::size_t i) const {
        return i < injected_degrees.size() && !injected_degrees[i].empty();
    }
    bool has_injected_comm_sizes(std::size_t i) const {
        return i < injected_comm_sizes.size() && !injected_comm_sizes[i].empty();
    }
    bool has_target_matrix() const { return !R.empty(); }
};

// Three symmetric ell x ell matrices; NaN marks undefined entries.
struct CorrelationReport {
    std::vector<std::vector<double>> degree_tau;
    std::vector<std::vector<double>> partition_ami;
    std::vector<std::vector<double>> edge_corr;
};

// Total range/structure check against the parameter tables. Returns
// human-readable violations; never throws.
inline std::vector<std::string> validate_config(const GeneratorConfig& cfg) {
    std::vector<std::string> v;
    auto bad = [&v](const std::string& msg) { v.push_back(msg); };

    if (cfg.n < 1) bad("n must be a positive integer");
    if (cfg.ell < 1) bad("ell must be a positive integer");
    if (cfg.d < 1) bad("d must be a positive integer");
    if (cfg.t < 1) bad("t must be a positive integer");
    if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) bad("eps must lie in (0,1]");
    if (cfg.max_sampling_iters < 1) bad("max_sampling_iters must be positive");
    if (cfg.layers.size() != cfg.ell)
        bad("layer parameter count does not match ell");

    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const LayerParams& p = cfg.layers[i];
        const std::string tag = "layer " + std::to_string(i + 1) + ": ";
        if (!(p.q > 0.0 && p.q <= 1.0)) bad(tag + "q must lie in (0,1]");
        if (!(p.tau >= -1.0 && p.tau <= 1.0)) bad(tag + "tau must lie in [-1,1]");
        if (!(p.r >= 0.0 && p.r <= 1.0)) bad(tag + "r must lie in [0,1]");
        if (!(p.gamma > 2.0 && p.gamma < 3.0)) bad(tag + "gamma must lie in (2,3)");
        if (p.delta < 1) bad(tag + "delta must be at least 1");
        if (p.Delta < p.delta) bad(tag + "Delta must be at least delta");
        if (cfg.n >= 1 && p.Delta >= cfg.n) bad(tag + "Delta must be below n");
        if (!(p.beta > 1.0 && p.beta < 2.0)) bad(tag + "beta must lie in (1,2)");
        if (p.s <= p.delta)
            bad(tag + "community size bound: delta < s required");
        if (p.S < p.s) bad(tag + "S must be at least s");
        if (cfg.n >= 1 && p.S > cfg.n) bad(tag + "S must be at most n");
        if (!(p.xi > 0.0 && p.xi < 1.0)) bad(tag + "xi must lie in (0,1)");
    }

    if (cfg.has_target_matrix()) {
        if (cfg.R.size() != cfg.ell) {
            bad("R must be an ell x ell matrix");
        } else {
            for (std::size_t i = 0; i < cfg.ell; ++i) {
                if (cfg.R[i].size() != cfg.ell) {
                    bad("R must be an ell x ell matrix");
                    break;
                }
            }
            if (v.empty() || cfg.R.size() == cfg.ell) {
                bool shape_ok = true;
                for (const auto& row : cfg.R) shape_ok &= row.size() == cfg.ell;
                if (shape_ok) {
                    for (std::size_t i = 0; i < cfg.ell; ++i) {
                        if (!is_undefined(cfg.R[i][i]) && cfg.R[i][i] != 1.0)
                            bad("R diagonal must be 1 where defined");
                        for (std::size_t j = i + 1; j < cfg.ell; ++j) {
                            const double a = cfg.R[i][j], b = cfg.R[j][i];
                            if (is_undefined(a) != is_undefined(b) ||
                                (!is_undefined(a) && a != b))
                                bad("R not symmetric at (" +
                                    std::to_string(i + 1) + "," +
                                    std::to_string(j + 1) + ")");
                            if (!is_undefined(a) && !(a >= 0.0 && a <= 1.0))
                                bad("R entries must lie in [0,1]");
                        }
                    }
                }
            }
        }
    }

    for (std::size_t i = 0; i < cfg.injected_degrees.size(); ++i) {
        if (!cfg.injected_degrees[i].empty() &&
            cfg.injected_degrees[i].size() != cfg.n)
            bad("injected degree sequence for layer " + std::to_string(i + 1) +
                " must list one degree per actor");
    }
    return v;
}

}  // namespace mln
