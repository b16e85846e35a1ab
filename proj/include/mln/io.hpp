#pragma once

// File formats: per-layer edge lists (layer_<i>.tsv, tab-separated 1-based
// actor ids), per-layer community files (communities_<i>.tsv), generator
// config files (flat key = value text), sigma tables, and the run summary.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "mln/degrees.hpp"
#include "mln/measures.hpp"
#include "mln/types.hpp"

namespace mln {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s) {
    if (s == "NaN" || s == "nan" || s == "NAN") return kUndefined;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("bad number: '" + s + "'");
    return v;
}

inline std::string format_double(double v) {
    if (is_undefined(v)) return "NaN";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Network files

inline std::vector<Edge> read_edge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<Edge> edges;
    std::unordered_set<std::uint64_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream ls(t);
        long long a = 0, b = 0;
        if (!(ls >> a >> b))
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected two actor ids");
        std::string rest;
        if (ls >> rest)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": trailing tokens");
        if (a < 1 || b < 1)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": actor ids must be positive");
        if (a == b)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": self-loop");
        const auto u = static_cast<ActorId>(a - 1);
        const auto v = static_cast<ActorId>(b - 1);
        if (!seen.insert(edge_key(u, v)).second)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": duplicate edge");
        edges.push_back(make_edge(u, v));
    }
    return edges;
}

// Layer files must be named layer_<i>.tsv with i = 1..ell; community files
// communities_<i>.tsv are read when present. n defaults to the maximum
// actor id seen; pass n_override to keep trailing isolated actors.
inline MultilayerNetwork read_network(const std::filesystem::path& dir,
                                      std::uint32_t n_override = 0) {
    namespace fs = std::filesystem;
    std::vector<fs::path> layer_files;
    for (std::uint32_t i = 1;; ++i) {
        fs::path p = dir / ("layer_" + std::to_string(i) + ".tsv");
        if (!fs::exists(p)) break;
        layer_files.push_back(p);
    }
    if (layer_files.empty())
        throw IoError("no layer_<i>.tsv files in " + dir.string());

    std::vector<std::vector<Edge>> edges;
    std::uint32_t max_id = 0;
    for (const auto& p : layer_files) {
        edges.push_back(read_edge_file(p));
        for (const auto& e : edges.back())
            max_id = std::max(max_id, e.second + 1);
    }

    MultilayerNetwork net;
    net.n = n_override ? n_override : max_id;
    if (net.n < max_id)
        throw IoError("explicit n smaller than the largest actor id");
    net.layers.resize(layer_files.size());
    for (std::size_t i = 0; i < layer_files.size(); ++i) {
        LayerGraph& lg = net.layers[i];
        lg.edges = std::move(edges[i]);
        std::sort(lg.edges.begin(), lg.edges.end());
        lg.active.assign(net.n, 0);
        for (const auto& e : lg.edges) {
            lg.active[e.first] = 1;
            lg.active[e.second] = 1;
        }
        fs::path cp = dir / ("communities_" + std::to_string(i + 1) + ".tsv");
        if (fs::exists(cp)) {
            std::ifstream in(cp);
            if (!in) throw IoError("cannot open " + cp.string());
            lg.partition.assign(net.n, 0);
            std::string line;
            std::size_t lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                const std::string t = detail::trim(line);
                if (t.empty() || t[0] == '#') continue;
                std::istringstream ls(t);
                long long actor = 0, comm = 0;
                if (!(ls >> actor >> comm))
                    throw ParseError(cp.string() + ":" + std::to_string(lineno) +
                                     ": expected actor and community");
                if (actor < 1 || actor > static_cast<long long>(net.n))
                    throw ParseError(cp.string() + ":" + std::to_string(lineno) +
                                     ": actor id out of range");
                lg.partition[static_cast<std::size_t>(actor - 1)] =
                    static_cast<std::int32_t>(comm);
            }
            // community files override degree-based activity for isolated
            // actors that are nonetheless active (community > 0)
            for (std::uint32_t a = 0; a < net.n; ++a)
                if (lg.partition[a] > 0) lg.active[a] = 1;
        }
    }
    return net;
}

inline void write_matrix(std::ostream& os, const std::string& name,
                         const std::vector<std::vector<double>>& m) {
    os << name << "\n";
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ' ';
            if (is_undefined(row[j]))
                os << "NaN";
            else
                os << std::setprecision(6) << row[j];
        }
        os << "\n";
    }
}

inline void write_network(const MultilayerNetwork& net,
                          const std::filesystem::path& dir,
                          const std::string& summary_notes = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const LayerGraph& lg = net.layers[i];
        {
            std::ofstream out(dir / ("layer_" + std::to_string(i + 1) + ".tsv"));
            if (!out) throw IoError("cannot write layer file");
            for (const auto& e : lg.edges)
                out << (e.first + 1) << '\t' << (e.second + 1) << '\n';
        }
        if (lg.has_partition()) {
            std::ofstream out(dir /
                              ("communities_" + std::to_string(i + 1) + ".tsv"));
            if (!out) throw IoError("cannot write community file");
            for (std::uint32_t a = 0; a < net.n; ++a)
                out << (a + 1) << '\t' << lg.partition[a] << '\n';
        }
    }
    std::ofstream out(dir / "summary.txt");
    if (!out) throw IoError("cannot write summary");
    out << "n\t" << net.n << "\n";
    out << "layers\t" << net.num_layers() << "\n";
    for (std::size_t i = 0; i < net.num_layers(); ++i)
        out << "edges_layer_" << (i + 1) << "\t" << net.layers[i].edges.size()
            << "\n";
    const CorrelationReport rep = correlation_report(net);
    write_matrix(out, "degree_tau", rep.degree_tau);
    write_matrix(out, "partition_ami", rep.partition_ami);
    write_matrix(out, "edge_correlation", rep.edge_corr);
    if (!summary_notes.empty()) out << summary_notes;
}

// ---------------------------------------------------------------------------
// Config files

inline GeneratorConfig read_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    GeneratorConfig cfg;
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    auto layer_doubles = [&](const std::string& v) {
        std::vector<double> out;
        for (const auto& tok : detail::split(v, ','))
            out.push_back(detail::parse_double(tok));
        return out;
    };
    auto layer_ints = [&](const std::string& v) {
        std::vector<std::uint32_t> out;
        for (const auto& tok : detail::split(v, ','))
            out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        return out;
    };

    std::vector<double> q, tau, r, gamma, beta, xi;
    std::vector<std::uint32_t> delta, Delta, s, S;
    std::vector<std::string> degree_files, comsize_files;
    std::vector<std::vector<double>> R;
    std::size_t pending_R_rows = 0;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string t = detail::trim(lines[li]);
        if (t.empty() || t[0] == '#') continue;
        if (pending_R_rows > 0) {
            std::vector<double> row;
            std::istringstream rs(t);
            std::string tok;
            while (rs >> tok) row.push_back(detail::parse_double(tok));
            R.push_back(std::move(row));
            --pending_R_rows;
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string val = detail::trim(t.substr(eq + 1));
        try {
            if (key == "n") cfg.n = static_cast<std::uint32_t>(std::stoul(val));
            else if (key == "ell") cfg.ell = static_cast<std::uint32_t>(std::stoul(val));
            else if (key == "d") cfg.d = static_cast<std::uint32_t>(std::stoul(val));
            else if (key == "t") cfg.t = static_cast<std::uint32_t>(std::stoul(val));
            else if (key == "eps") cfg.eps = detail::parse_double(val);
            else if (key == "max_sampling_iters")
                cfg.max_sampling_iters = static_cast<std::uint32_t>(std::stoul(val));
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "q") q = layer_doubles(val);
            else if (key == "tau") tau = layer_doubles(val);
            else if (key == "r") r = layer_doubles(val);
            else if (key == "gamma") gamma = layer_doubles(val);
            else if (key == "delta") delta = layer_ints(val);
            else if (key == "Delta") Delta = layer_ints(val);
            else if (key == "beta") beta = layer_doubles(val);
            else if (key == "s") s = layer_ints(val);
            else if (key == "S") S = layer_ints(val);
            else if (key == "xi") xi = layer_doubles(val);
            else if (key == "degrees_files") degree_files = detail::split(val, ',');
            else if (key == "comsizes_files") comsize_files = detail::split(val, ',');
            else if (key == "R") {
                if (!val.empty()) {
                    std::vector<double> row;
                    std::istringstream rs(val);
                    std::string tok;
                    while (rs >> tok) row.push_back(detail::parse_double(tok));
                    R.push_back(std::move(row));
                }
                pending_R_rows =
                    (cfg.ell > R.size()) ? cfg.ell - R.size() : 0;
            } else {
                throw ParseError("unknown key '" + key + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) + ": " +
                             e.what());
        }
    }

    cfg.layers.resize(cfg.ell);
    auto fill_d = [&](const std::vector<double>& src, double LayerParams::*fld,
                      const char* name) {
        if (src.empty()) return;
        if (src.size() != cfg.ell)
            throw ParseError(std::string(name) + " must list one value per layer");
        for (std::size_t i = 0; i < cfg.ell; ++i) cfg.layers[i].*fld = src[i];
    };
    auto fill_u = [&](const std::vector<std::uint32_t>& src,
                      std::uint32_t LayerParams::*fld, const char* name) {
        if (src.empty()) return;
        if (src.size() != cfg.ell)
            throw ParseError(std::string(name) + " must list one value per layer");
        for (std::size_t i = 0; i < cfg.ell; ++i) cfg.layers[i].*fld = src[i];
    };
    fill_d(q, &LayerParams::q, "q");
    fill_d(tau, &LayerParams::tau, "tau");
    fill_d(r, &LayerParams::r, "r");
    fill_d(gamma, &LayerParams::gamma, "gamma");
    fill_d(beta, &LayerParams::beta, "beta");
    fill_d(xi, &LayerParams::xi, "xi");
    fill_u(delta, &LayerParams::delta, "delta");
    fill_u(Delta, &LayerParams::Delta, "Delta");
    fill_u(s, &LayerParams::s, "s");
    fill_u(S, &LayerParams::S, "S");
    if (!R.empty()) {
        if (R.size() != cfg.ell)
            throw ParseError("R must have ell rows");
        for (const auto& row : R)
            if (row.size() != cfg.ell) throw ParseError("R rows must have ell entries");
        cfg.R = std::move(R);
    }

    const auto base = path.parent_path();
    if (!degree_files.empty()) {
        if (degree_files.size() != cfg.ell)
            throw ParseError("degrees_files must list one path per layer");
        cfg.injected_degrees.resize(cfg.ell);
        for (std::size_t i = 0; i < cfg.ell; ++i) {
            if (degree_files[i].empty() || degree_files[i] == "-") continue;
            std::ifstream din(base / degree_files[i]);
            if (!din) throw IoError("cannot open " + degree_files[i]);
            std::vector<std::uint32_t> degs(cfg.n, 0);
            std::string dl;
            while (std::getline(din, dl)) {
                const std::string tt = detail::trim(dl);
                if (tt.empty() || tt[0] == '#') continue;
                std::istringstream ls(tt);
                long long actor = 0, deg = 0;
                if (!(ls >> actor >> deg))
                    throw ParseError(degree_files[i] + ": expected actor and degree");
                if (actor < 1 || actor > static_cast<long long>(cfg.n))
                    throw ParseError(degree_files[i] + ": actor id out of range");
                degs[static_cast<std::size_t>(actor - 1)] =
                    static_cast<std::uint32_t>(deg);
            }
            cfg.injected_degrees[i] = std::move(degs);
        }
    }
    if (!comsize_files.empty()) {
        if (comsize_files.size() != cfg.ell)
            throw ParseError("comsizes_files must list one path per layer");
        cfg.injected_comm_sizes.resize(cfg.ell);
        for (std::size_t i = 0; i < cfg.ell; ++i) {
            if (comsize_files[i].empty() || comsize_files[i] == "-") continue;
            std::ifstream cin_(base / comsize_files[i]);
            if (!cin_) throw IoError("cannot open " + comsize_files[i]);
            std::string cl;
            while (std::getline(cin_, cl)) {
                const std::string tt = detail::trim(cl);
                if (tt.empty() || tt[0] == '#') continue;
                cfg.injected_comm_sizes[i].push_back(
                    static_cast<std::uint32_t>(std::stoul(tt)));
            }
        }
    }
    return cfg;
}

inline void write_config(const GeneratorConfig& cfg,
                         const std::filesystem::path& path,
                         const std::vector<std::string>& degree_files = {},
                         const std::vector<std::string>& comsize_files = {}) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "n = " << cfg.n << "\n";
    out << "ell = " << cfg.ell << "\n";
    out << "d = " << cfg.d << "\n";
    out << "t = " << cfg.t << "\n";
    out << "eps = " << detail::format_double(cfg.eps) << "\n";
    out << "max_sampling_iters = " << cfg.max_sampling_iters << "\n";
    out << "seed = " << cfg.seed << "\n";
    auto emit_d = [&](const char* name, double LayerParams::*fld) {
        out << name << " = ";
        for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
            if (i) out << ",";
            out << detail::format_double(cfg.layers[i].*fld);
        }
        out << "\n";
    };
    auto emit_u = [&](const char* name, std::uint32_t LayerParams::*fld) {
        out << name << " = ";
        for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
            if (i) out << ",";
            out << cfg.layers[i].*fld;
        }
        out << "\n";
    };
    emit_d("q", &LayerParams::q);
    emit_d("tau", &LayerParams::tau);
    emit_d("r", &LayerParams::r);
    emit_d("gamma", &LayerParams::gamma);
    emit_u("delta", &LayerParams::delta);
    emit_u("Delta", &LayerParams::Delta);
    emit_d("beta", &LayerParams::beta);
    emit_u("s", &LayerParams::s);
    emit_u("S", &LayerParams::S);
    emit_d("xi", &LayerParams::xi);
    if (cfg.has_target_matrix()) {
        out << "R =\n";
        for (const auto& row : cfg.R) {
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out << ' ';
                out << detail::format_double(row[j]);
            }
            out << "\n";
        }
    }
    if (!degree_files.empty()) {
        out << "degrees_files = ";
        for (std::size_t i = 0; i < degree_files.size(); ++i)
            out << (i ? "," : "") << degree_files[i];
        out << "\n";
    }
    if (!comsize_files.empty()) {
        out << "comsizes_files = ";
        for (std::size_t i = 0; i < comsize_files.size(); ++i)
            out << (i ? "," : "") << comsize_files[i];
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Sigma table files: lines "sigma<TAB>tau", ascending sigma.

inline SigmaTable read_sigma_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<double> sigma, tau;
    std::uint64_t n_cal = 0;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto pos = t.find("n_cal=");
            if (pos != std::string::npos)
                n_cal = std::stoull(t.substr(pos + 6));
            continue;
        }
        std::istringstream ls(t);
        double s = 0, v = 0;
        if (!(ls >> s >> v)) throw ParseError("bad sigma table line: " + t);
        sigma.push_back(s);
        tau.push_back(v);
    }
    return SigmaTable(std::move(sigma), std::move(tau), n_cal);
}

inline void write_sigma_table(const SigmaTable& table,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# sigma calibration, n_cal=" << table.n_cal() << "\n";
    for (std::size_t i = 0; i < table.sigma().size(); ++i)
        out << detail::format_double(table.sigma()[i]) << '\t'
            << detail::format_double(table.tau()[i]) << '\n';
}

}  // namespace mln
