// Command-line front end: generate / measure / extract / diffuse /
// calibrate-sigma / bench. Exit codes: 0 success, 2 invalid config,
// 3 generation infeasible, 1 anything else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mln/correlate.hpp"
#include "mln/diffuse.hpp"
#include "mln/extract.hpp"
#include "mln/generate.hpp"
#include "mln/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

void print_matrix(std::ostream& os, const std::vector<std::vector<double>>& m) {
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ' ';
            if (mln::is_undefined(row[j]))
                os << "NaN";
            else
                os << std::setprecision(6) << row[j];
        }
        os << '\n';
    }
}

json matrix_json(const std::vector<std::vector<double>>& m) {
    json rows = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (double v : row)
            r.push_back(mln::is_undefined(v) ? json() : json(v));
        rows.push_back(r);
    }
    return rows;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 bool skip_phase6, bool have_seed, std::uint64_t seed,
                 const std::string& sigma_path, bool dump_reference,
                 const std::string& history_path) {
    mln::GeneratorConfig cfg = mln::read_config(config_path);
    if (have_seed) cfg.seed = seed;
    const auto violations = mln::validate_config(cfg);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "config error: " << v << '\n';
        return 2;
    }

    mln::GenerateOptions opts;
    opts.skip_phase6 = skip_phase6;
    mln::SigmaTable table;
    if (!sigma_path.empty()) {
        table = mln::read_sigma_table(sigma_path);
        opts.sigma_table = &table;
    }

    const auto wall0 = std::chrono::steady_clock::now();
    mln::GenerationResult res;
    try {
        res = mln::generate_network(cfg, opts);
    } catch (const mln::GenerationError& e) {
        std::cerr << "generation infeasible: " << e.what() << '\n';
        return 3;
    }
    const double wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - wall0)
                            .count();

    std::ostringstream notes;
    for (std::size_t i = 0; i < res.diag.size(); ++i) {
        const auto& d = res.diag[i];
        if (d.parity_decremented)
            notes << "note\tlayer " << (i + 1) << ": degree sum parity fix applied\n";
        if (d.comm_size_exceeded_S)
            notes << "note\tlayer " << (i + 1) << ": community size pushed past S\n";
        if (d.rewire.moved_edges)
            notes << "note\tlayer " << (i + 1) << ": " << d.rewire.moved_edges
                  << " community edges moved to background ("
                  << d.rewire.transferred_units << " units)\n";
        if (d.rewire.leftover_bad)
            notes << "warning\tlayer " << (i + 1) << ": " << d.rewire.leftover_bad
                  << " non-simple edges left after rewiring\n";
    }
    mln::write_network(res.net, out_dir, notes.str());

    if (dump_reference) {
        // regenerate the reference layer from the seed; cheap and avoids
        // carrying it through the pipeline
        mln::RngStream root(cfg.seed);
        mln::RngStream rr = root.child("reference");
        const auto ref = mln::build_reference_layer(cfg.n, cfg.d, rr);
        std::ofstream out(fs::path(out_dir) / "reference.tsv");
        for (std::uint32_t a = 0; a < cfg.n; ++a) {
            out << (a + 1);
            for (std::uint32_t k = 0; k < cfg.d; ++k)
                out << '\t' << std::setprecision(17) << ref.point(a)[k];
            out << '\n';
        }
    }

    if (!history_path.empty() && res.ran_phase6) {
        std::ofstream out(history_path);
        for (std::size_t b = 0; b < res.phase6.l2.size(); ++b)
            out << b << '\t' << std::setprecision(10) << res.phase6.l2[b] << '\n';
    }

    json manifest;
    manifest["subcommand"] = "generate";
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["config_file"] = config_path;
    manifest["skip_phase6"] = skip_phase6;
    manifest["n"] = cfg.n;
    manifest["ell"] = cfg.ell;
    manifest["wall_seconds"] = wall;
    json phases = json::array();
    for (double s : res.timings.seconds) phases.push_back(s);
    manifest["phase_seconds"] = phases;
    if (res.ran_phase6) {
        manifest["phase6_initial_l2"] = res.phase6.initial;
        manifest["phase6_best_l2"] = res.phase6.final_best;
        manifest["phase6_best_checkpoint"] = res.phase6.best_batch;
    }
    json taus = json::array();
    for (const auto& d : res.diag)
        taus.push_back(mln::is_undefined(d.achieved_tau) ? json()
                                                         : json(d.achieved_tau));
    manifest["achieved_tau"] = taus;
    std::ofstream mout(fs::path(out_dir) / "manifest.json");
    mout << manifest.dump(2) << '\n';

    std::cout << "generated " << cfg.ell << " layers over " << cfg.n
              << " actors in " << std::setprecision(3) << wall << " s -> "
              << out_dir << '\n';
    return 0;
}

int cmd_measure(const std::string& net_dir, std::uint32_t n_override) {
    const auto net = mln::read_network(net_dir, n_override);
    const auto rep = mln::correlation_report(net);
    std::cout << "degree_tau\n";
    print_matrix(std::cout, rep.degree_tau);
    std::cout << "partition_ami\n";
    print_matrix(std::cout, rep.partition_ami);
    std::cout << "edge_correlation\n";
    print_matrix(std::cout, rep.edge_corr);
    return 0;
}

int cmd_extract(const std::string& net_dir, const std::string& out_file,
                bool use_partitions, double resolution, std::uint64_t seed,
                const std::string& sequences_dir) {
    auto net = mln::read_network(net_dir);
    mln::ExtractionOptions opts;
    opts.detect_partitions = !use_partitions;
    opts.resolution = resolution;
    mln::RngStream rng(seed, "extract");
    const auto res = mln::extract_config(net, opts, rng);

    std::vector<std::string> degree_files, comsize_files;
    if (!sequences_dir.empty()) {
        fs::create_directories(sequences_dir);
        const fs::path base(sequences_dir);
        const fs::path out_base = fs::path(out_file).parent_path();
        for (std::size_t i = 0; i < res.config.ell; ++i) {
            const std::string dname = "degrees_" + std::to_string(i + 1) + ".tsv";
            const std::string cname = "comsizes_" + std::to_string(i + 1) + ".tsv";
            {
                std::ofstream out(base / dname);
                for (std::uint32_t a = 0; a < res.config.n; ++a)
                    out << (a + 1) << '\t' << res.degree_sequences[i][a] << '\n';
            }
            {
                std::ofstream out(base / cname);
                for (auto s : res.community_sizes[i]) out << s << '\n';
            }
            degree_files.push_back(
                fs::relative(base / dname, out_base.empty() ? "." : out_base)
                    .string());
            comsize_files.push_back(
                fs::relative(base / cname, out_base.empty() ? "." : out_base)
                    .string());
        }
    }
    mln::write_config(res.config, out_file, degree_files, comsize_files);
    std::cout << "extracted config for " << res.config.ell << " layers over "
              << res.config.n << " actors -> " << out_file << '\n';
    std::cout << "note: r estimates use the first layer's detected partition "
                 "as a proxy reference (coarse estimation)\n";
    return 0;
}

int cmd_diffuse(const std::string& net_dir, double pi, const std::string& proto,
                double budget, const std::string& seeder,
                const std::vector<std::uint32_t>& seed_list, std::uint32_t reps,
                std::uint64_t seed, std::uint32_t max_steps) {
    const auto net = mln::read_network(net_dir);
    const mln::Protocol protocol =
        proto == "AND" || proto == "and" ? mln::Protocol::AND : mln::Protocol::OR;
    const auto k = mln::resolve_budget(budget, net.n);

    std::vector<std::uint32_t> seeds;
    if (seeder == "list") {
        for (auto s : seed_list) {
            if (s < 1 || s > net.n)
                throw std::invalid_argument("seed actor out of range");
            seeds.push_back(s - 1);
        }
    } else if (seeder == "dcd") {
        seeds = mln::seed_dcd(net, 0, k);
    } else {
        seeds = mln::seed_nsd(net, k);
    }

    std::cout << "protocol\tpi\tbudget\trep\tgain\tsteps\tactivated\n";
    double sum = 0.0, sum2 = 0.0;
    for (std::uint32_t rep = 0; rep < reps; ++rep) {
        const auto out =
            mln::run_micm(net, seeds, pi, protocol, max_steps, seed, rep);
        sum += out.gain;
        sum2 += out.gain * out.gain;
        std::cout << mln::to_string(protocol) << '\t' << pi << '\t' << k << '\t'
                  << rep << '\t' << std::setprecision(6) << out.gain << '\t'
                  << out.steps.size() << '\t' << out.final_active.size() << '\n';
    }
    const double mean = sum / reps;
    const double sd =
        reps > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / reps) / (reps - 1)))
                 : 0.0;
    std::cout << "# mean_gain\t" << std::setprecision(6) << mean << "\tstd\t"
              << sd << '\n';
    return 0;
}

int cmd_calibrate(std::uint64_t n, const std::string& out_file,
                  std::uint32_t reps, std::uint64_t seed,
                  const std::string& grid_spec) {
    std::vector<double> grid;
    if (!grid_spec.empty()) {
        std::istringstream gs(grid_spec);
        std::string tok;
        while (std::getline(gs, tok, ',')) grid.push_back(std::stod(tok));
    } else {
        grid = mln::SigmaTable::builtin().sigma();
    }
    mln::RngStream rng(seed, "sigma-calibration");
    const auto table = mln::build_sigma_table(n, grid, reps, rng);
    mln::write_sigma_table(table, out_file);
    std::cout << "calibrated " << grid.size() << " sigma values at n=" << n
              << " (" << reps << " reps) -> " << out_file << '\n';
    return 0;
}

mln::GeneratorConfig bench_config(std::uint32_t n, std::uint32_t ell,
                                  std::uint64_t seed) {
    mln::GeneratorConfig cfg;
    cfg.n = n;
    cfg.ell = ell;
    cfg.seed = seed;
    cfg.layers.assign(ell, {});
    for (auto& p : cfg.layers) {
        p.q = 1.0;
        p.tau = 0.0;
        p.r = 1.0;
        p.gamma = 2.5;
        p.delta = 5;
        p.Delta = std::max<std::uint32_t>(
            5, static_cast<std::uint32_t>(std::sqrt(double(n))));
        p.beta = 1.5;
        p.s = 50;
        p.S = std::min<std::uint32_t>(1000, n / 2);
        p.xi = 0.2;
    }
    cfg.R.assign(ell, std::vector<double>(ell, 0.3));
    for (std::uint32_t i = 0; i < ell; ++i) cfg.R[i][i] = 1.0;
    return cfg;
}

int cmd_bench(const std::vector<std::uint32_t>& sizes,
              const std::vector<std::uint32_t>& layer_counts, std::uint32_t reps,
              std::uint64_t seed) {
    std::cout << "n\tell\tphase6\tmean_s\tstd_s\tbreakdown(p1..p6 %)\n";
    for (auto n : sizes) {
        for (auto ell : layer_counts) {
            for (int with6 = 1; with6 >= 0; --with6) {
                double sum = 0.0, sum2 = 0.0;
                mln::PhaseTimings acc;
                for (std::uint32_t rep = 0; rep < reps; ++rep) {
                    auto cfg = bench_config(n, ell, seed + rep);
                    mln::GenerateOptions opts;
                    opts.skip_phase6 = with6 == 0;
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto res = mln::generate_network(cfg, opts);
                    const double dt = std::chrono::duration<double>(
                                          std::chrono::steady_clock::now() - t0)
                                          .count();
                    sum += dt;
                    sum2 += dt * dt;
                    for (int ph = 0; ph < 6; ++ph)
                        acc.seconds[ph] += res.timings.seconds[ph];
                }
                const double mean = sum / reps;
                const double sd =
                    reps > 1
                        ? std::sqrt(std::max(0.0, (sum2 - sum * sum / reps) /
                                                      (reps - 1)))
                        : 0.0;
                std::cout << n << '\t' << ell << '\t' << (with6 ? "yes" : "no")
                          << '\t' << std::setprecision(4) << mean << '\t' << sd
                          << '\t';
                const double total = std::max(1e-12, acc.total());
                for (int ph = 0; ph < 6; ++ph) {
                    if (ph) std::cout << ' ';
                    std::cout << std::setprecision(3)
                              << 100.0 * acc.seconds[ph] / total;
                }
                std::cout << '\n';
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic multilayer network benchmark toolkit"};
    app.require_subcommand(1);

    // generate
    std::string config_path, out_dir, sigma_path, history_path;
    bool skip_phase6 = false, dump_reference = false;
    std::uint64_t seed = 0;
    bool have_seed = false;
    auto* gen = app.add_subcommand("generate", "generate a network from a config");
    gen->add_option("--config", config_path, "config file")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_flag("--skip-phase6", skip_phase6, "skip edge-correlation matching");
    gen->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { have_seed = true; });
    gen->add_option("--sigma-table", sigma_path, "sigma calibration file");
    gen->add_flag("--dump-reference", dump_reference,
                  "write reference.tsv with the latent coordinates");
    gen->add_option("--history", history_path,
                    "write phase-6 L2 history to this file");

    // measure
    std::string net_dir;
    std::uint32_t n_override = 0;
    auto* mea = app.add_subcommand("measure", "print correlation matrices");
    mea->add_option("--net", net_dir, "network directory")->required();
    mea->add_option("--n", n_override, "explicit actor count");

    // extract
    std::string extract_net, extract_out, sequences_dir;
    bool use_partitions = false;
    double resolution = 1.0;
    std::uint64_t extract_seed = 0;
    auto* ext = app.add_subcommand("extract", "fit a generator config");
    ext->add_option("--net", extract_net, "network directory")->required();
    ext->add_option("--out", extract_out, "output config file")->required();
    ext->add_flag("--partitions", use_partitions,
                  "use communities_<i>.tsv instead of running Louvain");
    ext->add_option("--resolution", resolution, "Louvain resolution");
    ext->add_option("--seed", extract_seed, "seed for Louvain sweeps");
    ext->add_option("--export-sequences", sequences_dir,
                    "write degrees_<i>.tsv / comsizes_<i>.tsv here");

    // diffuse
    std::string diffuse_net, protocol = "OR", seeder = "nsd";
    double pi = 0.1, budget = 0.05;
    std::uint32_t reps = 30, max_steps = 1000000;
    std::uint64_t diffuse_seed = 0;
    std::vector<std::uint32_t> seed_list;
    auto* dif = app.add_subcommand("diffuse", "run cascade simulations");
    dif->add_option("--net", diffuse_net, "network directory")->required();
    dif->add_option("--pi", pi, "activation probability");
    dif->add_option("--protocol", protocol, "AND or OR");
    dif->add_option("--budget", budget, "seed count (>=1) or actor fraction");
    dif->add_option("--seeder", seeder, "nsd | dcd | list");
    dif->add_option("--seed-list", seed_list, "explicit 1-based seed actors");
    dif->add_option("--reps", reps, "repetitions");
    dif->add_option("--seed", diffuse_seed, "rng seed");
    dif->add_option("--max-steps", max_steps, "step cap");

    // calibrate-sigma
    std::uint64_t cal_n = 1000000;
    std::string cal_out = "sigma_table.tsv", cal_grid;
    std::uint32_t cal_reps = 3;
    std::uint64_t cal_seed = 20240601;
    auto* cal = app.add_subcommand("calibrate-sigma", "rebuild the sigma table");
    cal->add_option("--n", cal_n, "calibration size");
    cal->add_option("--out", cal_out, "output file")->required();
    cal->add_option("--reps", cal_reps, "repetitions per grid point");
    cal->add_option("--seed", cal_seed, "rng seed");
    cal->add_option("--grid", cal_grid, "comma-separated sigma grid");

    // bench
    std::vector<std::uint32_t> bench_sizes{1024}, bench_layers{2};
    std::uint32_t bench_reps = 3;
    std::uint64_t bench_seed = 7;
    auto* ben = app.add_subcommand("bench", "timing table");
    ben->add_option("--sizes", bench_sizes, "actor counts");
    ben->add_option("--layers", bench_layers, "layer counts");
    ben->add_option("--reps", bench_reps, "repetitions");
    ben->add_option("--seed", bench_seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_generate(config_path, out_dir, skip_phase6, have_seed,
                                seed, sigma_path, dump_reference, history_path);
        if (mea->parsed()) return cmd_measure(net_dir, n_override);
        if (ext->parsed())
            return cmd_extract(extract_net, extract_out, use_partitions,
                               resolution, extract_seed, sequences_dir);
        if (dif->parsed())
            return cmd_diffuse(diffuse_net, pi, protocol, budget, seeder,
                               seed_list, reps, diffuse_seed, max_steps);
        if (cal->parsed())
            return cmd_calibrate(cal_n, cal_out, cal_reps, cal_seed, cal_grid);
        if (ben->parsed())
            return cmd_bench(bench_sizes, bench_layers, bench_reps, bench_seed);
    } catch (const mln::GenerationError& e) {
        std::cerr << "generation infeasible: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
