// barddt command line: simulate, fit, benchmark, summarize, replay.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "barddt/config.hpp"
#include "barddt/data.hpp"
#include "barddt/dgp.hpp"
#include "barddt/draws_io.hpp"
#include "barddt/error.hpp"
#include "barddt/evaluation.hpp"
#include "barddt/manifest.hpp"
#include "barddt/models.hpp"
#include "barddt/polynomial.hpp"
#include "barddt/summary.hpp"

namespace fs = std::filesystem;
using namespace barddt;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

struct SimulateOpts {
    std::optional<std::string> preset;
    std::optional<std::size_t> n;
};

struct FitOpts {
    std::string data;
    std::string y;
    std::string x;
    std::string w;
    std::string z;
    double cutoff = 0.0;
    std::string method = "barddt";
    bool save_forest = false;
};

struct BenchmarkOpts {
    std::optional<std::string> presets;
    std::optional<std::string> methods;
    std::optional<int> replications;
    std::optional<int> jobs;
    std::optional<std::size_t> n;
};

struct SummarizeOpts {
    std::string draws;
    std::string data;
    std::string w;
    std::optional<int> max_depth;
    std::optional<int> min_leaf;
    std::optional<int> group_a;
    std::optional<int> group_b;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt(double v) { return format_exact(v); }

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

ConfigFile load_config(const Common& c) {
    if (c.config.empty()) return ConfigFile{};
    return ConfigFile::load(c.config);
}

RunConfig finish_config(ConfigFile file, const Common& c) {
    if (c.seed) file.set("run.seed", std::to_string(*c.seed));
    return run_config_from(file);
}

fs::path prepare_out(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    return f;
}

void record_output(RunManifest& m, const fs::path& path) {
    m.outputs.emplace_back(path.filename().string(), sha256_file(path.string()));
}

// Empirical quantile, linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---- simulate ----

int run_simulate(const Common& common, const SimulateOpts& opts) {
    auto file = load_config(common);
    if (opts.preset) file.set("dgp.preset", *opts.preset);
    if (opts.n) file.set("dgp.n", std::to_string(*opts.n));
    const auto config = finish_config(std::move(file), common);
    const auto start = Clock::now();

    const auto dgp = calibrate(config.dgp);
    const double calibration_seconds = since(start);
    const std::uint64_t sim_seed = mix_seed(config.seed, 1);
    const auto sample = simulate(dgp, config.dgp.n, sim_seed);
    const auto standardized = standardize(sample.data);

    const auto dir = prepare_out(common.out);
    const auto data_path = dir / "data.csv";
    const auto truth_path = dir / "truth.csv";
    {
        auto f = open_out(data_path);
        f << "y,x,z";
        for (int k = 0; k < config.dgp.p; ++k) f << ",w" << k + 1;
        f << '\n';
        const auto& d = sample.data;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            f << fmt(d.y[ii]) << ',' << fmt(d.x[ii]) << ',' << int(d.z[i]);
            for (Eigen::Index k = 0; k < d.w.cols(); ++k) f << ',' << fmt(d.w(ii, k));
            f << '\n';
        }
    }
    {
        auto f = open_out(truth_path);
        f << "row,mu,tau,eps,in_window\n";
        for (std::size_t i = 0; i < sample.data.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const bool in_window = std::abs(standardized.inner.x[ii]) <= config.delta;
            f << i + 1 << ',' << fmt(sample.mu[ii]) << ',' << fmt(sample.tau[ii]) << ',' << fmt(sample.eps[ii]) << ','
              << (in_window ? 1 : 0) << '\n';
        }
    }

    RunManifest m;
    m.command = "simulate";
    m.facts = {{"simulation_seed", std::to_string(sim_seed)},
               {"nu", fmt(dgp.nu)},
               {"mu_scale", fmt(dgp.mu_scale)},
               {"tau_scale", fmt(dgp.tau_scale)},
               {"tau_center", fmt(dgp.tau_center)}};
    for (int k = 0; k < config.dgp.p; ++k) m.facts.emplace_back("gamma_" + std::to_string(k + 1), fmt(dgp.gamma[k]));
    record_output(m, data_path);
    record_output(m, truth_path);
    m.timings = {{"calibration", calibration_seconds}, {"total", since(start)}};
    write_manifest((dir / "manifest.txt").string(), config, m);
    std::cout << "wrote " << sample.data.size() << " rows to " << data_path.string() << '\n';
    return 0;
}

// ---- fit ----

int run_fit(const Common& common, const FitOpts& opts) {
    const auto config = finish_config(load_config(common), common);
    const Method method = [&] {
        try {
            return parse_method(opts.method);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }();
    ColumnMap cols;
    cols.y = opts.y;
    cols.x = opts.x;
    cols.w = split_list(opts.w);
    if (cols.w.empty()) throw UsageError("--w needs at least one moderator column");
    if (!opts.z.empty()) cols.z = opts.z;
    cols.cutoff = opts.cutoff;

    const auto start = Clock::now();
    const auto raw = load_csv(opts.data, cols);
    const auto data = standardize(raw);
    const auto window = evaluation_window(data, config.delta);

    const auto dir = prepare_out(common.out);
    const auto forest_path = dir / "forests.txt";
    std::ofstream forest_file;
    ModelConfig model = config.model;
    model.sampler.seed = config.seed;
    if (opts.save_forest) {
        if (method != Method::Barddt) throw UsageError("--save-forest is only available for --method barddt");
        forest_file = open_out(forest_path);
        forest_file.precision(17);
        model.on_barddt_draw = [&](std::size_t h, const Sampler& s) { write_forest(forest_file, h, s.forest()); };
    }

    CateDraws draws;
    switch (method) {
        case Method::Barddt: draws = fit_barddt(data, window, model); break;
        case Method::TBart: draws = fit_tbart(data, window, model); break;
        case Method::SBart: draws = fit_sbart(data, window, model); break;
        case Method::Polynomial: {
            draws.method = "polynomial";
            draws.window = window.indices;
            draws.draws = poly_fit_cate(data, window, config.poly).transpose();
            break;
        }
    }
    const double fit_seconds = since(start);
    if (forest_file.is_open()) forest_file.close();

    const auto draws_path = dir / "draws.csv";
    const auto mean_path = dir / "posterior_mean.csv";
    {
        auto f = open_out(draws_path);
        write_draws_csv(f, draws);
    }
    {
        auto f = open_out(mean_path);
        f << "row";
        for (const auto& name : raw.w_names) f << ',' << name;
        f << ",tau_mean,tau_sd,tau_q05,tau_q95\n";
        for (std::size_t k = 0; k < draws.num_points(); ++k) {
            const auto col = draws.draws.col(static_cast<Eigen::Index>(k));
            std::vector<double> v(col.data(), col.data() + col.size());
            const double mean = col.mean();
            const double sd = v.size() > 1 ? sample_sd(col) : 0.0;
            const auto row = static_cast<Eigen::Index>(draws.window[k]);
            f << draws.window[k] + 1;
            for (Eigen::Index c = 0; c < raw.w.cols(); ++c) f << ',' << fmt(raw.w(row, c));
            f << ',' << fmt(mean) << ',' << fmt(sd) << ',' << fmt(quantile(v, 0.05)) << ',' << fmt(quantile(v, 0.95))
              << '\n';
        }
    }

    RunManifest m;
    m.command = "fit";
    m.args = {{"data", absolute(opts.data)}, {"y", opts.y}, {"x", opts.x}, {"w", opts.w},
              {"cutoff", fmt(opts.cutoff)}, {"method", opts.method}};
    if (!opts.z.empty()) m.args.emplace_back("z", opts.z);
    if (opts.save_forest) m.args.emplace_back("save_forest", "true");
    m.facts = {{"chain_seed", std::to_string(model.sampler.seed)},
               {"window_size", std::to_string(window.size())},
               {"y_shift", fmt(data.y_shift)},
               {"y_scale", fmt(data.y_scale)},
               {"x_shift", fmt(data.x_shift)},
               {"x_scale", fmt(data.x_scale)}};
    if (method != Method::Polynomial) {
        m.facts.emplace_back("grow_accepted", std::to_string(draws.moves.grow_accepted));
        m.facts.emplace_back("grow_proposed", std::to_string(draws.moves.grow_proposed));
        m.facts.emplace_back("prune_accepted", std::to_string(draws.moves.prune_accepted));
        m.facts.emplace_back("prune_proposed", std::to_string(draws.moves.prune_proposed));
    } else {
        m.facts.emplace_back("polynomial_columns", "1,x^q,z,x*z,w_j^q,w_j^q*x,w_j^q*z,w_j^q*x*z");
    }
    m.inputs.emplace_back(fs::path(opts.data).filename().string(), sha256_file(opts.data));
    record_output(m, draws_path);
    record_output(m, mean_path);
    if (opts.save_forest) record_output(m, forest_path);
    m.timings = {{"fit", fit_seconds}, {"total", since(start)}};
    write_manifest((dir / "manifest.txt").string(), config, m);

    std::printf("%s: %zu draws x %zu window points, window-mean CATE %.6g\n", draws.method.c_str(), draws.num_draws(),
                draws.num_points(), draws.draws.mean());
    return 0;
}

// ---- benchmark ----

int run_benchmark_cmd(const Common& common, const BenchmarkOpts& opts) {
    auto file = load_config(common);
    if (opts.presets) file.set("benchmark.dgps", *opts.presets);
    if (opts.methods) file.set("benchmark.methods", *opts.methods);
    if (opts.replications) file.set("benchmark.replications", std::to_string(*opts.replications));
    if (opts.jobs) file.set("benchmark.jobs", std::to_string(*opts.jobs));
    if (opts.n) file.set("benchmark.n", std::to_string(*opts.n));
    const auto config = finish_config(std::move(file), common);
    const auto bench = benchmark_config(config);

    const auto result = run_benchmark(bench);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';

    const auto dir = prepare_out(common.out);
    const auto rep_path = dir / "replications.csv";
    const auto sum_path = dir / "summary.csv";
    {
        auto f = open_out(rep_path);
        write_replications_csv(f, result);
    }
    {
        auto f = open_out(sum_path);
        write_summary_csv(f, bench, result);
    }
    RunManifest m;
    m.command = "benchmark";
    m.facts.emplace_back("ate_baseline", "window mean of the barddt posterior-mean cate");
    m.facts.emplace_back("excluded_replications", std::to_string(result.warnings.size()));
    for (std::size_t d = 0; d < bench.dgps.size(); ++d) {
        const auto& g = bench.dgps[d];
        char buf[200];
        std::snprintf(buf, sizeof buf, "k1=%g k2=%g k3=%g k4=%g k5=%g p=%d rho=%g gamma0=%g n=%zu", g.config.k1,
                      g.config.k2, g.config.k3, g.config.k4, g.config.k5, g.config.p, g.config.rho, g.config.gamma0,
                      g.config.n);
        m.facts.emplace_back("dgp_" + g.name, buf);
    }
    record_output(m, rep_path);
    record_output(m, sum_path);
    double method_seconds = 0.0;
    for (const auto& r : result.rows) method_seconds += r.seconds;
    m.timings = {{"methods_total", method_seconds}, {"total", result.seconds}};
    write_manifest((dir / "manifest.txt").string(), config, m);

    std::ifstream summary(sum_path);
    std::cout << summary.rdbuf();
    return 0;
}

// ---- summarize ----

int run_summarize(const Common& common, const SummarizeOpts& opts) {
    auto file = load_config(common);
    if (opts.max_depth) file.set("summary.max_depth", std::to_string(*opts.max_depth));
    if (opts.min_leaf) file.set("summary.min_leaf", std::to_string(*opts.min_leaf));
    const auto config = finish_config(std::move(file), common);
    const auto start = Clock::now();

    const auto draws = read_draws_csv(opts.draws);
    const auto names = split_list(opts.w);
    if (names.empty()) throw UsageError("--w needs at least one moderator column");
    const auto table = read_csv(opts.data);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(draws.num_points()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto col = table.numeric_column(names[j]);
        for (std::size_t k = 0; k < draws.num_points(); ++k) {
            const auto row = draws.window[k];
            if (row >= static_cast<std::size_t>(col.size())) {
                throw Error("draws refer to data row " + std::to_string(row + 1) + " but '" + opts.data + "' has " +
                            std::to_string(col.size()) + " rows");
            }
            w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = col[static_cast<Eigen::Index>(row)];
        }
    }
    const Eigen::VectorXd tau_bar = posterior_mean_cate(draws);
    const auto tree = fit_moderation_tree(w, tau_bar, config.summary_max_depth, config.summary_min_leaf);
    const auto leaves = tree.leaves();

    const auto dir = prepare_out(common.out);
    const auto tree_path = dir / "moderation_tree.txt";
    const auto member_path = dir / "leaf_membership.csv";
    const auto group_path = dir / "subgroups.csv";
    const auto contrast_path = dir / "contrast.csv";
    {
        auto f = open_out(tree_path);
        f << tree.to_text(names);
    }
    {
        auto f = open_out(member_path);
        f << "row,leaf,tau_mean\n";
        for (std::size_t k = 0; k < draws.num_points(); ++k) {
            f << draws.window[k] + 1 << ',' << tree.leaf_of(w.row(static_cast<Eigen::Index>(k))) << ','
              << fmt(tau_bar[static_cast<Eigen::Index>(k)]) << '\n';
        }
    }
    std::map<int, SubgroupPosterior> groups;
    {
        auto f = open_out(group_path);
        f << "leaf,n,posterior_mean,posterior_sd,q05,q95\n";
        for (int id : leaves) {
            const auto g = subgroup_posterior(draws, tree.nodes[static_cast<std::size_t>(id)].members);
            std::vector<double> v(g.draws.data(), g.draws.data() + g.draws.size());
            f << id << ',' << g.group.size() << ',' << fmt(g.draws.mean()) << ','
              << fmt(v.size() > 1 ? sample_sd(g.draws) : 0.0) << ',' << fmt(quantile(v, 0.05)) << ','
              << fmt(quantile(v, 0.95)) << '\n';
            groups.emplace(id, g);
        }
    }

    // Default contrast: lowest against highest leaf.
    int a = leaves.front();
    int b = leaves.front();
    for (int id : leaves) {
        if (tree.nodes[static_cast<std::size_t>(id)].value < tree.nodes[static_cast<std::size_t>(a)].value) a = id;
        if (tree.nodes[static_cast<std::size_t>(id)].value > tree.nodes[static_cast<std::size_t>(b)].value) b = id;
    }
    if (opts.group_a) a = *opts.group_a;
    if (opts.group_b) b = *opts.group_b;
    for (int id : {a, b}) {
        if (!groups.count(id)) throw UsageError("leaf " + std::to_string(id) + " is not a leaf of the moderation tree");
    }
    const auto contrast = subgroup_contrast(groups.at(a), groups.at(b));
    {
        auto f = open_out(contrast_path);
        write_contrast_csv(f, contrast);
    }

    RunManifest m;
    m.command = "summarize";
    m.args = {{"draws", absolute(opts.draws)}, {"data", absolute(opts.data)}, {"w", opts.w},
              {"group_a", std::to_string(a)}, {"group_b", std::to_string(b)}};
    m.facts = {{"prob_b_greater", fmt(contrast.prob_b_greater)}, {"leaves", std::to_string(leaves.size())}};
    m.inputs.emplace_back(fs::path(opts.draws).filename().string(), sha256_file(opts.draws));
    m.inputs.emplace_back(fs::path(opts.data).filename().string(), sha256_file(opts.data));
    for (const auto& p : {tree_path, member_path, group_path, contrast_path}) record_output(m, p);
    m.timings = {{"total", since(start)}};
    write_manifest((dir / "manifest.txt").string(), config, m);

    std::cout << tree.to_text(names);
    std::printf("Pr(leaf %d > leaf %d) = %.4f\n", b, a, contrast.prob_b_greater);
    return 0;
}

int dispatch(int argc, char** argv);

// ---- replay ----

int run_replay(const std::string& manifest_path, const std::string& out) {
    const auto file = ConfigFile::load(manifest_path);
    const auto m = read_manifest(file);
    std::vector<std::string> args{"barddt", m.command, "--config", manifest_path, "--out", out};
    for (const auto& [k, v] : m.args) {
        std::string flag = "--" + k;
        std::replace(flag.begin(), flag.end(), '_', '-');
        args.push_back(flag);
        if (k != "save_forest") args.push_back(v);
    }
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    const int rc = dispatch(static_cast<int>(argv.size()), argv.data());
    if (rc != 0) return rc;

    int mismatches = 0;
    for (const auto& [name, digest] : m.outputs) {
        // Output keys were sanitized; find the file by its sanitized name.
        std::string found;
        for (const auto& entry : fs::directory_iterator(out)) {
            if (manifest_key(entry.path().filename().string()) == name) found = entry.path().string();
        }
        const bool ok = !found.empty() && sha256_file(found) == digest;
        std::printf("%s %s\n", ok ? "match" : "MISMATCH", name.c_str());
        if (!ok) ++mismatches;
    }
    if (mismatches) throw Error(std::to_string(mismatches) + " output(s) differ from the manifest");
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Regression discontinuity CATE estimation with leaf-regression BART"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", common.config, "Config file (key = value under [section] headers)");
        if (with_seed) sub->add_option("--seed", common.seed, "Master seed; controls all randomness");
        sub->add_option("--out", common.out, "Output directory")->required();
    };

    SimulateOpts sim;
    auto* s = app.add_subcommand("simulate", "Draw a dataset from a calibrated design");
    add_common(s, true);
    s->add_option("--preset", sim.preset, "easy1..easy3, hard1..hard3");
    s->add_option("--n", sim.n, "Sample size");

    FitOpts fit;
    auto* f = app.add_subcommand("fit", "Fit one method and write CATE draws");
    add_common(f, true);
    f->add_option("--data", fit.data, "Input CSV")->required();
    f->add_option("--y", fit.y, "Outcome column")->required();
    f->add_option("--x", fit.x, "Running variable column")->required();
    f->add_option("--w", fit.w, "Comma separated moderator columns")->required();
    f->add_option("--z", fit.z, "Treatment column, checked against the cutoff rule");
    f->add_option("--cutoff", fit.cutoff, "Cutoff on the running variable");
    f->add_option("--method", fit.method, "barddt, tbart, sbart or polynomial");
    f->add_flag("--save-forest", fit.save_forest, "Also write every retained forest");

    BenchmarkOpts bench;
    auto* b = app.add_subcommand("benchmark", "Replicated simulation study");
    add_common(b, true);
    b->add_option("--presets", bench.presets, "Comma separated DGP names");
    b->add_option("--methods", bench.methods, "Comma separated methods");
    b->add_option("--replications", bench.replications, "Replications per DGP");
    b->add_option("--jobs", bench.jobs, "Parallel replications");
    b->add_option("--n", bench.n, "Sample size per replication");

    SummarizeOpts sum;
    auto* u = app.add_subcommand("summarize", "Moderation tree and subgroup posteriors from saved draws");
    add_common(u, false);
    u->add_option("--draws", sum.draws, "draws.csv from fit")->required();
    u->add_option("--data", sum.data, "The CSV the draws were fit on")->required();
    u->add_option("--w", sum.w, "Comma separated moderator columns")->required();
    u->add_option("--max-depth", sum.max_depth, "Moderation tree depth");
    u->add_option("--min-leaf", sum.min_leaf, "Moderation tree minimum leaf size");
    u->add_option("--group-a", sum.group_a, "Leaf id of group A");
    u->add_option("--group-b", sum.group_b, "Leaf id of group B");

    std::string manifest;
    std::string replay_out;
    auto* r = app.add_subcommand("replay", "Re-run an output directory from its manifest and compare digests");
    r->add_option("--manifest", manifest, "manifest.txt")->required();
    r->add_option("--out", replay_out, "Fresh output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "usage error: " << msg << '\n';
        return 2;
    }

    if (s->parsed()) return run_simulate(common, sim);
    if (f->parsed()) return run_fit(common, fit);
    if (b->parsed()) return run_benchmark_cmd(common, bench);
    if (u->parsed()) return run_summarize(common, sum);
    return run_replay(manifest, replay_out);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const UsageError& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "usage error: " << msg << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        std::cerr << "error: " << msg << '\n';
        return 1;
    }
}
