#include "barddt/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "barddt/error.hpp"

namespace barddt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Shortest form that still round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
        char tmp[40];
        std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
        if (std::strtod(tmp, nullptr) == v) return tmp;
    }
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t k = 0; k < items.size(); ++k) out += (k ? "," : "") + items[k];
    return out;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
    ConfigFile cfg;
    cfg.source_ = source;
    std::string section;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) continue;
        auto where = [&] { return source + ":" + std::to_string(line) + ": "; };
        if (text.front() == '[') {
            if (text.back() != ']' || !valid_name(trim(text.substr(1, text.size() - 2)))) {
                throw UsageError(where() + "malformed section header '" + text + "'");
            }
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw UsageError(where() + "expected 'key = value', got '" + text + "'");
        const std::string key = trim(text.substr(0, eq));
        if (!valid_name(key)) throw UsageError(where() + "invalid key name '" + key + "'");
        if (section.empty()) throw UsageError(where() + "key '" + key + "' appears before any [section]");
        const std::string path = section + "." + key;
        if (cfg.entries_.count(path)) {
            throw UsageError(where() + "key '" + path + "' repeats line " + std::to_string(cfg.entries_[path].line));
        }
        cfg.entries_[path] = Entry{trim(text.substr(eq + 1)), line};
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    return parse(in, path);
}

void ConfigFile::set(const std::string& key, const std::string& value) { entries_[key] = Entry{value, 0}; }

void ConfigFile::fail(const std::string& key, const std::string& what) const {
    const auto it = entries_.find(key);
    std::string where = source_;
    if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
    throw UsageError(where + ": key '" + key + "': " + what);
}

std::string ConfigFile::get_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) fail(key, "missing");
    return it->second.value;
}

double ConfigFile::get_double(const std::string& key) const {
    const auto s = get_string(key);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected a number, got '" + s + "'");
    return v;
}

long long ConfigFile::get_int(const std::string& key) const {
    const auto s = get_string(key);
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
    return v;
}

std::uint64_t ConfigFile::get_uint64(const std::string& key) const {
    const auto s = get_string(key);
    std::uint64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(key, "expected a non-negative integer, got '" + s + "'");
    return v;
}

std::vector<std::string> ConfigFile::get_list(const std::string& key) const {
    const auto s = get_string(key);
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(key, "empty list item in '" + s + "'");
        out.push_back(item);
    }
    if (out.empty()) fail(key, "empty list");
    return out;
}

void ConfigFile::check_known(const std::vector<std::string>& known, const std::vector<std::string>& free_sections) const {
    for (const auto& [key, entry] : entries_) {
        const auto section = key.substr(0, key.find('.'));
        if (std::find(free_sections.begin(), free_sections.end(), section) != free_sections.end()) continue;
        if (std::find(known.begin(), known.end(), key) == known.end()) fail(key, "unknown key");
    }
}

std::vector<std::string> known_config_keys() {
    return {"run.seed",
            "sampler.num_trees", "sampler.burn_in", "sampler.num_draws", "sampler.thin", "sampler.alpha",
            "sampler.beta", "sampler.cutpoint_grid", "sampler.min_leaf_size", "sampler.sigma_nu",
            "sampler.sigma_quantile", "sampler.sigma_lambda", "sampler.grow_prob", "sampler.prune_prob",
            "leaf.barddt_scale", "leaf.bart_scale",
            "window.delta",
            "dgp.preset", "dgp.n", "dgp.p", "dgp.rho", "dgp.gamma0", "dgp.k1", "dgp.k2", "dgp.k3", "dgp.k4",
            "dgp.k5", "dgp.calibration_seed", "dgp.calibration_size",
            "polynomial.bandwidth", "polynomial.degree_w", "polynomial.degree_x",
            "benchmark.dgps", "benchmark.methods", "benchmark.replications", "benchmark.jobs", "benchmark.n",
            "summary.max_depth", "summary.min_leaf"};
}

void RunConfig::validate() const {
    model.sampler.validate();
    if (!(model.barddt_leaf_scale > 0.0)) throw UsageError("leaf.barddt_scale must be positive");
    if (!(model.bart_leaf_scale > 0.0)) throw UsageError("leaf.bart_scale must be positive");
    if (!(delta > 0.0)) throw UsageError("window.delta must be positive");
    dgp.validate();
    poly.validate();
    if (benchmark.replications < 1) throw UsageError("benchmark.replications must be at least 1");
    if (benchmark.jobs < 1) throw UsageError("benchmark.jobs must be at least 1");
    if (benchmark.methods.empty()) throw UsageError("benchmark.methods is empty");
    if (summary_max_depth < 0) throw UsageError("summary.max_depth must be non-negative");
    if (summary_min_leaf < 1) throw UsageError("summary.min_leaf must be positive");
}

RunConfig run_config_from(const ConfigFile& f) {
    f.check_known(known_config_keys(), {"manifest"});
    RunConfig c;
    auto as_int = [&](const std::string& key, long long lo) {
        const auto v = f.get_int(key);
        if (v < lo) throw UsageError(f.source() + ": key '" + key + "': must be at least " + std::to_string(lo));
        return v;
    };
    if (f.has("run.seed")) c.seed = f.get_uint64("run.seed");

    auto& s = c.model.sampler;
    if (f.has("sampler.num_trees")) s.num_trees = static_cast<int>(as_int("sampler.num_trees", 1));
    if (f.has("sampler.burn_in")) s.burn_in = static_cast<int>(as_int("sampler.burn_in", 0));
    if (f.has("sampler.num_draws")) s.num_draws = static_cast<int>(as_int("sampler.num_draws", 1));
    if (f.has("sampler.thin")) s.thin = static_cast<int>(as_int("sampler.thin", 1));
    if (f.has("sampler.alpha")) s.tree_prior.alpha = f.get_double("sampler.alpha");
    if (f.has("sampler.beta")) s.tree_prior.beta = f.get_double("sampler.beta");
    if (f.has("sampler.cutpoint_grid")) s.tree_prior.cutpoint_grid = static_cast<int>(as_int("sampler.cutpoint_grid", 1));
    if (f.has("sampler.min_leaf_size")) s.tree_prior.min_leaf_size = static_cast<int>(as_int("sampler.min_leaf_size", 1));
    if (f.has("sampler.sigma_nu")) s.sigma_nu = f.get_double("sampler.sigma_nu");
    if (f.has("sampler.sigma_quantile")) s.sigma_quantile = f.get_double("sampler.sigma_quantile");
    if (f.has("sampler.sigma_lambda") && f.get_string("sampler.sigma_lambda") != "auto") {
        s.sigma_lambda = f.get_double("sampler.sigma_lambda");
    }
    if (f.has("sampler.grow_prob")) s.grow_prob = f.get_double("sampler.grow_prob");
    if (f.has("sampler.prune_prob")) s.prune_prob = f.get_double("sampler.prune_prob");
    if (f.has("leaf.barddt_scale")) c.model.barddt_leaf_scale = f.get_double("leaf.barddt_scale");
    if (f.has("leaf.bart_scale")) c.model.bart_leaf_scale = f.get_double("leaf.bart_scale");
    if (f.has("window.delta")) c.delta = f.get_double("window.delta");

    if (f.has("dgp.preset")) {
        c.dgp_preset = f.get_string("dgp.preset");
        if (c.dgp_preset != "custom") {
            try {
                c.dgp = dgp_preset(c.dgp_preset);
            } catch (const Error& e) {
                throw UsageError(f.source() + ": key 'dgp.preset': " + e.what());
            }
        } else {
            c.dgp_preset.clear();
        }
    }
    if (f.has("dgp.n")) c.dgp.n = static_cast<std::size_t>(as_int("dgp.n", 1));
    if (f.has("dgp.p")) c.dgp.p = static_cast<int>(as_int("dgp.p", 1));
    if (f.has("dgp.rho")) c.dgp.rho = f.get_double("dgp.rho");
    if (f.has("dgp.gamma0")) c.dgp.gamma0 = f.get_double("dgp.gamma0");
    if (f.has("dgp.k1")) c.dgp.k1 = f.get_double("dgp.k1");
    if (f.has("dgp.k2")) c.dgp.k2 = f.get_double("dgp.k2");
    if (f.has("dgp.k3")) c.dgp.k3 = f.get_double("dgp.k3");
    if (f.has("dgp.k4")) c.dgp.k4 = f.get_double("dgp.k4");
    if (f.has("dgp.k5")) c.dgp.k5 = f.get_double("dgp.k5");
    if (f.has("dgp.calibration_seed")) {
        c.dgp.seed = f.get_uint64("dgp.calibration_seed");
        c.calibration_seed_set = true;
    }
    if (f.has("dgp.calibration_size")) c.dgp.calibration_size = static_cast<std::size_t>(as_int("dgp.calibration_size", 2));

    if (f.has("polynomial.bandwidth")) c.poly.bandwidth = f.get_double("polynomial.bandwidth");
    if (f.has("polynomial.degree_w")) c.poly.degree_w = static_cast<int>(as_int("polynomial.degree_w", 1));
    if (f.has("polynomial.degree_x")) c.poly.degree_x = static_cast<int>(as_int("polynomial.degree_x", 1));

    if (f.has("benchmark.dgps")) c.benchmark.dgps = f.get_list("benchmark.dgps");
    if (f.has("benchmark.methods")) {
        c.benchmark.methods.clear();
        for (const auto& m : f.get_list("benchmark.methods")) {
            try {
                c.benchmark.methods.push_back(parse_method(m));
            } catch (const Error& e) {
                throw UsageError(f.source() + ": key 'benchmark.methods': " + e.what());
            }
        }
    }
    if (f.has("benchmark.replications")) c.benchmark.replications = static_cast<int>(as_int("benchmark.replications", 1));
    if (f.has("benchmark.jobs")) c.benchmark.jobs = static_cast<int>(as_int("benchmark.jobs", 1));
    if (f.has("benchmark.n") && f.get_string("benchmark.n") != "auto") {
        c.benchmark.n = static_cast<std::size_t>(as_int("benchmark.n", 1));
    }
    if (f.has("summary.max_depth")) c.summary_max_depth = static_cast<int>(as_int("summary.max_depth", 0));
    if (f.has("summary.min_leaf")) c.summary_min_leaf = static_cast<int>(as_int("summary.min_leaf", 1));

    if (!c.calibration_seed_set) c.dgp.seed = mix_seed(c.seed, 0xD6);
    try {
        c.validate();
    } catch (const UsageError&) {
        throw;
    } catch (const Error& e) {
        throw UsageError(f.source() + ": " + e.what());
    }
    return c;
}

std::string render_config(const RunConfig& c) {
    std::ostringstream o;
    const auto& s = c.model.sampler;
    o << "[run]\n"
      << "seed = " << c.seed << "\n\n"
      << "[sampler]\n"
      << "num_trees = " << s.num_trees << '\n'
      << "burn_in = " << s.burn_in << '\n'
      << "num_draws = " << s.num_draws << '\n'
      << "thin = " << s.thin << '\n'
      << "alpha = " << fmt(s.tree_prior.alpha) << '\n'
      << "beta = " << fmt(s.tree_prior.beta) << '\n'
      << "cutpoint_grid = " << s.tree_prior.cutpoint_grid << '\n'
      << "min_leaf_size = " << s.tree_prior.min_leaf_size << '\n'
      << "sigma_nu = " << fmt(s.sigma_nu) << '\n'
      << "sigma_quantile = " << fmt(s.sigma_quantile) << '\n'
      << "sigma_lambda = " << (s.sigma_lambda ? fmt(*s.sigma_lambda) : "auto") << '\n'
      << "grow_prob = " << fmt(s.grow_prob) << '\n'
      << "prune_prob = " << fmt(s.prune_prob) << "\n\n"
      << "[leaf]\n"
      << "barddt_scale = " << fmt(c.model.barddt_leaf_scale) << '\n'
      << "bart_scale = " << fmt(c.model.bart_leaf_scale) << "\n\n"
      << "[window]\n"
      << "delta = " << fmt(c.delta) << "\n\n"
      << "[dgp]\n"
      << "preset = " << (c.dgp_preset.empty() ? "custom" : c.dgp_preset) << '\n'
      << "n = " << c.dgp.n << '\n'
      << "p = " << c.dgp.p << '\n'
      << "rho = " << fmt(c.dgp.rho) << '\n'
      << "gamma0 = " << fmt(c.dgp.gamma0) << '\n'
      << "k1 = " << fmt(c.dgp.k1) << '\n'
      << "k2 = " << fmt(c.dgp.k2) << '\n'
      << "k3 = " << fmt(c.dgp.k3) << '\n'
      << "k4 = " << fmt(c.dgp.k4) << '\n'
      << "k5 = " << fmt(c.dgp.k5) << '\n'
      << "calibration_seed = " << c.dgp.seed << '\n'
      << "calibration_size = " << c.dgp.calibration_size << "\n\n"
      << "[polynomial]\n"
      << "bandwidth = " << fmt(c.poly.bandwidth) << '\n'
      << "degree_w = " << c.poly.degree_w << '\n'
      << "degree_x = " << c.poly.degree_x << "\n\n"
      << "[benchmark]\n"
      << "dgps = " << join(c.benchmark.dgps) << '\n';
    std::vector<std::string> methods;
    for (Method m : c.benchmark.methods) methods.emplace_back(method_name(m));
    o << "methods = " << join(methods) << '\n'
      << "replications = " << c.benchmark.replications << '\n'
      << "jobs = " << c.benchmark.jobs << '\n'
      << "n = " << (c.benchmark.n ? std::to_string(*c.benchmark.n) : "auto") << "\n\n"
      << "[summary]\n"
      << "max_depth = " << c.summary_max_depth << '\n'
      << "min_leaf = " << c.summary_min_leaf << '\n';
    return o.str();
}

BenchmarkConfig benchmark_config(const RunConfig& c) {
    BenchmarkConfig b;
    for (const auto& name : c.benchmark.dgps) {
        NamedDgp d;
        d.name = name;
        if (name == "custom") {
            d.config = c.dgp;
        } else {
            try {
                d.config = dgp_preset(name);
            } catch (const Error& e) {
                throw UsageError(std::string("benchmark.dgps: ") + e.what());
            }
            d.config.gamma0 = c.dgp.gamma0;
            d.config.seed = c.dgp.seed;
            d.config.calibration_size = c.dgp.calibration_size;
            d.config.n = c.dgp.n;
        }
        if (c.benchmark.n) d.config.n = *c.benchmark.n;
        b.dgps.push_back(d);
    }
    b.methods = c.benchmark.methods;
    b.replications = c.benchmark.replications;
    b.jobs = c.benchmark.jobs;
    b.seed = c.seed;
    b.delta = c.delta;
    b.model = c.model;
    b.poly = c.poly;
    return b;
}

}  // namespace barddt
