#include "barddt/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "barddt/error.hpp"

namespace barddt {

double cate_rmse_ratio(const Eigen::Ref<const Eigen::VectorXd>& tau_hat, double tau_hat_ate,
                       const Eigen::Ref<const Eigen::VectorXd>& tau_true) {
    if (tau_hat.size() != tau_true.size()) throw Error("estimate and truth differ in length");
    if (tau_true.size() == 0) throw Error("empty evaluation window");
    const double num = (tau_hat - tau_true).norm();
    const double den = (tau_true.array() - tau_hat_ate).matrix().norm();
    if (!(den > 0.0)) throw Error("degenerate baseline");
    return num / den;
}

double ate_baseline(const CateDraws& draws) {
    if (draws.num_points() == 0) throw Error("empty evaluation window");
    return posterior_mean_cate(draws).mean();
}

void BenchmarkConfig::validate() const {
    if (dgps.empty()) throw Error("benchmark needs at least one DGP");
    if (methods.empty()) throw Error("benchmark needs at least one method");
    if (replications < 1) throw Error("benchmark.replications must be at least 1");
    if (jobs < 1) throw Error("benchmark.jobs must be at least 1");
    for (const auto& d : dgps) d.config.validate();
    model.sampler.validate();
    poly.validate();
}

double BenchmarkResult::mean_ratio(const std::string& dgp, const std::string& method) const {
    double sum = 0.0;
    int count = 0;
    for (const auto& r : rows) {
        if (r.ok && r.dgp == dgp && r.method == method) {
            sum += r.ratio;
            ++count;
        }
    }
    return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t dgp_index, int replication) {
    return mix_seed(mix_seed(master, dgp_index), static_cast<std::uint64_t>(replication));
}

Eigen::VectorXd estimate_cate(Method method, const StandardizedDataset& data, const EvaluationWindow& window,
                              const ModelConfig& model, const PolySpec& poly, CateDraws* barddt_draws) {
    switch (method) {
        case Method::Barddt: {
            auto draws = fit_barddt(data, window, model);
            Eigen::VectorXd mean = posterior_mean_cate(draws);
            if (barddt_draws) *barddt_draws = std::move(draws);
            return mean;
        }
        case Method::TBart: return posterior_mean_cate(fit_tbart(data, window, model));
        case Method::SBart: return posterior_mean_cate(fit_sbart(data, window, model));
        case Method::Polynomial: return poly_fit_cate(data, window, poly);
    }
    throw Error("unknown method");
}

namespace {

struct Task {
    std::size_t dgp_index;
    int replication;
};

std::vector<ReplicationResult> run_replication(const BenchmarkConfig& config, const CalibratedDgp& dgp,
                                               const std::string& name, std::size_t dgp_index, int r) {
    const std::uint64_t seed = replication_seed(config.seed, dgp_index, r);
    std::vector<ReplicationResult> out;
    for (Method m : config.methods) {
        ReplicationResult row;
        row.dgp = name;
        row.replication = r;
        row.seed = seed;
        row.method = std::string(method_name(m));
        out.push_back(row);
    }
    auto fail_all = [&](const std::string& msg) {
        for (auto& row : out) {
            row.ok = false;
            row.error = msg;
        }
        return out;
    };

    StandardizedDataset data;
    EvaluationWindow window;
    Eigen::VectorXd truth;
    try {
        const auto sample = simulate(dgp, dgp.config.n, mix_seed(seed, 0));
        data = standardize(sample.data);
        window = evaluation_window(data, config.delta);
        truth.resize(static_cast<Eigen::Index>(window.size()));
        for (std::size_t k = 0; k < window.size(); ++k) {
            truth[static_cast<Eigen::Index>(k)] = sample.tau[static_cast<Eigen::Index>(window.indices[k])];
        }
    } catch (const std::exception& e) {
        return fail_all(e.what());
    }

    ModelConfig model = config.model;
    // Each method gets its own chain seed so the method list does not change results.
    auto model_for = [&](Method m) {
        ModelConfig mc = model;
        mc.sampler.seed = mix_seed(seed, 1 + static_cast<std::uint64_t>(m));
        return mc;
    };

    Eigen::VectorXd barddt_mean;
    double baseline = 0.0;
    try {
        barddt_mean = estimate_cate(Method::Barddt, data, window, model_for(Method::Barddt), config.poly);
        baseline = barddt_mean.mean();
    } catch (const std::exception& e) {
        return fail_all(std::string("ATE baseline unavailable: ") + e.what());
    }

    for (std::size_t k = 0; k < config.methods.size(); ++k) {
        auto& row = out[k];
        const Method m = config.methods[k];
        row.window_size = window.size();
        row.ate_baseline = baseline;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Eigen::VectorXd est =
                m == Method::Barddt ? barddt_mean : estimate_cate(m, data, window, model_for(m), config.poly);
            row.ratio = cate_rmse_ratio(est, baseline, truth);
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    std::vector<CalibratedDgp> calibrated;
    for (const auto& d : config.dgps) calibrated.push_back(calibrate(d.config));

    std::vector<Task> tasks;
    for (std::size_t d = 0; d < config.dgps.size(); ++d) {
        for (int r = 0; r < config.replications; ++r) tasks.push_back({d, r});
    }
    std::vector<std::vector<ReplicationResult>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks.size(); t = next++) {
            const auto& task = tasks[t];
            slots[t] = run_replication(config, calibrated[task.dgp_index], config.dgps[task.dgp_index].name,
                                       task.dgp_index, task.replication);
        }
    };
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), tasks.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    BenchmarkResult result;
    for (auto& slot : slots) {
        for (auto& row : slot) {
            if (!row.ok) {
                result.warnings.push_back(row.dgp + " replication " + std::to_string(row.replication) + " " +
                                          row.method + " excluded: " + row.error);
            }
            result.rows.push_back(std::move(row));
        }
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

void write_replications_csv(std::ostream& out, const BenchmarkResult& result) {
    out << "dgp,replication,seed,method,window_size,ate_baseline,rmse_ratio,status\n";
    for (const auto& r : result.rows) {
        out << r.dgp << ',' << r.replication << ',' << r.seed << ',' << r.method << ',' << r.window_size << ','
            << (r.ok ? format_double(r.ate_baseline) : "NA") << ',' << (r.ok ? format_double(r.ratio) : "NA") << ','
            << (r.ok ? "ok" : "failed") << '\n';
    }
}

void write_summary_csv(std::ostream& out, const BenchmarkConfig& config, const BenchmarkResult& result) {
    out << "dgp";
    for (Method m : config.methods) out << ',' << method_name(m);
    out << '\n';
    for (const auto& d : config.dgps) {
        out << d.name;
        for (Method m : config.methods) out << ',' << format_double(result.mean_ratio(d.name, std::string(method_name(m))));
        out << '\n';
    }
}

}  // namespace barddt
