#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barddt/dgp.hpp"
#include "barddt/models.hpp"
#include "barddt/polynomial.hpp"

namespace barddt {

// ||tau_hat - tau|| / ||tau_hat_ate - tau||
double cate_rmse_ratio(const Eigen::Ref<const Eigen::VectorXd>& tau_hat, double tau_hat_ate,
                       const Eigen::Ref<const Eigen::VectorXd>& tau_true);

// Window average of the posterior-mean CATE.
double ate_baseline(const CateDraws& draws);

struct NamedDgp {
    std::string name;
    DgpConfig config;
};

struct BenchmarkConfig {
    std::vector<NamedDgp> dgps;
    std::vector<Method> methods;
    int replications = 10;
    int jobs = 1;
    std::uint64_t seed = 1;
    double delta = 0.1;
    ModelConfig model;
    PolySpec poly;

    void validate() const;
};

struct ReplicationResult {
    std::string dgp;
    int replication = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::size_t window_size = 0;
    double ate_baseline = 0.0;
    double ratio = 0.0;
    bool ok = true;
    std::string error;
    double seconds = 0.0;  // wall clock, reported in the manifest only
};

struct BenchmarkResult {
    std::vector<ReplicationResult> rows;  // sorted by dgp order, replication, method order
    std::vector<std::string> warnings;
    double seconds = 0.0;

    // Mean ratio over successful replications; NaN when none succeeded.
    double mean_ratio(const std::string& dgp, const std::string& method) const;
};

// Seed for replication r of DGP d.
std::uint64_t replication_seed(std::uint64_t master, std::size_t dgp_index, int replication);

// Posterior-mean (or point) CATE for one method on one dataset.
Eigen::VectorXd estimate_cate(Method method, const StandardizedDataset& data, const EvaluationWindow& window,
                              const ModelConfig& model, const PolySpec& poly, CateDraws* barddt_draws = nullptr);

BenchmarkResult run_benchmark(const BenchmarkConfig& config);

void write_replications_csv(std::ostream& out, const BenchmarkResult& result);
// One row per DGP, one column per method.
void write_summary_csv(std::ostream& out, const BenchmarkConfig& config, const BenchmarkResult& result);

}  // namespace barddt
