#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "barddt/error.hpp"
#include "barddt/evaluation.hpp"
#include "barddt/rng.hpp"

using namespace barddt;

TEST_CASE("ratio identities") {
    Rng rng(1);
    Eigen::VectorXd tau(50), est(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        tau[i] = rng.normal();
        est[i] = tau[i] + 0.3 * rng.normal();
    }
    const double ate = est.mean();
    CHECK(cate_rmse_ratio(tau, ate, tau) == 0.0);
    CHECK(cate_rmse_ratio(Eigen::VectorXd::Constant(50, ate), ate, tau) == 1.0);
    const double r = cate_rmse_ratio(est, ate, tau);
    const double direct = (est - tau).norm() / (Eigen::VectorXd::Constant(50, ate) - tau).norm();
    CHECK(r == doctest::Approx(direct).epsilon(1e-14));
    for (double c : {0.001, 3.0, 1e6}) {
        CHECK(cate_rmse_ratio(c * est, c * ate, c * tau) == doctest::Approx(r).epsilon(1e-12));
    }
    CHECK_THROWS_WITH_AS(cate_rmse_ratio(est, 2.0, Eigen::VectorXd::Constant(50, 2.0)),
                         doctest::Contains("degenerate baseline"), Error);
    CHECK_THROWS_AS(cate_rmse_ratio(est.head(3), ate, tau), Error);
}

TEST_CASE("ate baseline averages the posterior mean") {
    CateDraws d;
    d.draws = (Eigen::MatrixXd(2, 3) << 1, 2, 3, 3, 4, 5).finished();
    d.window = {0, 1, 2};
    CHECK(ate_baseline(d) == doctest::Approx(3.0));
}

TEST_CASE("replication seeds are distinct") {
    std::set<std::uint64_t> seen;
    for (std::size_t d = 0; d < 6; ++d) {
        for (int r = 0; r < 50; ++r) seen.insert(replication_seed(7, d, r));
    }
    CHECK(seen.size() == 300);
    CHECK(replication_seed(7, 1, 2) == replication_seed(7, 1, 2));
}

TEST_CASE("small benchmark is reproducible across job counts") {
    BenchmarkConfig cfg;
    auto dgp = dgp_preset("easy1");
    dgp.n = 400;
    dgp.calibration_size = 20000;
    cfg.dgps = {{"easy1", dgp}};
    cfg.methods = {Method::Barddt, Method::TBart, Method::SBart, Method::Polynomial};
    cfg.replications = 2;
    cfg.seed = 3;
    cfg.model.sampler.num_trees = 10;
    cfg.model.sampler.burn_in = 20;
    cfg.model.sampler.num_draws = 20;
    cfg.jobs = 1;
    const auto a = run_benchmark(cfg);
    cfg.jobs = 3;
    const auto b = run_benchmark(cfg);
    REQUIRE(a.rows.size() == 8);
    REQUIRE(b.rows.size() == 8);
    std::ostringstream sa, sb;
    write_replications_csv(sa, a);
    write_replications_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().rfind("dgp,replication,seed,method,window_size,ate_baseline,rmse_ratio,status\n", 0) == 0);
    for (const auto& row : a.rows) {
        CHECK(row.ok);
        CHECK(std::isfinite(row.ratio));
    }
    std::ostringstream summary;
    write_summary_csv(summary, cfg, a);
    CHECK(summary.str().rfind("dgp,barddt,tbart,sbart,polynomial\n", 0) == 0);
}
