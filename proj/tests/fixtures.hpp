#pragma once

#include "barddt/data.hpp"
#include "barddt/rng.hpp"
#include "barddt/sampler.hpp"

namespace fixture {

// y = 1 + slope * x + jump * z + sigma * eps, x ~ N(0, 1), w ~ N(0, I_p), cutoff 0.
inline barddt::RddDataset jump(std::size_t n, std::uint64_t seed, double sigma, double jump = 2.0, double slope = 1.0,
                               int p = 2) {
    barddt::Rng rng(seed);
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd x(nn), y(nn);
    Eigen::MatrixXd w(nn, p);
    for (Eigen::Index i = 0; i < nn; ++i) {
        x[i] = rng.normal();
        for (int k = 0; k < p; ++k) w(i, k) = rng.normal();
        y[i] = 1.0 + slope * x[i] + (x[i] > 0.0 ? jump : 0.0) + sigma * rng.normal();
    }
    return barddt::RddDataset::create(std::move(y), std::move(x), std::move(w), 0.0);
}

inline barddt::SamplerConfig short_chain(std::uint64_t seed, int burn = 300, int draws = 300) {
    barddt::SamplerConfig c;
    c.burn_in = burn;
    c.num_draws = draws;
    c.seed = seed;
    return c;
}

}  // namespace fixture
