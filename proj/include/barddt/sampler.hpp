#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "barddt/leaf_model.hpp"
#include "barddt/rng.hpp"
#include "barddt/tree.hpp"

namespace barddt {

// What one forest is fit to. Splits use `features`; leaf regressions use the
// basis evaluated at (x, z). y is already on the sampling (standardized) scale.
struct TrainingSet {
    LeafBasis basis = LeafBasis::Rdd;
    std::vector<double> y;
    std::vector<double> x;
    std::vector<std::uint8_t> z;
    std::vector<std::vector<double>> features;  // features[f][i]

    std::size_t size() const { return y.size(); }
    std::size_t num_features() const { return features.size(); }
    void validate() const;
};

struct SamplerConfig {
    int num_trees = 50;
    int burn_in = 1000;
    int num_draws = 1000;
    int thin = 1;
    TreePrior tree_prior;
    // Sigma0 = (leaf_scale / num_trees) * I.
    double leaf_scale = 0.033;
    // Inverse-gamma(nu / 2, nu * lambda / 2) prior on sigma^2; lambda is set
    // so that P(sigma^2 < var(y)) = sigma_quantile unless given explicitly.
    double sigma_nu = 3.0;
    double sigma_quantile = 0.9;
    std::optional<double> sigma_lambda;
    // Holds sigma^2 fixed instead of sampling it.
    std::optional<double> fixed_sigma2;
    double grow_prob = 0.5;
    double prune_prob = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

struct MoveCounts {
    std::uint64_t grow_proposed = 0;
    std::uint64_t grow_accepted = 0;
    std::uint64_t prune_proposed = 0;
    std::uint64_t prune_accepted = 0;
};

// lambda for the sigma^2 prior given the outcome variance.
double calibrate_sigma_lambda(double nu, double quantile, double y_variance);

class Sampler {
public:
    Sampler(const TrainingSet& data, const SamplerConfig& config);

    // One full Gibbs iteration: every tree in turn, then sigma^2.
    void sweep();

    // Structure proposal plus leaf redraw for tree j. Returns true on accept.
    bool tree_move(std::size_t j);

    // y - sum of all trees except j.
    std::vector<double> partial_residual(std::size_t j) const;

    double draw_sigma2();

    const std::vector<Tree>& forest() const { return forest_; }
    double sigma2() const { return sigma2_; }
    const std::vector<double>& fit() const { return fit_; }
    const MoveCounts& move_counts() const { return counts_; }
    const LeafPrior& leaf_prior() const { return leaf_prior_; }
    double sigma_lambda() const { return lambda_; }
    std::uint64_t sweeps_done() const { return sweeps_; }
    Rng& rng() { return rng_; }

    // Largest |cached fit - recomputed sum of tree predictions|.
    double fit_cache_error() const;

private:
    double tree_value(std::size_t j, std::size_t i) const;
    bool propose_grow(std::size_t j, const std::vector<double>& r);
    bool propose_prune(std::size_t j, const std::vector<double>& r);
    void redraw_leaves(std::size_t j, const std::vector<double>& r);
    bool splittable(const std::vector<std::size_t>& rows) const;
    double log_leaf_prior_terminal(int depth, bool can_split) const;

    const TrainingSet& data_;
    SamplerConfig config_;
    LeafPrior leaf_prior_;
    Rng rng_;
    double lambda_ = 1.0;
    double sigma2_ = 1.0;
    std::vector<Tree> forest_;
    std::vector<std::vector<int>> leaf_of_;  // leaf_of_[j][i]
    std::vector<double> fit_;
    MoveCounts counts_;
    std::uint64_t sweeps_ = 0;

    std::vector<std::size_t> rows_;
    std::vector<std::size_t> left_rows_;
    std::vector<std::size_t> right_rows_;
    std::vector<double> values_;
    std::vector<LeafSufficientStats> leaf_stats_;
};

struct PosteriorDraws {
    std::vector<double> sigma2;  // sampling scale
    MoveCounts moves;
    double sigma_lambda = 0.0;
};

// Called after each retained sweep with the zero-based draw index.
using DrawVisitor = std::function<void(std::size_t, const Sampler&)>;

// burn_in + num_draws * thin sweeps; `visit` sees every retained state.
PosteriorDraws run_chain(const TrainingSet& data, const SamplerConfig& config, const DrawVisitor& visit);

}  // namespace barddt
