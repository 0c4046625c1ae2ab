#include "barddt/sampler.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "barddt/error.hpp"

namespace barddt {

void TrainingSet::validate() const {
    const auto n = y.size();
    if (n == 0) throw Error("training set is empty");
    if (x.size() != n || z.size() != n) throw Error("training set columns differ in length");
    if (features.empty()) throw Error("training set has no split features");
    for (const auto& f : features) {
        if (f.size() != n) throw Error("training set feature column differs in length");
    }
}

void SamplerConfig::validate() const {
    if (num_trees < 1) throw Error("num_trees must be at least 1");
    if (num_draws < 1) throw Error("num_draws must be at least 1");
    if (burn_in < 0) throw Error("burn_in must be non-negative");
    if (thin < 1) throw Error("thin must be at least 1");
    tree_prior.validate();
    if (!(leaf_scale > 0.0)) throw Error("leaf_scale must be positive");
    if (!(sigma_nu > 0.0)) throw Error("sigma_nu must be positive");
    if (!(sigma_quantile > 0.0 && sigma_quantile < 1.0)) throw Error("sigma_quantile must lie in (0, 1)");
    if (sigma_lambda && !(*sigma_lambda > 0.0)) throw Error("sigma_lambda must be positive");
    if (fixed_sigma2 && !(*fixed_sigma2 > 0.0)) throw Error("fixed sigma2 must be positive");
    if (!(grow_prob > 0.0 && grow_prob < 1.0) || !(prune_prob > 0.0 && prune_prob < 1.0) ||
        grow_prob + prune_prob > 1.0 + 1e-12) {
        throw Error("grow/prune probabilities must lie in (0, 1) and sum to at most 1");
    }
}

double calibrate_sigma_lambda(double nu, double quantile, double y_variance) {
    // sigma^2 ~ nu * lambda / chi2_nu, so P(sigma^2 < v) = P(chi2_nu > nu * lambda / v).
    const boost::math::chi_squared chi2(nu);
    const double v = y_variance > 0.0 ? y_variance : 1.0;
    return v * boost::math::quantile(chi2, 1.0 - quantile) / nu;
}

Sampler::Sampler(const TrainingSet& data, const SamplerConfig& config)
    : data_(data),
      config_(config),
      leaf_prior_(LeafPrior::isotropic(basis_dim(data.basis), config.leaf_scale, config.num_trees)),
      rng_(config.seed) {
    data_.validate();
    config_.validate();
    const auto n = data_.size();
    if (n <= static_cast<std::size_t>(config_.tree_prior.min_leaf_size)) {
        throw Error("need more observations (" + std::to_string(n) + ") than the minimum leaf size (" +
                    std::to_string(config_.tree_prior.min_leaf_size) + ")");
    }

    double mean = 0.0;
    for (double v : data_.y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : data_.y) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;

    lambda_ = config_.sigma_lambda ? *config_.sigma_lambda
                                   : calibrate_sigma_lambda(config_.sigma_nu, config_.sigma_quantile, var);
    sigma2_ = config_.fixed_sigma2 ? *config_.fixed_sigma2 : (var > 0.0 ? var : 1.0);

    const int dim = basis_dim(data_.basis);
    forest_.assign(static_cast<std::size_t>(config_.num_trees), Tree(dim));
    leaf_of_.assign(static_cast<std::size_t>(config_.num_trees), std::vector<int>(n, Tree::kRoot));
    fit_.assign(n, 0.0);
}

double Sampler::tree_value(std::size_t j, std::size_t i) const {
    const auto& gamma = forest_[j].node(leaf_of_[j][i]).gamma;
    return basis_dot(data_.basis, gamma, data_.x[i], data_.z[i]);
}

std::vector<double> Sampler::partial_residual(std::size_t j) const {
    const auto n = data_.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = data_.y[i] - fit_[i] + tree_value(j, i);
    return r;
}

double Sampler::fit_cache_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < forest_.size(); ++j) {
            const int leaf = [&] {
                int id = Tree::kRoot;
                while (!forest_[j].node(id).is_leaf()) {
                    const auto& nd = forest_[j].node(id);
                    const double v = data_.features[static_cast<std::size_t>(nd.rule.feature)][i];
                    id = v <= nd.rule.threshold ? nd.left : nd.right;
                }
                return id;
            }();
            total += basis_dot(data_.basis, forest_[j].node(leaf).gamma, data_.x[i], data_.z[i]);
        }
        worst = std::max(worst, std::abs(total - fit_[i]));
    }
    return worst;
}

bool Sampler::splittable(const std::vector<std::size_t>& rows) const {
    if (rows.size() < 2) return false;
    for (const auto& col : data_.features) {
        const double first = col[rows.front()];
        for (std::size_t k = 1; k < rows.size(); ++k) {
            if (col[rows[k]] != first) return true;
        }
    }
    return false;
}

// log prior factor of a node left terminal: 1 - p(d) if it could split, else 1.
double Sampler::log_leaf_prior_terminal(int depth, bool can_split) const {
    return can_split ? std::log1p(-split_prior_prob(config_.tree_prior, depth)) : 0.0;
}

bool Sampler::propose_grow(std::size_t j, const std::vector<double>& r) {
    ++counts_.grow_proposed;
    auto& tree = forest_[j];
    const auto leaves = tree.leaves();
    const int leaf = leaves[rng_.index(leaves.size())];

    rows_.clear();
    const auto& owner = leaf_of_[j];
    for (std::size_t i = 0; i < owner.size(); ++i) {
        if (owner[i] == leaf) rows_.push_back(i);
    }
    if (rows_.size() < 2) return false;

    std::vector<int> usable;
    for (std::size_t f = 0; f < data_.num_features(); ++f) {
        const auto& col = data_.features[f];
        const double first = col[rows_.front()];
        for (std::size_t k = 1; k < rows_.size(); ++k) {
            if (col[rows_[k]] != first) {
                usable.push_back(static_cast<int>(f));
                break;
            }
        }
    }
    if (usable.empty()) return false;

    const int feature = usable[rng_.index(usable.size())];
    const auto& col = data_.features[static_cast<std::size_t>(feature)];
    values_.resize(rows_.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) values_[k] = col[rows_[k]];
    const auto cuts = candidate_cutpoints(values_, config_.tree_prior.cutpoint_grid);
    const double threshold = cuts[rng_.index(cuts.size())];

    left_rows_.clear();
    right_rows_.clear();
    for (std::size_t i : rows_) (col[i] <= threshold ? left_rows_ : right_rows_).push_back(i);
    const auto min_leaf = static_cast<std::size_t>(config_.tree_prior.min_leaf_size);
    if (left_rows_.size() < min_leaf || right_rows_.size() < min_leaf) return false;

    const int dim = basis_dim(data_.basis);
    LeafSufficientStats sl(dim);
    LeafSufficientStats sr(dim);
    for (std::size_t i : left_rows_) sl.add(data_.basis, data_.x[i], data_.z[i], r[i]);
    for (std::size_t i : right_rows_) sr.add(data_.basis, data_.x[i], data_.z[i], r[i]);
    sl.symmetrize();
    sr.symmetrize();
    const LeafSufficientStats sp = sl + sr;

    const int depth = tree.node(leaf).depth;
    const double p_split = split_prior_prob(config_.tree_prior, depth);
    std::size_t prunable_after = tree.prunable_nodes().size() + 1;
    if (leaf != Tree::kRoot) {
        const auto& parent = tree.node(tree.node(leaf).parent);
        const int sibling = parent.left == leaf ? parent.right : parent.left;
        if (tree.node(sibling).is_leaf()) --prunable_after;
    }

    const double log_ratio =
        std::log(static_cast<double>(leaves.size())) - std::log(static_cast<double>(prunable_after)) +
        std::log(config_.prune_prob / config_.grow_prob) + std::log(p_split) - std::log1p(-p_split) +
        log_leaf_prior_terminal(depth + 1, splittable(left_rows_)) +
        log_leaf_prior_terminal(depth + 1, splittable(right_rows_)) + leaf_log_marginal(sl, leaf_prior_, sigma2_) +
        leaf_log_marginal(sr, leaf_prior_, sigma2_) - leaf_log_marginal(sp, leaf_prior_, sigma2_);

    if (std::log(rng_.uniform()) >= log_ratio) return false;

    const auto [l, rr] = tree.grow(leaf, SplitRule{feature, threshold});
    auto& own = leaf_of_[j];
    for (std::size_t i : left_rows_) own[i] = l;
    for (std::size_t i : right_rows_) own[i] = rr;
    ++counts_.grow_accepted;
    return true;
}

bool Sampler::propose_prune(std::size_t j, const std::vector<double>& r) {
    ++counts_.prune_proposed;
    auto& tree = forest_[j];
    const auto candidates = tree.prunable_nodes();
    if (candidates.empty()) return false;
    const int node = candidates[rng_.index(candidates.size())];
    const int l = tree.node(node).left;
    const int rr = tree.node(node).right;

    left_rows_.clear();
    right_rows_.clear();
    const auto& owner = leaf_of_[j];
    const int dim = basis_dim(data_.basis);
    LeafSufficientStats sl(dim);
    LeafSufficientStats sr(dim);
    for (std::size_t i = 0; i < owner.size(); ++i) {
        if (owner[i] == l) {
            left_rows_.push_back(i);
            sl.add(data_.basis, data_.x[i], data_.z[i], r[i]);
        } else if (owner[i] == rr) {
            right_rows_.push_back(i);
            sr.add(data_.basis, data_.x[i], data_.z[i], r[i]);
        }
    }
    sl.symmetrize();
    sr.symmetrize();
    const LeafSufficientStats sp = sl + sr;

    const int depth = tree.node(node).depth;
    const double p_split = split_prior_prob(config_.tree_prior, depth);
    const std::size_t leaves_after = tree.num_leaves() - 1;

    const double log_ratio =
        std::log(static_cast<double>(candidates.size())) - std::log(static_cast<double>(leaves_after)) +
        std::log(config_.grow_prob / config_.prune_prob) - std::log(p_split) + std::log1p(-p_split) -
        log_leaf_prior_terminal(depth + 1, splittable(left_rows_)) -
        log_leaf_prior_terminal(depth + 1, splittable(right_rows_)) + leaf_log_marginal(sp, leaf_prior_, sigma2_) -
        leaf_log_marginal(sl, leaf_prior_, sigma2_) - leaf_log_marginal(sr, leaf_prior_, sigma2_);

    if (std::log(rng_.uniform()) >= log_ratio) return false;

    tree.prune(node);
    auto& own = leaf_of_[j];
    for (std::size_t i : left_rows_) own[i] = node;
    for (std::size_t i : right_rows_) own[i] = node;
    ++counts_.prune_accepted;
    return true;
}

void Sampler::redraw_leaves(std::size_t j, const std::vector<double>& r) {
    auto& tree = forest_[j];
    const int dim = basis_dim(data_.basis);
    leaf_stats_.assign(tree.arena_size(), LeafSufficientStats(dim));
    const auto& owner = leaf_of_[j];
    for (std::size_t i = 0; i < owner.size(); ++i) {
        leaf_stats_[static_cast<std::size_t>(owner[i])].add(data_.basis, data_.x[i], data_.z[i], r[i]);
    }
    for (int leaf : tree.leaves()) {
        auto& s = leaf_stats_[static_cast<std::size_t>(leaf)];
        s.symmetrize();
        tree.node(leaf).gamma = draw_leaf_coefficients(s, leaf_prior_, sigma2_, rng_);
    }
    for (std::size_t i = 0; i < owner.size(); ++i) {
        fit_[i] = data_.y[i] - r[i] + tree_value(j, i);
    }
}

bool Sampler::tree_move(std::size_t j) {
    const auto r = partial_residual(j);
    const double u = rng_.uniform();
    bool accepted = false;
    if (u < config_.grow_prob) {
        accepted = propose_grow(j, r);
    } else if (u < config_.grow_prob + config_.prune_prob) {
        accepted = propose_prune(j, r);
    }
    redraw_leaves(j, r);
    return accepted;
}

double Sampler::draw_sigma2() {
    if (config_.fixed_sigma2) {
        sigma2_ = *config_.fixed_sigma2;
        return sigma2_;
    }
    double ssr = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const double e = data_.y[i] - fit_[i];
        ssr += e * e;
    }
    const double shape = 0.5 * (config_.sigma_nu + static_cast<double>(data_.size()));
    const double rate = 0.5 * (config_.sigma_nu * lambda_ + ssr);
    const double draw = rate / rng_.gamma(shape);
    if (!(draw > 0.0) || !std::isfinite(draw)) throw Error("residual variance draw is not positive and finite");
    sigma2_ = draw;
    return sigma2_;
}

void Sampler::sweep() {
    for (std::size_t j = 0; j < forest_.size(); ++j) {
        try {
            tree_move(j);
        } catch (const Error& e) {
            throw Error("sweep " + std::to_string(sweeps_) + ", tree " + std::to_string(j) + ": " + e.what());
        }
    }
    try {
        draw_sigma2();
    } catch (const Error& e) {
        throw Error("sweep " + std::to_string(sweeps_) + ", sigma2 step: " + e.what());
    }
    ++sweeps_;
    assert(fit_cache_error() < 1e-8);
}

PosteriorDraws run_chain(const TrainingSet& data, const SamplerConfig& config, const DrawVisitor& visit) {
    Sampler sampler(data, config);
    PosteriorDraws out;
    out.sigma_lambda = sampler.sigma_lambda();
    out.sigma2.reserve(static_cast<std::size_t>(config.num_draws));
    for (int s = 0; s < config.burn_in; ++s) sampler.sweep();
    for (int d = 0; d < config.num_draws; ++d) {
        for (int t = 0; t < config.thin; ++t) sampler.sweep();
        out.sigma2.push_back(sampler.sigma2());
        if (visit) visit(static_cast<std::size_t>(d), sampler);
    }
    out.moves = sampler.move_counts();
    return out;
}

}  // namespace barddt
