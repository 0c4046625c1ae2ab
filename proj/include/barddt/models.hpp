#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "barddt/data.hpp"
#include "barddt/sampler.hpp"

namespace barddt {

enum class Method { Barddt, TBart, SBart, Polynomial };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);  // accepts barddt, tbart, sbart, polynomial

// Posterior draws of tau(0, w_i) for the window observations, original y units.
struct CateDraws {
    std::string method;
    std::vector<std::size_t> window;  // column k belongs to row window[k]
    Eigen::MatrixXd draws;            // num_draws x window.size()
    std::vector<double> sigma2;       // per draw, original y units; empty for T-BART
    MoveCounts moves;

    std::size_t num_draws() const { return static_cast<std::size_t>(draws.rows()); }
    std::size_t num_points() const { return static_cast<std::size_t>(draws.cols()); }
};

struct ModelConfig {
    SamplerConfig sampler;          // leaf_scale is replaced per method below
    double barddt_leaf_scale = 0.033;
    double bart_leaf_scale = 1.0;
    // Optional hook on every retained BARDDT state (for example, saving forests).
    DrawVisitor on_barddt_draw;
};

// Sum over trees of the treatment offset at the leaf containing (0, w).
double barddt_cate(const std::vector<Tree>& forest, std::span<const double> w);

TrainingSet barddt_training_set(const StandardizedDataset& data);

CateDraws fit_barddt(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config);

// Scalar-leaf BART with z appended to the split features.
CateDraws fit_sbart(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config);

// Separate scalar-leaf forests on the treated and control arms; draw h of one
// chain is paired with draw h of the other.
CateDraws fit_tbart(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config);

// Column means.
Eigen::VectorXd posterior_mean_cate(const CateDraws& draws);

}  // namespace barddt
