#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barddt/models.hpp"

namespace barddt {

struct ModerationNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;  // w[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int depth = 0;
    double value = 0.0;  // mean tau_bar of members
    double sse = 0.0;
    std::vector<std::size_t> members;  // row positions in the fitted matrix

    bool is_leaf() const { return feature < 0; }
};

struct ModerationTree {
    std::vector<ModerationNode> nodes;  // nodes[0] is the root

    std::vector<int> leaves() const;
    int leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& w) const;
    // Indented text, one node per line.
    std::string to_text(const std::vector<std::string>& feature_names) const;
};

// Greedy CART on squared error. Ties keep the lowest feature, then the lowest threshold.
ModerationTree fit_moderation_tree(const Eigen::MatrixXd& w, const Eigen::VectorXd& tau_bar, int max_depth = 3,
                                   int min_leaf = 30);

struct SubgroupPosterior {
    std::vector<std::size_t> group;  // column indices of CateDraws
    Eigen::VectorXd draws;           // per-draw group mean
};

SubgroupPosterior subgroup_posterior(const CateDraws& draws, const std::vector<std::size_t>& group);

struct SubgroupContrast {
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    double prob_b_greater = 0.0;  // ties count one half
};

SubgroupContrast subgroup_contrast(const SubgroupPosterior& a, const SubgroupPosterior& b);

void write_contrast_csv(std::ostream& out, const SubgroupContrast& c);

}  // namespace barddt
