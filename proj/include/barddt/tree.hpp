#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "barddt/leaf_model.hpp"
#include "barddt/rng.hpp"

namespace barddt {

// Go left iff point[feature] <= threshold.
struct SplitRule {
    int feature = 0;
    double threshold = 0.0;
};

struct TreeNode {
    int parent = -1;
    int left = -1;
    int right = -1;
    int depth = 0;
    SplitRule rule;
    LeafVector gamma;  // meaningful only at leaves
    bool alive = true;

    bool is_leaf() const { return left < 0; }
};

// Binary tree kept in an index arena. Node 0 is always the root; ids of live
// nodes stay stable across grow/prune so per-observation leaf caches survive.
class Tree {
public:
    explicit Tree(int basis_dim = kMaxBasis);

    static constexpr int kRoot = 0;

    int basis_dim() const { return basis_dim_; }
    const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    TreeNode& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    std::size_t arena_size() const { return nodes_.size(); }

    // Splits a leaf; returns {left, right}. Children start with zero coefficients.
    std::pair<int, int> grow(int leaf, SplitRule rule);
    // Collapses a node whose children are both leaves back into a leaf.
    void prune(int node);

    std::vector<int> leaves() const;
    // Internal nodes whose two children are leaves (the prunable set).
    std::vector<int> prunable_nodes() const;
    std::size_t num_leaves() const;
    int max_depth() const;

    int route(std::span<const double> point) const;

private:
    int allocate();

    int basis_dim_;
    std::vector<TreeNode> nodes_;
    std::vector<int> free_;
};

// Routing for the RDD feature layout (x, w_1..w_p).
int route(const Tree& tree, double x, std::span<const double> w);

// psi(x, z) . gamma at the routed leaf, for the RDD feature layout.
double predict(const Tree& tree, double x, std::uint8_t z, std::span<const double> w);
double predict(const Tree& tree, LeafBasis basis, std::span<const double> point, double x, std::uint8_t z);

struct TreePrior {
    double alpha = 0.95;
    double beta = 2.0;
    int cutpoint_grid = 100;
    int min_leaf_size = 20;

    void validate() const;
};

// alpha / (1 + depth)^beta
double split_prior_prob(const TreePrior& prior, int depth);

// Quantile-spaced thresholds strictly inside (min, max) of the values; each
// leaves both children nonempty under the "<= goes left" rule. Empty when the
// values are all equal.
std::vector<double> candidate_cutpoints(std::span<const double> values, int grid_size);

// Draws a tree from the split-probability prior alone over `num_features`
// features on the unit box. Used for prior checks.
Tree sample_prior_tree(const TreePrior& prior, int num_features, Rng& rng, int depth_cap = 64);

// Line-oriented text form, one node per line in depth-first order:
//   tree <node_count> <basis_dim>
//   <id> split <feature> <threshold> <left_id> <right_id>
//   <id> leaf <gamma_0> ... <gamma_{d-1}>
void write_tree(std::ostream& out, const Tree& tree);
Tree read_tree(std::istream& in);

}  // namespace barddt
