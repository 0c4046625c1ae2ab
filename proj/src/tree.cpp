#include "barddt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "barddt/error.hpp"

namespace barddt {

Tree::Tree(int basis_dim) : basis_dim_(basis_dim) {
    if (basis_dim < 1 || basis_dim > kMaxBasis) throw Error("unsupported leaf basis dimension");
    TreeNode root;
    root.gamma = LeafVector::Zero(basis_dim);
    nodes_.push_back(root);
}

int Tree::allocate() {
    if (!free_.empty()) {
        const int id = free_.back();
        free_.pop_back();
        nodes_[static_cast<std::size_t>(id)] = TreeNode{};
        return id;
    }
    nodes_.emplace_back();
    return static_cast<int>(nodes_.size() - 1);
}

std::pair<int, int> Tree::grow(int leaf, SplitRule rule) {
    if (!node(leaf).alive || !node(leaf).is_leaf()) throw Error("grow target is not a leaf");
    const int l = allocate();
    const int r = allocate();
    for (int c : {l, r}) {
        auto& child = node(c);
        child.parent = leaf;
        child.depth = node(leaf).depth + 1;
        child.gamma = LeafVector::Zero(basis_dim_);
    }
    auto& p = node(leaf);
    p.left = l;
    p.right = r;
    p.rule = rule;
    return {l, r};
}

void Tree::prune(int id) {
    auto& p = node(id);
    if (p.is_leaf() || !node(p.left).is_leaf() || !node(p.right).is_leaf()) {
        throw Error("prune target must have two leaf children");
    }
    node(p.left).alive = false;
    node(p.right).alive = false;
    free_.push_back(p.right);
    free_.push_back(p.left);
    p.left = -1;
    p.right = -1;
    p.gamma = LeafVector::Zero(basis_dim_);
}

std::vector<int> Tree::leaves() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].alive && nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> Tree::prunable_nodes() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.alive && !n.is_leaf() && node(n.left).is_leaf() && node(n.right).is_leaf()) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::size_t Tree::num_leaves() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.alive && n.is_leaf(); }));
}

int Tree::max_depth() const {
    int d = 0;
    for (const auto& n : nodes_) {
        if (n.alive && n.is_leaf()) d = std::max(d, n.depth);
    }
    return d;
}

int Tree::route(std::span<const double> point) const {
    int id = kRoot;
    while (!node(id).is_leaf()) {
        const auto& n = node(id);
        id = point[static_cast<std::size_t>(n.rule.feature)] <= n.rule.threshold ? n.left : n.right;
    }
    return id;
}

int route(const Tree& tree, double x, std::span<const double> w) {
    int id = Tree::kRoot;
    while (!tree.node(id).is_leaf()) {
        const auto& n = tree.node(id);
        const double v = n.rule.feature == 0 ? x : w[static_cast<std::size_t>(n.rule.feature - 1)];
        id = v <= n.rule.threshold ? n.left : n.right;
    }
    return id;
}

double predict(const Tree& tree, double x, std::uint8_t z, std::span<const double> w) {
    return basis_dot(LeafBasis::Rdd, tree.node(route(tree, x, w)).gamma, x, z);
}

double predict(const Tree& tree, LeafBasis basis, std::span<const double> point, double x, std::uint8_t z) {
    return basis_dot(basis, tree.node(tree.route(point)).gamma, x, z);
}

void TreePrior::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("tree prior alpha must lie in (0, 1)");
    if (!(beta >= 0.0)) throw Error("tree prior beta must be non-negative");
    if (cutpoint_grid < 1) throw Error("cutpoint grid must be positive");
    if (min_leaf_size < 1) throw Error("minimum leaf size must be positive");
}

double split_prior_prob(const TreePrior& prior, int depth) {
    return prior.alpha / std::pow(1.0 + depth, prior.beta);
}

std::vector<double> candidate_cutpoints(std::span<const double> values, int grid_size) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> distinct;
    distinct.reserve(sorted.size());
    for (double v : sorted) {
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);
    }
    if (distinct.size() < 2 || grid_size < 1) return {};

    // Threshold between distinct[k] and distinct[k + 1]; falls back to the
    // lower value when the midpoint rounds onto an endpoint.
    auto gap_threshold = [&](std::size_t k) {
        const double a = distinct[k];
        const double b = distinct[k + 1];
        const double mid = a + 0.5 * (b - a);
        return (mid > a && mid < b) ? mid : a;
    };

    const std::size_t gaps = distinct.size() - 1;
    std::vector<double> out;
    if (gaps <= static_cast<std::size_t>(grid_size)) {
        out.reserve(gaps);
        for (std::size_t k = 0; k < gaps; ++k) out.push_back(gap_threshold(k));
        return out;
    }

    const std::size_t n = sorted.size();
    std::size_t last_gap = gaps;  // sentinel
    for (int i = 1; i <= grid_size; ++i) {
        const double q = static_cast<double>(i) / (grid_size + 1);
        const auto pos = std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)));
        auto it = std::lower_bound(distinct.begin(), distinct.end(), sorted[pos]);
        auto k = static_cast<std::size_t>(it - distinct.begin());
        if (k >= gaps) k = gaps - 1;
        if (k != last_gap) {
            out.push_back(gap_threshold(k));
            last_gap = k;
        }
    }
    return out;
}

namespace {

void grow_from_prior(Tree& tree, int id, const TreePrior& prior, int num_features, std::vector<double>& lo,
                     std::vector<double>& hi, Rng& rng, int depth_cap) {
    const int depth = tree.node(id).depth;
    if (depth >= depth_cap || rng.uniform() >= split_prior_prob(prior, depth)) return;
    const int f = static_cast<int>(rng.index(static_cast<std::size_t>(num_features)));
    const auto fu = static_cast<std::size_t>(f);
    const double t = lo[fu] + rng.uniform() * (hi[fu] - lo[fu]);
    const auto [l, r] = tree.grow(id, SplitRule{f, t});
    const double saved_hi = hi[fu];
    hi[fu] = t;
    grow_from_prior(tree, l, prior, num_features, lo, hi, rng, depth_cap);
    hi[fu] = saved_hi;
    const double saved_lo = lo[fu];
    lo[fu] = t;
    grow_from_prior(tree, r, prior, num_features, lo, hi, rng, depth_cap);
    lo[fu] = saved_lo;
}

void write_node(const Tree& tree, int id, int& next_id, std::vector<std::string>& lines) {
    const int my_id = next_id++;
    const auto slot = lines.size();
    lines.emplace_back();
    const auto& n = tree.node(id);
    char buf[64];
    std::string line = std::to_string(my_id);
    if (n.is_leaf()) {
        line += " leaf";
        for (int k = 0; k < tree.basis_dim(); ++k) {
            std::snprintf(buf, sizeof buf, " %.17g", n.gamma[k]);
            line += buf;
        }
    } else {
        const int left_id = next_id;
        write_node(tree, n.left, next_id, lines);
        const int right_id = next_id;
        write_node(tree, n.right, next_id, lines);
        std::snprintf(buf, sizeof buf, " %.17g", n.rule.threshold);
        line += " split " + std::to_string(n.rule.feature) + buf + " " + std::to_string(left_id) + " " +
                std::to_string(right_id);
    }
    lines[slot] = std::move(line);
}

}  // namespace

Tree sample_prior_tree(const TreePrior& prior, int num_features, Rng& rng, int depth_cap) {
    if (num_features < 1) throw Error("need at least one feature");
    Tree tree(1);
    std::vector<double> lo(static_cast<std::size_t>(num_features), 0.0);
    std::vector<double> hi(static_cast<std::size_t>(num_features), 1.0);
    grow_from_prior(tree, Tree::kRoot, prior, num_features, lo, hi, rng, depth_cap);
    return tree;
}

void write_tree(std::ostream& out, const Tree& tree) {
    std::vector<std::string> lines;
    int next_id = 0;
    write_node(tree, Tree::kRoot, next_id, lines);
    out << "tree " << lines.size() << ' ' << tree.basis_dim() << '\n';
    for (const auto& l : lines) out << l << '\n';
}

Tree read_tree(std::istream& in) {
    std::string line;
    std::string tag;
    std::size_t count = 0;
    int dim = 0;
    if (!std::getline(in, line)) throw Error("tree record: unexpected end of input");
    {
        std::istringstream hs(line);
        if (!(hs >> tag >> count >> dim) || tag != "tree" || count == 0) throw Error("tree record: bad header");
    }
    struct Raw {
        bool leaf = true;
        SplitRule rule;
        int left = -1;
        int right = -1;
        LeafVector gamma;
    };
    std::vector<Raw> raw(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (!std::getline(in, line)) throw Error("tree record: truncated");
        std::istringstream ls(line);
        std::size_t id = 0;
        std::string kind;
        if (!(ls >> id >> kind) || id >= count) throw Error("tree record: bad node line '" + line + "'");
        auto& r = raw[id];
        if (kind == "leaf") {
            r.gamma.resize(dim);
            for (int c = 0; c < dim; ++c) {
                if (!(ls >> r.gamma[c])) throw Error("tree record: bad leaf line '" + line + "'");
            }
        } else if (kind == "split") {
            r.leaf = false;
            if (!(ls >> r.rule.feature >> r.rule.threshold >> r.left >> r.right)) {
                throw Error("tree record: bad split line '" + line + "'");
            }
        } else {
            throw Error("tree record: unknown node kind '" + kind + "'");
        }
    }
    Tree tree(dim);
    // Rebuild top-down; raw ids are depth-first so children follow parents.
    std::vector<std::pair<std::size_t, int>> stack{{0, Tree::kRoot}};
    std::size_t visited = 0;
    while (!stack.empty()) {
        auto [rid, tid] = stack.back();
        stack.pop_back();
        ++visited;
        const auto& r = raw[rid];
        if (r.leaf) {
            tree.node(tid).gamma = r.gamma;
            continue;
        }
        if (r.left < 0 || r.right < 0 || static_cast<std::size_t>(r.left) >= count ||
            static_cast<std::size_t>(r.right) >= count) {
            throw Error("tree record: child index out of range");
        }
        const auto [l, rr] = tree.grow(tid, r.rule);
        stack.emplace_back(static_cast<std::size_t>(r.right), rr);
        stack.emplace_back(static_cast<std::size_t>(r.left), l);
    }
    if (visited != count) throw Error("tree record: nodes unreachable from root");
    return tree;
}

}  // namespace barddt
