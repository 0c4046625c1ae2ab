#include "barddt/summary.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "barddt/error.hpp"

namespace barddt {

namespace {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double node_sse(const Eigen::VectorXd& t, const std::vector<std::size_t>& rows, double mean) {
    double s = 0.0;
    for (std::size_t i : rows) s += (t[static_cast<Eigen::Index>(i)] - mean) * (t[static_cast<Eigen::Index>(i)] - mean);
    return s;
}

SplitChoice best_split(const Eigen::MatrixXd& w, const Eigen::VectorXd& t, const std::vector<std::size_t>& rows,
                       int min_leaf) {
    SplitChoice best;
    const std::size_t n = rows.size();
    const auto nl_min = static_cast<std::size_t>(min_leaf);
    if (n < 2 * nl_min) return best;
    double total = 0.0;
    for (std::size_t i : rows) total += t[static_cast<Eigen::Index>(i)];
    const double parent = node_sse(t, rows, total / static_cast<double>(n));
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f = 0; f < w.cols(); ++f) {
        auto wv = [&](std::size_t i) { return w(static_cast<Eigen::Index>(i), f); };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wv(a) < wv(b); });
        double left_sum = 0.0;
        double left_sq = 0.0;
        double total_sq = 0.0;
        for (std::size_t i : order) total_sq += t[static_cast<Eigen::Index>(i)] * t[static_cast<Eigen::Index>(i)];
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double v = t[static_cast<Eigen::Index>(order[k])];
            left_sum += v;
            left_sq += v * v;
            const std::size_t nl = k + 1;
            const std::size_t nr = n - nl;
            if (nl < nl_min || nr < nl_min) continue;
            const double a = wv(order[k]);
            const double b = wv(order[k + 1]);
            if (!(a < b)) continue;
            const double right_sum = total - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
            const double gain = parent - sse;
            // Thresholds are visited in increasing order, so strict improvement keeps the lowest.
            if (gain > best.gain + 1e-12 * std::max(1.0, parent)) {
                best.feature = static_cast<int>(f);
                best.threshold = a + (b - a) / 2.0;
                best.gain = gain;
            }
        }
    }
    return best;
}

void grow(ModerationTree& tree, int id, const Eigen::MatrixXd& w, const Eigen::VectorXd& t, int max_depth,
          int min_leaf) {
    if (tree.nodes[static_cast<std::size_t>(id)].depth >= max_depth) return;
    const auto rows = tree.nodes[static_cast<std::size_t>(id)].members;
    const auto split = best_split(w, t, rows, min_leaf);
    if (split.feature < 0) return;

    ModerationNode left;
    ModerationNode right;
    const int depth = tree.nodes[static_cast<std::size_t>(id)].depth + 1;
    left.depth = right.depth = depth;
    for (std::size_t i : rows) {
        (w(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left : right).members.push_back(i);
    }
    for (auto* child : {&left, &right}) {
        double s = 0.0;
        for (std::size_t i : child->members) s += t[static_cast<Eigen::Index>(i)];
        child->value = s / static_cast<double>(child->members.size());
        child->sse = node_sse(t, child->members, child->value);
    }
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(std::move(left));
    tree.nodes.push_back(std::move(right));
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = l + 1;
    grow(tree, l, w, t, max_depth, min_leaf);
    grow(tree, l + 1, w, t, max_depth, min_leaf);
}

void write_node(const ModerationTree& tree, int id, const std::vector<std::string>& names, const std::string& prefix,
                std::ostringstream& out) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    char buf[160];
    if (node.is_leaf()) {
        std::snprintf(buf, sizeof buf, "leaf %d: n=%zu tau=%.6g\n", id, node.members.size(), node.value);
        out << prefix << buf;
        return;
    }
    const auto f = static_cast<std::size_t>(node.feature);
    const std::string name = f < names.size() ? names[f] : "w" + std::to_string(f + 1);
    std::snprintf(buf, sizeof buf, "node %d: n=%zu tau=%.6g split %s <= %.6g\n", id, node.members.size(), node.value,
                  name.c_str(), node.threshold);
    out << prefix << buf;
    write_node(tree, node.left, names, prefix + "  ", out);
    write_node(tree, node.right, names, prefix + "  ", out);
}

}  // namespace

std::vector<int> ModerationTree::leaves() const {
    std::vector<int> out;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].is_leaf()) out.push_back(static_cast<int>(k));
    }
    return out;
}

int ModerationTree::leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& w) const {
    int id = 0;
    while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        id = w[n.feature] <= n.threshold ? n.left : n.right;
    }
    return id;
}

std::string ModerationTree::to_text(const std::vector<std::string>& feature_names) const {
    std::ostringstream out;
    write_node(*this, 0, feature_names, "", out);
    return out.str();
}

ModerationTree fit_moderation_tree(const Eigen::MatrixXd& w, const Eigen::VectorXd& tau_bar, int max_depth,
                                   int min_leaf) {
    if (w.rows() != tau_bar.size()) throw Error("moderator rows and posterior means differ in length");
    if (max_depth < 0) throw Error("summary.max_depth must be non-negative");
    if (min_leaf < 1) throw Error("summary.min_leaf must be positive");
    if (tau_bar.size() < 2 * static_cast<Eigen::Index>(min_leaf)) {
        throw Error("too few rows for the moderation tree: need at least " + std::to_string(2 * min_leaf));
    }
    ModerationTree tree;
    ModerationNode root;
    root.members.resize(static_cast<std::size_t>(tau_bar.size()));
    std::iota(root.members.begin(), root.members.end(), std::size_t{0});
    root.value = tau_bar.mean();
    root.sse = node_sse(tau_bar, root.members, root.value);
    tree.nodes.push_back(std::move(root));
    grow(tree, 0, w, tau_bar, max_depth, min_leaf);
    return tree;
}

SubgroupPosterior subgroup_posterior(const CateDraws& draws, const std::vector<std::size_t>& group) {
    if (group.empty()) throw Error("empty subgroup");
    SubgroupPosterior out;
    out.group = group;
    out.draws = Eigen::VectorXd::Zero(draws.draws.rows());
    for (std::size_t k : group) {
        if (k >= draws.num_points()) throw Error("subgroup index " + std::to_string(k) + " is outside the window");
        out.draws += draws.draws.col(static_cast<Eigen::Index>(k));
    }
    out.draws /= static_cast<double>(group.size());
    return out;
}

SubgroupContrast subgroup_contrast(const SubgroupPosterior& a, const SubgroupPosterior& b) {
    if (a.draws.size() != b.draws.size()) throw Error("subgroup posteriors have different draw counts");
    if (a.draws.size() == 0) throw Error("subgroup posteriors are empty");
    SubgroupContrast c;
    c.a = a.draws;
    c.b = b.draws;
    double count = 0.0;
    for (Eigen::Index h = 0; h < c.a.size(); ++h) {
        if (c.b[h] > c.a[h]) {
            count += 1.0;
        } else if (c.b[h] == c.a[h]) {
            count += 0.5;
        }
    }
    c.prob_b_greater = count / static_cast<double>(c.a.size());
    return c;
}

void write_contrast_csv(std::ostream& out, const SubgroupContrast& c) {
    char buf[96];
    out << "draw,group_a,group_b\n";
    for (Eigen::Index h = 0; h < c.a.size(); ++h) {
        std::snprintf(buf, sizeof buf, "%td,%.17g,%.17g\n", h, c.a[h], c.b[h]);
        out << buf;
    }
}

}  // namespace barddt
