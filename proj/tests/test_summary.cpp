#include <doctest.h>

#include <sstream>

#include "barddt/error.hpp"
#include "barddt/rng.hpp"
#include "barddt/summary.hpp"

using namespace barddt;

namespace {

CateDraws make_draws(const Eigen::MatrixXd& m) {
    CateDraws d;
    d.method = "barddt";
    d.draws = m;
    for (Eigen::Index k = 0; k < m.cols(); ++k) d.window.push_back(static_cast<std::size_t>(k));
    return d;
}

}  // namespace

TEST_CASE("moderation tree") {
    Rng rng(4);
    const Eigen::Index n = 200;
    Eigen::MatrixXd w(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) w.row(i) << rng.normal(), rng.normal();

    SUBCASE("constant target stays at the root") {
        const auto t = fit_moderation_tree(w, Eigen::VectorXd::Constant(n, 1.5));
        REQUIRE(t.nodes.size() == 1);
        CHECK(t.nodes[0].value == doctest::Approx(1.5));
        CHECK(t.leaves() == std::vector<int>{0});
    }
    SUBCASE("step in the second feature") {
        Eigen::VectorXd tau(n);
        for (Eigen::Index i = 0; i < n; ++i) tau[i] = w(i, 1) > 0.25 ? 2.0 : -1.0;
        const auto t = fit_moderation_tree(w, tau, 1, 10);
        REQUIRE(t.nodes.size() == 3);
        CHECK(t.nodes[0].feature == 1);
        CHECK(t.nodes[0].threshold > 0.0);
        CHECK(t.nodes[0].threshold < 0.5);
        const auto& l = t.nodes[static_cast<std::size_t>(t.nodes[0].left)];
        const auto& r = t.nodes[static_cast<std::size_t>(t.nodes[0].right)];
        CHECK(l.value == doctest::Approx(-1.0));
        CHECK(r.value == doctest::Approx(2.0));
        CHECK(l.members.size() + r.members.size() == static_cast<std::size_t>(n));
        CHECK(t.leaf_of((Eigen::RowVectorXd(2) << 0.0, 3.0).finished()) == t.nodes[0].right);
        std::ostringstream names;
        CHECK(t.to_text({"age", "score"}).find("score") != std::string::npos);
    }
    SUBCASE("depth zero") {
        Eigen::VectorXd tau = w.col(0);
        CHECK(fit_moderation_tree(w, tau, 0, 5).nodes.size() == 1);
    }
    SUBCASE("leaf sizes respect min_leaf") {
        Eigen::VectorXd tau = w.col(0) + w.col(1).cwiseAbs2();
        const auto t = fit_moderation_tree(w, tau, 3, 30);
        std::size_t total = 0;
        for (int id : t.leaves()) {
            const auto& node = t.nodes[static_cast<std::size_t>(id)];
            CHECK(node.members.size() >= 30);
            CHECK(node.depth <= 3);
            total += node.members.size();
        }
        CHECK(total == static_cast<std::size_t>(n));
    }
    SUBCASE("too few rows") {
        CHECK_THROWS_AS(fit_moderation_tree(Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd(0)), Error);
    }
}

TEST_CASE("subgroup posterior") {
    Rng rng(5);
    Eigen::MatrixXd m(300, 6);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal() + static_cast<double>(j);
    }
    const auto draws = make_draws(m);
    const auto g = subgroup_posterior(draws, {1, 4});
    for (Eigen::Index h = 0; h < m.rows(); ++h) CHECK(g.draws[h] == doctest::Approx((m(h, 1) + m(h, 4)) / 2.0));
    CHECK_THROWS_AS(subgroup_posterior(draws, {}), Error);
    CHECK_THROWS_AS(subgroup_posterior(draws, {6}), Error);

    SUBCASE("contrast probability") {
        const auto a = subgroup_posterior(draws, {0});
        const auto b = subgroup_posterior(draws, {5});
        // Counted directly from the paired draws.
        double count = 0.0;
        for (Eigen::Index h = 0; h < m.rows(); ++h) count += m(h, 5) > m(h, 0) ? 1.0 : (m(h, 5) == m(h, 0) ? 0.5 : 0.0);
        CHECK(subgroup_contrast(a, b).prob_b_greater == doctest::Approx(count / 300.0));
        CHECK(subgroup_contrast(a, a).prob_b_greater == 0.5);
        std::ostringstream out;
        write_contrast_csv(out, subgroup_contrast(a, b));
        CHECK(out.str().rfind("draw,group_a,group_b\n0,", 0) == 0);
    }
    SUBCASE("shifted copy is always larger") {
        Eigen::MatrixXd shifted(m.rows(), 2);
        shifted.col(0) = m.col(0);
        shifted.col(1) = m.col(0).array() + 0.1;
        const auto d2 = make_draws(shifted);
        CHECK(subgroup_contrast(subgroup_posterior(d2, {0}), subgroup_posterior(d2, {1})).prob_b_greater == 1.0);
    }
}
