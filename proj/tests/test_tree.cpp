#include <doctest.h>

#include <set>
#include <sstream>
#include <vector>

#include "barddt/tree.hpp"
#include "oracles.hpp"

using namespace barddt;

TEST_CASE("routing") {
    Tree t(4);
    const std::vector<double> w{0.3};
    CHECK(route(t, -5.0, w) == Tree::kRoot);

    const auto [l, r] = t.grow(Tree::kRoot, SplitRule{0, 0.0});
    CHECK(route(t, -1.0, w) == l);
    CHECK(route(t, 1.0, w) == r);
    CHECK(route(t, 0.0, w) == l);  // ties go left

    SUBCASE("depth-2 tree on w1 then x") {
        Tree u(4);
        const auto [a, b] = u.grow(Tree::kRoot, SplitRule{1, 0.0});
        const auto [al, ar] = u.grow(a, SplitRule{0, 0.0});
        const auto [bl, br] = u.grow(b, SplitRule{0, 0.0});
        const std::vector<double> neg{-1.0}, pos{1.0};
        CHECK(route(u, -1.0, neg) == al);
        CHECK(route(u, 1.0, neg) == ar);
        CHECK(route(u, -1.0, pos) == bl);
        CHECK(route(u, 1.0, pos) == br);
    }
}

TEST_CASE("prediction") {
    Tree t(4);
    const std::vector<double> w{0.0};
    t.node(Tree::kRoot).gamma << 7, 0, 0, 0;
    CHECK(predict(t, 3.0, 1, w) == 7.0);
    CHECK(predict(t, -3.0, 0, w) == 7.0);
    t.node(Tree::kRoot).gamma << 0, 0, 0, 1;
    CHECK(predict(t, 2.0, 1, w) == 1.0);
    CHECK(predict(t, 2.0, 0, w) == 0.0);
    t.node(Tree::kRoot).gamma << 1, 2, 3, 4;
    CHECK(predict(t, 0.5, 0, w) == doctest::Approx(2.5));

    SUBCASE("exactly linear in x within a leaf") {
        Rng rng(1);
        t.node(Tree::kRoot).gamma << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        for (std::uint8_t z : {0, 1}) {
            const double a = predict(t, 0.1, z, w), b = predict(t, 0.4, z, w), c = predict(t, 0.7, z, w);
            CHECK(std::abs((b - a) - (c - b)) < 1e-12);
        }
    }
}

TEST_CASE("grow, prune and bookkeeping") {
    Tree t(4);
    const auto [l, r] = t.grow(Tree::kRoot, SplitRule{0, 0.0});
    const auto [rl, rr] = t.grow(r, SplitRule{1, 0.5});
    CHECK(t.num_leaves() == 3);
    CHECK(t.max_depth() == 2);
    CHECK(t.prunable_nodes() == std::vector<int>{r});
    t.prune(r);
    CHECK(t.num_leaves() == 2);
    CHECK(t.prunable_nodes() == std::vector<int>{Tree::kRoot});
    (void)l, (void)rl, (void)rr;
}

TEST_CASE("split prior probability") {
    TreePrior p;
    CHECK(split_prior_prob(p, 0) == doctest::Approx(0.95));
    CHECK(split_prior_prob(p, 1) == doctest::Approx(0.2375));
    p.beta = 0.0;
    CHECK(split_prior_prob(p, 7) == doctest::Approx(0.95));
}

TEST_CASE("candidate cutpoints") {
    SUBCASE("constant feature") {
        const std::vector<double> v{2, 2, 2};
        CHECK(candidate_cutpoints(v, 10).empty());
    }
    SUBCASE("grid covers all gaps") {
        const std::vector<double> v{4, 1, 3, 2, 2};
        const auto c = candidate_cutpoints(v, 10);
        CHECK(c == std::vector<double>{1.5, 2.5, 3.5});
    }
    SUBCASE("coarse grid on {1,2,3,4}") {
        const std::vector<double> v{1, 2, 3, 4};
        const auto c = candidate_cutpoints(v, 2);
        CHECK(!c.empty());
        CHECK(c.size() <= 2);
        for (double t : c) {
            CHECK(t > 1.0);
            CHECK(t < 4.0);
        }
        CHECK(std::set<double>(c.begin(), c.end()).size() == c.size());
    }
    SUBCASE("random data keeps both children nonempty") {
        Rng rng(4);
        std::vector<double> v(500);
        for (auto& x : v) x = std::round(rng.normal() * 20.0) / 20.0;
        const auto c = candidate_cutpoints(v, 100);
        CHECK(c.size() <= 100);
        for (double t : c) {
            std::size_t left = 0;
            for (double x : v) left += x <= t;
            CHECK(left > 0);
            CHECK(left < v.size());
        }
    }
}

TEST_CASE("prior-only depth distribution") {
    TreePrior p;
    Rng rng(2024);
    const int m = 10000;
    std::vector<double> freq(4, 0.0);
    for (int k = 0; k < m; ++k) {
        const auto t = sample_prior_tree(p, 3, rng);
        if (t.max_depth() < 4) freq[static_cast<std::size_t>(t.max_depth())] += 1.0 / m;
    }
    const auto want = oracle::prior_depth_distribution(p.alpha, p.beta, 3);
    for (int d = 0; d < 4; ++d) CHECK(std::abs(freq[static_cast<std::size_t>(d)] - want[static_cast<std::size_t>(d)]) < 0.02);
}

TEST_CASE("partition property and serialization round trip") {
    Rng rng(9);
    const auto t = sample_prior_tree(TreePrior{}, 3, rng);
    std::vector<int> counts(t.arena_size(), 0);
    for (int k = 0; k < 10000; ++k) {
        const std::vector<double> pt{rng.uniform(), rng.uniform(), rng.uniform()};
        const int id = t.route(pt);
        CHECK(t.node(id).is_leaf());
        ++counts[static_cast<std::size_t>(id)];
    }
    int total = 0;
    for (int c : counts) total += c;
    CHECK(total == 10000);

    Tree u(4);
    const auto [l, r] = u.grow(Tree::kRoot, SplitRule{1, 0.123456789012345678});
    u.node(l).gamma << 0.1, -2.5e-7, 3, 1.0 / 3;
    u.node(r).gamma << 1, 2, 3, 4;
    std::stringstream ss;
    write_tree(ss, u);
    const auto back = read_tree(ss);
    std::stringstream again;
    write_tree(again, back);
    std::stringstream first;
    write_tree(first, u);
    CHECK(again.str() == first.str());
    const std::vector<double> w{0.2};
    CHECK(predict(back, 0.3, 1, w) == predict(u, 0.3, 1, w));
}
