#include <doctest.h>

#include <fstream>
#include <sstream>

#include "barddt/draws_io.hpp"
#include "barddt/error.hpp"
#include "barddt/rng.hpp"
#include "tmpdir.hpp"

using namespace barddt;

TEST_CASE("exact formatting") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) CHECK(std::stod(format_exact(v)) == v);
}

TEST_CASE("draws csv round trip") {
    Rng rng(2);
    CateDraws d;
    d.method = "barddt";
    d.window = {4, 9, 11};
    d.draws.resize(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) d.draws(i, j) = rng.normal();
        d.sigma2.push_back(rng.uniform());
    }
    TempDir tmp;
    {
        std::ofstream out(tmp / "d.csv");
        write_draws_csv(out, d);
    }
    CHECK(slurp(tmp / "d.csv").rfind("draw,sigma2,tau_5,tau_10,tau_12\n", 0) == 0);
    const auto back = read_draws_csv(tmp / "d.csv");
    CHECK(back.window == d.window);
    CHECK(back.draws == d.draws);
    CHECK(back.sigma2 == d.sigma2);

    d.sigma2.clear();
    std::ostringstream s;
    write_draws_csv(s, d);
    CHECK(s.str().find("\n1,NA,") != std::string::npos);
    CHECK_THROWS_AS(read_draws_csv(tmp.file("bad.csv", "draw,sigma2,tau_1\n1,0.5,abc\n")), Error);
}

TEST_CASE("forest text round trip") {
    Rng rng(6);
    TreePrior prior;
    std::vector<Tree> forest;
    for (int k = 0; k < 4; ++k) {
        auto t = sample_prior_tree(prior, 3, rng);
        for (int id : t.leaves()) {
            auto& g = t.node(id).gamma;
            for (auto& v : g) v = rng.normal();
        }
        forest.push_back(t);
    }
    std::stringstream ss;
    write_forest(ss, 0, forest);
    write_forest(ss, 1, forest);
    const auto back = read_forests(ss, 4);
    REQUIRE(back.size() == 2);
    Rng pts(7);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(back[1][k].num_leaves() == forest[k].num_leaves());
        for (int r = 0; r < 50; ++r) {
            const std::vector<double> pt{pts.uniform(), pts.uniform(), pts.uniform()};
            const auto& a = back[1][k].node(back[1][k].route(pt));
            const auto& b = forest[k].node(forest[k].route(pt));
            CHECK(a.gamma[0] == b.gamma[0]);
        }
    }
}
