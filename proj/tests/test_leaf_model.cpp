#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "barddt/error.hpp"
#include "barddt/leaf_model.hpp"
#include "oracles.hpp"

using namespace barddt;

namespace {

Eigen::MatrixXd design(LeafBasis b, const std::vector<double>& x, const std::vector<std::uint8_t>& z) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), basis_dim(b));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int c = 0; c < basis_dim(b); ++c) m(static_cast<Eigen::Index>(i), c) = basis_value(b, c, x[i], z[i]);
    }
    return m;
}

LeafMatrix random_spd(Rng& rng, int dim) {
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = rng.normal();
    Eigen::MatrixXd s = a * a.transpose() * 0.1 + 0.05 * Eigen::MatrixXd::Identity(dim, dim);
    return s;
}

}  // namespace

TEST_CASE("basis rows") {
    CHECK(basis_row(LeafBasis::Rdd, 2.5, 1) == (LeafVector(4) << 1, 2.5, 0, 1).finished());
    CHECK(basis_row(LeafBasis::Rdd, 2.5, 0) == (LeafVector(4) << 1, 0, 2.5, 0).finished());
    const LeafVector diff = basis_row(LeafBasis::Rdd, 0.0, 1) - basis_row(LeafBasis::Rdd, 0.0, 0);
    CHECK(diff == (LeafVector(4) << 0, 0, 0, 1).finished());
    LeafVector g(4);
    g << 1, 2, 3, 4;
    CHECK(basis_dot(LeafBasis::Rdd, g, 0.5, 0) == doctest::Approx(2.5));
    CHECK(basis_dot(LeafBasis::Rdd, g, 0.5, 1) == doctest::Approx(1 + 1 + 4));
}

TEST_CASE("sufficient statistics") {
    SUBCASE("single observation") {
        const std::vector<double> x{0.5}, r{2.0};
        const std::vector<std::uint8_t> z{1};
        const auto s = accumulate_stats(LeafBasis::Rdd, x, z, r);
        CHECK(s.n == 1);
        CHECK(s.ptr == (LeafVector(4) << 2, 1, 0, 2).finished());
        CHECK(s.rtr == 4.0);
    }
    SUBCASE("empty input") {
        const auto s = accumulate_stats(LeafBasis::Rdd, {}, {}, {});
        CHECK(s.n == 0);
        CHECK(s.ptp.isZero());
        CHECK(s.ptr.isZero());
        CHECK(s.rtr == 0.0);
    }
    SUBCASE("additivity and agreement with the explicit design") {
        Rng rng(3);
        std::vector<double> x, r;
        std::vector<std::uint8_t> z;
        for (int i = 0; i < 9; ++i) {
            x.push_back(rng.normal());
            z.push_back(x.back() > 0);
            r.push_back(rng.normal());
        }
        const auto all = accumulate_stats(LeafBasis::Rdd, x, z, r);
        const auto a = accumulate_stats(LeafBasis::Rdd, std::span(x).first(4), std::span(z).first(4), std::span(r).first(4));
        const auto b = accumulate_stats(LeafBasis::Rdd, std::span(x).subspan(4), std::span(z).subspan(4), std::span(r).subspan(4));
        const auto sum = a + b;
        CHECK(sum.n == all.n);
        CHECK((sum.ptp - all.ptp).norm() < 1e-12);
        CHECK((sum.ptr - all.ptr).norm() < 1e-12);
        const auto psi = design(LeafBasis::Rdd, x, z);
        const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
        CHECK((Eigen::MatrixXd(all.ptp) - psi.transpose() * psi).norm() < 1e-12);
        CHECK((Eigen::VectorXd(all.ptr) - psi.transpose() * rv).norm() < 1e-12);
    }
    SUBCASE("length mismatch") {
        const std::vector<double> x{1.0, 2.0}, r{1.0};
        const std::vector<std::uint8_t> z{1, 1};
        CHECK_THROWS_AS(accumulate_stats(LeafBasis::Rdd, x, z, r), Error);
    }
}

TEST_CASE("leaf prior validation") {
    CHECK_THROWS_AS(LeafPrior(LeafMatrix::Zero(4, 4)), Error);
    LeafMatrix asym = LeafMatrix::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(LeafPrior{asym}, Error);
    const auto p = LeafPrior::isotropic(4, 0.033, 50);
    CHECK(p.sigma0()(0, 0) == doctest::Approx(0.033 / 50));
    CHECK(p.log_det_sigma0() == doctest::Approx(4 * std::log(0.033 / 50)));
}

TEST_CASE("leaf log marginal") {
    SUBCASE("empty leaf is zero") {
        const auto p = LeafPrior::isotropic(4, 1.0, 1);
        CHECK(leaf_log_marginal(LeafSufficientStats(4), p, 0.7) == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("ones basis, n=3, r=(1,2,3)") {
        const std::vector<double> x{0, 0, 0}, r{1, 2, 3};
        const std::vector<std::uint8_t> z{0, 0, 0};
        const auto s = accumulate_stats(LeafBasis::Constant, x, z, r);
        const double expected = -1.5 * std::log(2 * std::numbers::pi) + 0.5 * std::log(0.25) - 7.0 + 36.0 / 8.0;
        CHECK(leaf_log_marginal(s, LeafPrior::isotropic(1, 1.0, 1), 1.0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("non-positive sigma2") {
        CHECK_THROWS_AS(leaf_log_marginal(LeafSufficientStats(4), LeafPrior::isotropic(4, 1.0, 1), 0.0), Error);
    }
    SUBCASE("ones basis reduces to the scalar formula") {
        Rng rng(11);
        for (int t = 0; t < 200; ++t) {
            const auto n = 1 + rng.index(40);
            std::vector<double> x(n, 0.0), r(n);
            std::vector<std::uint8_t> z(n, 0);
            for (auto& v : r) v = 2.0 * rng.normal() + 0.5;
            const double tau2 = 0.01 + rng.uniform();
            const double sigma2 = 0.05 + rng.uniform();
            const auto s = accumulate_stats(LeafBasis::Constant, x, z, r);
            CHECK(std::abs(leaf_log_marginal(s, LeafPrior::isotropic(1, tau2, 1), sigma2) -
                           oracle::scalar_leaf_marginal(r, sigma2, tau2)) < 1e-8);
        }
    }
    SUBCASE("dense Gaussian oracle, random 4-basis leaves") {
        Rng rng(12);
        for (int t = 0; t < 200; ++t) {
            const auto n = rng.index(30);
            std::vector<double> x(n), r(n);
            std::vector<std::uint8_t> z(n);
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = rng.normal();
                z[i] = rng.uniform() < 0.5;
                r[i] = rng.normal();
            }
            const auto sigma0 = random_spd(rng, 4);
            const double sigma2 = 0.1 + rng.uniform();
            const auto s = accumulate_stats(LeafBasis::Rdd, x, z, r);
            const Eigen::VectorXd rv = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(n));
            const double want = oracle::dense_gaussian_marginal(design(LeafBasis::Rdd, x, z), rv, sigma0, sigma2);
            CHECK(std::abs(leaf_log_marginal(s, LeafPrior(sigma0), sigma2) - want) < 1e-8);
        }
    }
}

TEST_CASE("leaf posterior and draws") {
    SUBCASE("one treated observation at x=0") {
        const std::vector<double> x{0.0}, r{1.0};
        const std::vector<std::uint8_t> z{1};
        const auto s = accumulate_stats(LeafBasis::Rdd, x, z, r);
        const auto post = leaf_posterior(s, LeafPrior(LeafMatrix::Identity(4, 4)), 1.0);
        CHECK(post.mean[0] == doctest::Approx(1.0 / 3));
        CHECK(post.mean[1] == doctest::Approx(0.0));
        CHECK(post.mean[2] == doctest::Approx(0.0));
        CHECK(post.mean[3] == doctest::Approx(1.0 / 3));
    }
    SUBCASE("deterministic given seed") {
        const auto p = LeafPrior::isotropic(4, 1.0, 1);
        Rng a(5), b(5);
        CHECK(draw_leaf_coefficients(LeafSufficientStats(4), p, 1.0, a) ==
              draw_leaf_coefficients(LeafSufficientStats(4), p, 1.0, b));
    }
    SUBCASE("empty leaf draws from the prior") {
        LeafMatrix sigma0(4, 4);
        sigma0 << 2.0, 0.3, 0.0, 0.1, 0.3, 1.0, 0.2, 0.0, 0.0, 0.2, 0.5, 0.0, 0.1, 0.0, 0.0, 0.8;
        const LeafPrior p(sigma0);
        Rng rng(8);
        const int m = 100000;
        Eigen::MatrixXd d(m, 4);
        for (int h = 0; h < m; ++h) d.row(h) = draw_leaf_coefficients(LeafSufficientStats(4), p, 1.0, rng).transpose();
        const Eigen::RowVectorXd mean = d.colwise().mean();
        for (int c = 0; c < 4; ++c) CHECK(std::abs(mean[c]) < 4.0 * std::sqrt(sigma0(c, c) / m));
        const Eigen::MatrixXd centered = d.rowwise() - mean;
        const Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1);
        CHECK((cov - Eigen::MatrixXd(sigma0)).norm() / Eigen::MatrixXd(sigma0).norm() < 0.05);
    }
}
