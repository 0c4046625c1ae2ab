#include <doctest.h>

#include <cmath>

#include "barddt/dgp.hpp"
#include "barddt/error.hpp"

using namespace barddt;

namespace {

double sd(const Eigen::VectorXd& v) {
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

}  // namespace

TEST_CASE("toeplitz covariance") {
    const auto m5 = toeplitz_sigma(5);
    CHECK(m5.row(0) == (Eigen::RowVectorXd(5) << 2, 1.5, 1, 0.5, 0).finished());
    CHECK(toeplitz_sigma(2) == 2.0 * Eigen::MatrixXd::Identity(2, 2));
    CHECK(toeplitz_sigma(1)(0, 0) == 2.0);
    for (int p = 1; p <= 20; ++p) {
        const auto m = toeplitz_sigma(p);
        CHECK(m == m.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }
}

TEST_CASE("template functions") {
    const std::vector<double> zero{0.0, 0.0};
    CHECK(template_mu(0.0, zero, 1.0, 0.0) == doctest::Approx(5.0));
    CHECK(template_mu(-1.0, zero, 1.0, 1.0) == 0.0);
    CHECK(template_mu(-1.0, zero, 3.0, 0.0) == doctest::Approx(4.0));
    // Phi(3) / 2 + phi(0)
    CHECK(template_tau(zero) == doctest::Approx(0.898267).epsilon(1e-6));
    const std::vector<double> w{1.0, 3.0};
    const double wstar = 4.0 / std::sqrt(2.0);
    CHECK(template_mu(3.0, w, 2.0, 1.0) == doctest::Approx(2.0 * 64 + (wstar + 2) * (wstar + 2) * 2.0));
}

TEST_CASE("config checks") {
    DgpConfig c;
    c.rho = 1.0;
    CHECK_THROWS_AS(calibrate(c), Error);
    c = DgpConfig{};
    c.k4 = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = DgpConfig{};
    c.k3 = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(dgp_preset("medium1"), Error);
    const auto h = dgp_preset("hard1");
    CHECK(h.k1 == 5.0);
    CHECK(h.k2 == 0.25);
    CHECK(h.k3 == 1.0);
    CHECK(h.k4 == 0.5);
    CHECK(h.p == 4);
    CHECK(h.rho == 0.5);
}

TEST_CASE("independence case") {
    auto c = dgp_preset("easy2");
    c.calibration_size = 1000;
    const auto d = calibrate(c);
    CHECK(d.gamma.isZero());
    CHECK(d.nu == 1.0);
    CHECK(d.conditional_mean.isZero());
}

TEST_CASE("calibration targets on a fresh validation sample") {
    for (const auto& name : {"easy1", "hard1", "hard2"}) {
        auto c = dgp_preset(name);
        c.seed = 77;
        const auto d = calibrate(c);
        Rng rng(123456);  // independent of the calibration stream
        const auto w = sample_w_at_cutoff(d, 1'000'000, rng);
        Eigen::VectorXd mu(w.rows()), tau(w.rows());
        std::vector<double> row(static_cast<std::size_t>(c.p));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (int k = 0; k < c.p; ++k) row[static_cast<std::size_t>(k)] = w(i, k);
            mu[i] = d.mu(0.0, row);
            tau[i] = d.tau(row);
        }
        CAPTURE(name);
        CHECK(std::abs(sd(mu) - 1.0) < 0.01);
        CHECK(std::abs(sd(tau) - c.k2) / c.k2 < 0.01);
        CHECK(std::abs(tau.minCoeff() - c.k5) < 0.01);
    }
}

TEST_CASE("calibration is stable across seeds") {
    auto c = dgp_preset("easy1");
    c.seed = 1;
    const auto a = calibrate(c);
    c.seed = 2;
    const auto b = calibrate(c);
    CHECK(std::abs(a.tau_scale - b.tau_scale) / a.tau_scale < 0.01);
    CHECK(std::abs(a.mu_scale - b.mu_scale) / a.mu_scale < 0.01);
}

TEST_CASE("simulation") {
    auto c = dgp_preset("hard1");
    c.calibration_size = 100000;
    const auto d = calibrate(c);
    const auto s = simulate(d, 100000, 5);
    CHECK(std::abs(sd(s.data.x) * sd(s.data.x) - 1.0) < 0.02);
    const Eigen::VectorXd index = s.data.w * d.gamma;
    CHECK(std::abs(correlation(s.data.x, index) - c.rho) < 0.02);
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double z = s.data.z[i];
        CHECK(s.data.y[ii] == s.mu[ii] + s.tau[ii] * z + c.k4 * s.eps[ii]);
    }

    SUBCASE("draws near the cutoff follow the conditional law") {
        auto e = dgp_preset("easy1");
        e.calibration_size = 1000;
        const auto de = calibrate(e);
        const auto big = simulate(de, 2'000'000, 6);
        double sum = 0.0;
        int count = 0;
        for (Eigen::Index i = 0; i < big.data.x.size(); ++i) {
            if (std::abs(big.data.x[i]) < 0.02) {
                sum += big.data.w(i, 0);
                ++count;
            }
        }
        CHECK(count > 1000);
        CHECK(sum / count == doctest::Approx(de.conditional_mean[0]).epsilon(0.05));
    }
}

TEST_CASE("noiseless sample recomposes exactly") {
    auto c = dgp_preset("easy3");
    c.calibration_size = 1000;
    auto d = calibrate(c);
    d.config.k4 = 1e-300;
    const auto s = simulate(d, 500, 8);
    const Eigen::VectorXd z = Eigen::Map<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>(s.data.z.data(), 500).cast<double>();
    CHECK((s.data.y - s.mu - s.tau.cwiseProduct(z)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}
