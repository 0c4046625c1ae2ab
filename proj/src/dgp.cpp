#include "barddt/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "barddt/error.hpp"

namespace barddt {

void DgpConfig::validate() const {
    if (p < 1) throw Error("dgp.p must be at least 1");
    if (!(rho >= 0.0) || rho * rho >= 1.0) throw Error("dgp.rho is infeasible: need 0 <= rho < 1");
    if (k2 < 0.0) throw Error("dgp.k2 must be non-negative");
    if (!(k4 > 0.0)) throw Error("dgp.k4 must be positive");
    if (k3 != 0.0 && k3 != 1.0) throw Error("dgp.k3 must be 0 or 1");
    if (calibration_size < 2) throw Error("dgp.calibration_size must be at least 2");
}

DgpConfig dgp_preset(const std::string& name) {
    DgpConfig c;
    const bool easy = name.rfind("easy", 0) == 0;
    const bool hard = name.rfind("hard", 0) == 0;
    if (!easy && !hard) throw Error("unknown preset '" + name + "'");
    if (easy) {
        c.k1 = 1.0, c.k2 = 1.0, c.k3 = 0.0, c.k4 = 0.1;
    } else {
        c.k1 = 5.0, c.k2 = 0.25, c.k3 = 1.0, c.k4 = 0.5;
    }
    // (k5, p, rho) per row.
    if (name == "easy1") {
        c.k5 = 0.0, c.p = 2, c.rho = 0.5;
    } else if (name == "easy2") {
        c.k5 = 0.0, c.p = 4, c.rho = 0.0;
    } else if (name == "easy3") {
        c.k5 = 1.0, c.p = 2, c.rho = 0.0;
    } else if (name == "hard1") {
        c.k5 = 0.0, c.p = 4, c.rho = 0.5;
    } else if (name == "hard2") {
        c.k5 = 1.0, c.p = 2, c.rho = 0.5;
    } else if (name == "hard3") {
        c.k5 = 1.0, c.p = 4, c.rho = 0.0;
    } else {
        throw Error("unknown preset '" + name + "'");
    }
    return c;
}

std::vector<std::string> dgp_preset_names() { return {"easy1", "easy2", "easy3", "hard1", "hard2", "hard3"}; }

Eigen::MatrixXd toeplitz_sigma(int p) {
    if (p < 1) throw Error("toeplitz dimension must be at least 1");
    Eigen::MatrixXd m(p, p);
    if (p == 1) {
        m(0, 0) = 2.0;
        return m;
    }
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            m(i, j) = 2.0 * (1.0 - static_cast<double>(std::abs(i - j)) / (p - 1));
        }
    }
    return m;
}

double template_mu(double x, std::span<const double> w, double k1, double k3) {
    double sum = 0.0;
    for (double v : w) sum += v;
    const double wstar = sum / std::sqrt(static_cast<double>(w.size()));
    const double u = x + 1.0;
    const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    // k3 = 0 leaves the factor at 1, including at u = 0.
    const double factor = k3 == 0.0 ? 1.0 : std::pow(sign * std::sqrt(std::abs(u)), k3);
    return k1 * u * u * u + (wstar + 2.0) * (wstar + 2.0) * factor;
}

double template_tau(std::span<const double> w) {
    static const boost::math::normal standard;
    const double w1 = w[0];
    return boost::math::cdf(standard, 2.0 * w1 + 3.0) / 2.0 + boost::math::pdf(standard, w1);
}

double CalibratedDgp::mu(double x, std::span<const double> w) const {
    return mu_scale * template_mu(x, w, config.k1, config.k3);
}

double CalibratedDgp::tau(std::span<const double> w) const { return tau_scale * template_tau(w) + tau_center; }

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw Error("eigendecomposition failed");
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sample_w_at_cutoff(const CalibratedDgp& dgp, std::size_t count, Rng& rng) {
    const int p = dgp.config.p;
    const Eigen::MatrixXd root = psd_sqrt(dgp.conditional_cov);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), p);
    Eigen::VectorXd e(p);
    for (std::size_t i = 0; i < count; ++i) {
        for (int k = 0; k < p; ++k) e[k] = rng.normal();
        out.row(static_cast<Eigen::Index>(i)) = (dgp.conditional_mean + root * e).transpose();
    }
    return out;
}

CalibratedDgp calibrate(const DgpConfig& config) {
    config.validate();
    CalibratedDgp dgp;
    dgp.config = config;
    const int p = config.p;
    dgp.sigma_w = toeplitz_sigma(p);

    // Evenly weighted gamma with gamma' Sigma gamma = rho^2, so Var(X) = 1 and
    // Cor(X, W'gamma) = rho once nu = 1 - rho^2.
    const Eigen::VectorXd base = Eigen::VectorXd::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
    const double q = base.dot(dgp.sigma_w * base);
    dgp.gamma = config.rho == 0.0 ? Eigen::VectorXd::Zero(p) : Eigen::VectorXd(config.rho / std::sqrt(q) * base);
    dgp.nu = 1.0 - config.rho * config.rho;

    // Gaussian conditioning of (W, X) on X = 0 with Cov(W, X) = Sigma gamma, Var(X) = 1.
    const Eigen::VectorXd cov_wx = dgp.sigma_w * dgp.gamma;
    dgp.conditional_mean = -config.gamma0 * cov_wx;
    dgp.conditional_cov = dgp.sigma_w - cov_wx * cov_wx.transpose();

    Rng rng(mix_seed(config.seed, 0xCA11B));
    const auto sample = sample_w_at_cutoff(dgp, config.calibration_size, rng);
    const auto m = static_cast<Eigen::Index>(config.calibration_size);
    Eigen::VectorXd mu_vals(m);
    Eigen::VectorXd tau_vals(m);
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int k = 0; k < p; ++k) row[static_cast<std::size_t>(k)] = sample(i, k);
        mu_vals[i] = template_mu(0.0, row, config.k1, config.k3);
        tau_vals[i] = template_tau(row);
    }
    const double mu_sd = sample_sd(mu_vals);
    const double tau_sd = sample_sd(tau_vals);
    if (!(mu_sd > 0.0) || !(tau_sd > 0.0)) throw Error("calibration sample is degenerate");
    dgp.mu_scale = 1.0 / mu_sd;
    dgp.tau_scale = config.k2 / tau_sd;
    dgp.tau_center = config.k5 - dgp.tau_scale * tau_vals.minCoeff();
    return dgp;
}

SimulatedSample simulate(const CalibratedDgp& dgp, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw Error("simulation size must be positive");
    const int p = dgp.config.p;
    const auto nn = static_cast<Eigen::Index>(n);
    Rng rng(seed);
    const Eigen::MatrixXd root = psd_sqrt(dgp.sigma_w);
    Eigen::MatrixXd w(nn, p);
    Eigen::VectorXd x(nn);
    Eigen::VectorXd e(p);
    const double sd_x = std::sqrt(dgp.nu);
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (int k = 0; k < p; ++k) e[k] = rng.normal();
        w.row(i) = (root * e).transpose();
        x[i] = dgp.config.gamma0 + w.row(i).dot(dgp.gamma) + sd_x * rng.normal();
    }

    SimulatedSample s;
    s.noise_sd = dgp.config.k4;
    s.mu.resize(nn);
    s.tau.resize(nn);
    s.eps.resize(nn);
    Eigen::VectorXd y(nn);
    std::vector<double> row(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < nn; ++i) {
        for (int k = 0; k < p; ++k) row[static_cast<std::size_t>(k)] = w(i, k);
        s.mu[i] = dgp.mu(x[i], row);
        s.tau[i] = dgp.tau(row);
        s.eps[i] = rng.normal();
        const double z = x[i] > 0.0 ? 1.0 : 0.0;
        y[i] = s.mu[i] + s.tau[i] * z + dgp.config.k4 * s.eps[i];
    }
    s.data = RddDataset::create(std::move(y), std::move(x), std::move(w), 0.0);
    return s;
}

}  // namespace barddt
