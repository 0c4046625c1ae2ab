#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barddt/data.hpp"
#include "barddt/rng.hpp"

namespace barddt {

// Simulation design parameters. k1 weights x in the prognostic function, k2 is
// the sd of tau(0, W) given X = 0, k3 toggles the x-w interaction in mu, k4 is
// the noise sd and k5 the minimum of tau(0, w).
struct DgpConfig {
    std::size_t n = 4000;
    int p = 2;
    double rho = 0.5;
    double gamma0 = 1.0;
    double k1 = 1.0;
    double k2 = 1.0;
    double k3 = 0.0;
    double k4 = 0.1;
    double k5 = 0.0;
    std::uint64_t seed = 20240101;
    std::size_t calibration_size = 1'000'000;

    void validate() const;
};

// Named settings: easy1..easy3 and hard1..hard3.
DgpConfig dgp_preset(const std::string& name);
std::vector<std::string> dgp_preset_names();

struct CalibratedDgp {
    DgpConfig config;
    Eigen::MatrixXd sigma_w;  // Toeplitz covariance of W
    Eigen::VectorXd gamma;    // X | W ~ N(gamma0 + W'gamma, nu)
    double nu = 1.0;
    Eigen::VectorXd conditional_mean;  // E[W | X = 0]
    Eigen::MatrixXd conditional_cov;   // Var[W | X = 0]
    double mu_scale = 1.0;
    double tau_scale = 1.0;
    double tau_center = 0.0;  // tau = tau_scale * tau_template + tau_center

    double mu(double x, std::span<const double> w) const;
    double tau(std::span<const double> w) const;
};

// (i, j) entry 2 * (1 - |i - j| / (p - 1)); [2] when p = 1.
Eigen::MatrixXd toeplitz_sigma(int p);

// k1 (x + 1)^3 + (w* + 2)^2 (sign(x + 1) sqrt|x + 1|)^k3 with w* = sum(w) / sqrt(p).
double template_mu(double x, std::span<const double> w, double k1, double k3);
// Phi(2 w_1 + 3) / 2 + phi(w_1)
double template_tau(std::span<const double> w);

// Symmetric square root of a PSD matrix (negative eigenvalues clipped).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

CalibratedDgp calibrate(const DgpConfig& config);

// count x p draws from W | X = 0.
Eigen::MatrixXd sample_w_at_cutoff(const CalibratedDgp& dgp, std::size_t count, Rng& rng);

struct SimulatedSample {
    RddDataset data;
    Eigen::VectorXd mu;
    Eigen::VectorXd tau;  // tau(x_i, w_i) = tau(0, w_i)
    Eigen::VectorXd eps;
    double noise_sd = 0.0;
};

SimulatedSample simulate(const CalibratedDgp& dgp, std::size_t n, std::uint64_t seed);

}  // namespace barddt
