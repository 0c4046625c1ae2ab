#include "barddt/leaf_model.hpp"

#include <cmath>
#include <numbers>

#include "barddt/error.hpp"

namespace barddt {

namespace {

using LeafLLT = Eigen::LLT<LeafMatrix>;

// Factor Sigma0^-1 + Psi'Psi / sigma2; always SPD when the prior is.
LeafLLT factor_posterior_precision(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2) {
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw Error("residual variance must be positive and finite");
    if (stats.dim() != prior.dim()) throw Error("leaf statistics and prior have different dimensions");
    LeafMatrix a = prior.precision() + stats.ptp / sigma2;
    LeafLLT llt(a);
    if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
        throw Error("ill-conditioned leaf system");
    }
    return llt;
}

}  // namespace

LeafVector basis_row(LeafBasis b, double x, std::uint8_t z) {
    const int d = basis_dim(b);
    LeafVector row(d);
    for (int c = 0; c < d; ++c) row[c] = basis_value(b, c, x, z);
    return row;
}

LeafPrior::LeafPrior(LeafMatrix sigma0) : sigma0_(std::move(sigma0)) {
    if (sigma0_.rows() != sigma0_.cols() || sigma0_.rows() < 1) throw Error("leaf prior must be square");
    if (!sigma0_.allFinite() || (sigma0_ - sigma0_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error("leaf prior covariance must be symmetric");
    }
    Eigen::LLT<LeafMatrix> llt(sigma0_);
    if (llt.info() != Eigen::Success) throw Error("leaf prior covariance must be positive definite");
    log_det_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    precision_ = llt.solve(LeafMatrix::Identity(sigma0_.rows(), sigma0_.cols()));
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
}

LeafPrior LeafPrior::isotropic(int dim, double scale, int num_trees) {
    if (!(scale > 0.0) || num_trees < 1) throw Error("leaf prior scale and tree count must be positive");
    return LeafPrior(LeafMatrix::Identity(dim, dim) * (scale / num_trees));
}

LeafSufficientStats accumulate_stats(LeafBasis basis, std::span<const double> x, std::span<const std::uint8_t> z,
                                     std::span<const double> r) {
    if (x.size() != z.size() || x.size() != r.size()) throw Error("leaf statistics inputs differ in length");
    LeafSufficientStats s(basis_dim(basis));
    for (std::size_t i = 0; i < x.size(); ++i) s.add(basis, x[i], z[i], r[i]);
    s.symmetrize();
    return s;
}

double leaf_log_marginal(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2) {
    const auto llt = factor_posterior_precision(stats, prior, sigma2);
    const double n = static_cast<double>(stats.n);
    // det(I + Sigma0 Psi'Psi / s2) = det(Sigma0) det(Sigma0^-1 + Psi'Psi / s2)
    const double log_det_a = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double log_det = prior.log_det_sigma0() + log_det_a;
    const LeafVector b = stats.ptr / sigma2;
    const LeafVector v = llt.matrixL().solve(b);
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * n * std::log(sigma2) - 0.5 * log_det -
           stats.rtr / (2.0 * sigma2) + 0.5 * v.squaredNorm();
}

LeafPosterior leaf_posterior(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2) {
    const auto llt = factor_posterior_precision(stats, prior, sigma2);
    const int d = prior.dim();
    LeafPosterior post;
    post.mean = llt.solve(LeafVector(stats.ptr / sigma2));
    post.covariance = llt.solve(LeafMatrix::Identity(d, d));
    return post;
}

LeafVector draw_leaf_coefficients(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2, Rng& rng) {
    const auto llt = factor_posterior_precision(stats, prior, sigma2);
    const int d = prior.dim();
    LeafVector xi(d);
    for (int k = 0; k < d; ++k) xi[k] = rng.normal();
    // A = L L' so L'^-1 xi has covariance A^-1.
    LeafVector mean = llt.solve(LeafVector(stats.ptr / sigma2));
    LeafVector noise = llt.matrixU().solve(xi);
    LeafVector out = mean + noise;
    if (!out.allFinite()) throw Error("ill-conditioned leaf system");
    return out;
}

}  // namespace barddt
