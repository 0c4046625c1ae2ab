#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "barddt/rng.hpp"

namespace barddt {

// Leaf design rows have at most four columns, so every leaf quantity lives on
// the stack.
constexpr int kMaxBasis = 4;
using LeafVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxBasis, 1>;
using LeafMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxBasis, kMaxBasis>;

// Which regression runs inside each leaf.
//   Rdd:      psi(x, z) = [1, z*x, (1-z)*x, z], coefficients (eta, lambda, theta, delta)
//   Constant: psi = [1], the scalar-mean leaf of ordinary BART
enum class LeafBasis : std::uint8_t { Rdd, Constant };

constexpr int basis_dim(LeafBasis b) { return b == LeafBasis::Rdd ? 4 : 1; }

// Index of the treatment offset inside an Rdd coefficient vector.
constexpr int kDeltaIndex = 3;

inline double basis_value(LeafBasis b, int col, double x, std::uint8_t z) {
    if (b == LeafBasis::Constant) return 1.0;
    switch (col) {
        case 0: return 1.0;
        case 1: return z ? x : 0.0;
        case 2: return z ? 0.0 : x;
        default: return z ? 1.0 : 0.0;
    }
}

LeafVector basis_row(LeafBasis b, double x, std::uint8_t z);

// psi(x, z) . gamma without materializing the row.
inline double basis_dot(LeafBasis b, const LeafVector& gamma, double x, std::uint8_t z) {
    if (b == LeafBasis::Constant) return gamma[0];
    return gamma[0] + (z ? gamma[1] * x + gamma[3] : gamma[2] * x);
}

// Gaussian prior N(0, sigma0) on the leaf coefficients.
class LeafPrior {
public:
    // Throws if sigma0 is not symmetric positive definite.
    explicit LeafPrior(LeafMatrix sigma0);

    // (scale / num_trees) * I in the given dimension.
    static LeafPrior isotropic(int dim, double scale, int num_trees);

    int dim() const { return static_cast<int>(sigma0_.rows()); }
    const LeafMatrix& sigma0() const { return sigma0_; }
    const LeafMatrix& precision() const { return precision_; }
    double log_det_sigma0() const { return log_det_; }

private:
    LeafMatrix sigma0_;
    LeafMatrix precision_;
    double log_det_ = 0.0;
};

// Psi' Psi, Psi' r, r' r and the count over a set of observations.
struct LeafSufficientStats {
    std::size_t n = 0;
    LeafMatrix ptp;
    LeafVector ptr;
    double rtr = 0.0;

    LeafSufficientStats() : LeafSufficientStats(kMaxBasis) {}
    explicit LeafSufficientStats(int dim) : ptp(LeafMatrix::Zero(dim, dim)), ptr(LeafVector::Zero(dim)) {}

    int dim() const { return static_cast<int>(ptr.size()); }

    void add(LeafBasis basis, double x, std::uint8_t z, double r) {
        ++n;
        rtr += r * r;
        if (basis == LeafBasis::Constant) {
            ptp(0, 0) += 1.0;
            ptr[0] += r;
            return;
        }
        // Rows are [1, x, 0, 1] or [1, 0, x, 0]: at most three nonzero entries.
        const int slope = z ? 1 : 2;
        ptp(0, 0) += 1.0;
        ptp(0, slope) += x;
        ptp(slope, slope) += x * x;
        ptr[0] += r;
        ptr[slope] += x * r;
        if (z) {
            ptp(0, 3) += 1.0;
            ptp(slope, 3) += x;
            ptp(3, 3) += 1.0;
            ptr[3] += r;
        }
    }

    // Only the upper triangle is accumulated by add(); call before use.
    void symmetrize() { ptp.template triangularView<Eigen::StrictlyLower>() = ptp.transpose(); }

    LeafSufficientStats& operator+=(const LeafSufficientStats& o) {
        n += o.n;
        ptp += o.ptp;
        ptr += o.ptr;
        rtr += o.rtr;
        return *this;
    }
    LeafSufficientStats& operator-=(const LeafSufficientStats& o) {
        n -= o.n;
        ptp -= o.ptp;
        ptr -= o.ptr;
        rtr -= o.rtr;
        return *this;
    }
};

inline LeafSufficientStats operator+(LeafSufficientStats a, const LeafSufficientStats& b) { return a += b; }

// Symmetric stats over rows (x_i, z_i, r_i). Throws on length mismatch.
LeafSufficientStats accumulate_stats(LeafBasis basis, std::span<const double> x, std::span<const std::uint8_t> z,
                                     std::span<const double> r);

// log of the integral of N(r; Psi gamma, sigma2 I) N(gamma; 0, Sigma0) over gamma.
double leaf_log_marginal(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2);

// Conjugate posterior N(m, V), V = (Sigma0^-1 + Psi'Psi / sigma2)^-1, m = V Psi'r / sigma2.
struct LeafPosterior {
    LeafVector mean;
    LeafMatrix covariance;
};
LeafPosterior leaf_posterior(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2);

LeafVector draw_leaf_coefficients(const LeafSufficientStats& stats, const LeafPrior& prior, double sigma2, Rng& rng);

}  // namespace barddt
