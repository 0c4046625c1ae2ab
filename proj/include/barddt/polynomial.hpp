#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "barddt/data.hpp"

namespace barddt {

struct PolySpec {
    double bandwidth = 0.5;  // standardized x units
    int degree_w = 4;
    int degree_x = 3;

    void validate() const;
};

struct PolyDesign {
    Eigen::MatrixXd matrix;
    std::vector<std::string> names;
    bool z_constant = false;  // z is collinear with the intercept
};

// Column order: 1; x^1..x^dx; z; x*z; then for each feature j and power q:
// w_j^q, w_j^q*x, w_j^q*z, w_j^q*x*z.
PolyDesign poly_design(const Eigen::VectorXd& x, const std::vector<std::uint8_t>& z, const Eigen::MatrixXd& w,
                       const PolySpec& spec);
std::vector<std::string> poly_column_names(int num_features, const PolySpec& spec);

struct PolyFit {
    Eigen::VectorXd coefficients;  // aliased columns are zero
    std::vector<std::string> names;
    int rank = 0;
    std::size_t rows_used = 0;
};

// OLS on the rows with |x| <= bandwidth.
PolyFit poly_fit(const StandardizedDataset& data, const PolySpec& spec);

// prediction(0, 1, w) - prediction(0, 0, w) for one moderator row.
double poly_cate(const PolyFit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& w, const PolySpec& spec);

// CATE at the window rows, in original y units.
Eigen::VectorXd poly_fit_cate(const StandardizedDataset& data, const EvaluationWindow& window, const PolySpec& spec);

}  // namespace barddt
