#include "barddt/polynomial.hpp"

#include <cmath>

#include "barddt/error.hpp"

namespace barddt {

void PolySpec::validate() const {
    if (!(bandwidth > 0.0)) throw Error("polynomial.bandwidth must be positive");
    if (degree_w < 1 || degree_x < 1) throw Error("polynomial degrees must be at least 1");
}

std::vector<std::string> poly_column_names(int num_features, const PolySpec& spec) {
    std::vector<std::string> names{"1"};
    for (int q = 1; q <= spec.degree_x; ++q) names.push_back(q == 1 ? "x" : "x^" + std::to_string(q));
    names.push_back("z");
    names.push_back("x*z");
    for (int j = 0; j < num_features; ++j) {
        for (int q = 1; q <= spec.degree_w; ++q) {
            const std::string base = "w" + std::to_string(j + 1) + "^" + std::to_string(q);
            names.push_back(base);
            names.push_back(base + "*x");
            names.push_back(base + "*z");
            names.push_back(base + "*x*z");
        }
    }
    return names;
}

namespace {

void fill_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double x, double z, const Eigen::Ref<const Eigen::RowVectorXd>& w,
              const PolySpec& spec) {
    Eigen::Index c = 0;
    row[c++] = 1.0;
    double xp = 1.0;
    for (int q = 1; q <= spec.degree_x; ++q) {
        xp *= x;
        row[c++] = xp;
    }
    row[c++] = z;
    row[c++] = x * z;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        double wp = 1.0;
        for (int q = 1; q <= spec.degree_w; ++q) {
            wp *= w[j];
            row[c++] = wp;
            row[c++] = wp * x;
            row[c++] = wp * z;
            row[c++] = wp * x * z;
        }
    }
}

}  // namespace

PolyDesign poly_design(const Eigen::VectorXd& x, const std::vector<std::uint8_t>& z, const Eigen::MatrixXd& w,
                       const PolySpec& spec) {
    spec.validate();
    const auto n = x.size();
    if (static_cast<Eigen::Index>(z.size()) != n || w.rows() != n) throw Error("polynomial design inputs differ in length");
    PolyDesign d;
    d.names = poly_column_names(static_cast<int>(w.cols()), spec);
    d.matrix.resize(n, static_cast<Eigen::Index>(d.names.size()));
    bool any0 = false;
    bool any1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto zi = z[static_cast<std::size_t>(i)];
        (zi ? any1 : any0) = true;
        fill_row(d.matrix.row(i), x[i], zi ? 1.0 : 0.0, w.row(i), spec);
    }
    d.z_constant = !(any0 && any1);
    return d;
}

PolyFit poly_fit(const StandardizedDataset& data, const PolySpec& spec) {
    spec.validate();
    const auto& d = data.inner;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        if (std::abs(d.x[i]) <= spec.bandwidth) rows.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd x(m);
    Eigen::VectorXd y(m);
    Eigen::MatrixXd w(m, d.w.cols());
    std::vector<std::uint8_t> z(rows.size());
    for (Eigen::Index k = 0; k < m; ++k) {
        x[k] = d.x[rows[static_cast<std::size_t>(k)]];
        y[k] = d.y[rows[static_cast<std::size_t>(k)]];
        w.row(k) = d.w.row(rows[static_cast<std::size_t>(k)]);
        z[static_cast<std::size_t>(k)] = d.z[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])];
    }
    const auto design = poly_design(x, z, w, spec);
    if (design.z_constant) throw Error("bandwidth excludes cutoff coverage");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.matrix);
    PolyFit fit;
    fit.names = design.names;
    fit.rank = static_cast<int>(qr.rank());
    fit.rows_used = rows.size();
    // solve() zeroes the coefficients of columns past the numerical rank.
    fit.coefficients = qr.solve(y);
    return fit;
}

double poly_cate(const PolyFit& fit, const Eigen::Ref<const Eigen::RowVectorXd>& w, const PolySpec& spec) {
    Eigen::RowVectorXd treated(fit.coefficients.size());
    Eigen::RowVectorXd control(fit.coefficients.size());
    fill_row(treated, 0.0, 1.0, w, spec);
    fill_row(control, 0.0, 0.0, w, spec);
    return (treated - control).dot(fit.coefficients.transpose());
}

Eigen::VectorXd poly_fit_cate(const StandardizedDataset& data, const EvaluationWindow& window, const PolySpec& spec) {
    const auto fit = poly_fit(data, spec);
    Eigen::VectorXd out(static_cast<Eigen::Index>(window.size()));
    for (std::size_t k = 0; k < window.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] =
            data.y_scale * poly_cate(fit, data.inner.w.row(static_cast<Eigen::Index>(window.indices[k])), spec);
    }
    return out;
}

}  // namespace barddt
