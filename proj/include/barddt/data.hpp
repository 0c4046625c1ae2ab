#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace barddt {

// Outcome, running variable, treatment and moderators for a sharp RDD.
// Construct through RddDataset::create, which enforces z_i = 1{x_i > cutoff}.
struct RddDataset {
    Eigen::VectorXd y;
    Eigen::VectorXd x;
    std::vector<std::uint8_t> z;
    Eigen::MatrixXd w;  // n x p
    double cutoff = 0.0;
    std::vector<std::string> w_names;

    std::size_t size() const { return static_cast<std::size_t>(y.size()); }
    std::size_t num_moderators() const { return static_cast<std::size_t>(w.cols()); }

    // Builds a dataset with z recomputed from x and cutoff.
    static RddDataset create(Eigen::VectorXd y, Eigen::VectorXd x, Eigen::MatrixXd w, double cutoff);

    // Throws barddt::Error describing the first violated invariant.
    void validate() const;
};

struct StandardizedDataset {
    RddDataset inner;  // cutoff is 0, x has unit sample sd
    double x_shift = 0.0;
    double x_scale = 1.0;
    double y_shift = 0.0;
    double y_scale = 1.0;

    double x_to_original(double xs) const { return xs * x_scale + x_shift; }
    double y_to_original(double ys) const { return ys * y_scale + y_shift; }
};

struct EvaluationWindow {
    double delta = 0.1;
    std::vector<std::size_t> indices;  // 0-based rows with |x_i| <= delta

    std::size_t size() const { return indices.size(); }
};

double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& v);
double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v);

StandardizedDataset standardize(const RddDataset& data, bool center_y = true);
RddDataset destandardize(const StandardizedDataset& data);

EvaluationWindow evaluation_window(const StandardizedDataset& data, double delta = 0.1);

struct ColumnMap {
    std::string y;
    std::string x;
    std::vector<std::string> w;
    std::optional<std::string> z;  // validated against the cutoff rule when present
    double cutoff = 0.0;
};

// Header-plus-rows CSV table of numeric cells, kept as text until requested.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;  // throws on missing column
    Eigen::VectorXd numeric_column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
RddDataset load_csv(const std::string& path, const ColumnMap& columns);

}  // namespace barddt
