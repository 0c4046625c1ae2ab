#include "barddt/models.hpp"

#include <cmath>

#include "barddt/error.hpp"

namespace barddt {

namespace {

std::vector<double> window_point(const RddDataset& d, std::size_t row, double x) {
    std::vector<double> p;
    p.reserve(d.num_moderators() + 2);
    p.push_back(x);
    for (Eigen::Index c = 0; c < d.w.cols(); ++c) p.push_back(d.w(static_cast<Eigen::Index>(row), c));
    return p;
}

// Split features (x, w_1..w_p) for the listed rows.
std::vector<std::vector<double>> rdd_features(const RddDataset& d, const std::vector<std::size_t>& rows) {
    std::vector<std::vector<double>> f(d.num_moderators() + 1);
    for (auto& col : f) col.reserve(rows.size());
    for (std::size_t i : rows) {
        const auto ii = static_cast<Eigen::Index>(i);
        f[0].push_back(d.x[ii]);
        for (Eigen::Index c = 0; c < d.w.cols(); ++c) f[static_cast<std::size_t>(c) + 1].push_back(d.w(ii, c));
    }
    return f;
}

std::vector<std::size_t> all_rows(const RddDataset& d) {
    std::vector<std::size_t> rows(d.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return rows;
}

CateDraws empty_draws(std::string_view method, const EvaluationWindow& window, const SamplerConfig& cfg) {
    if (window.indices.empty()) throw Error("evaluation window is empty");
    CateDraws out;
    out.method = std::string(method);
    out.window = window.indices;
    out.draws.resize(cfg.num_draws, static_cast<Eigen::Index>(window.size()));
    return out;
}

double forest_value(const std::vector<Tree>& forest, std::span<const double> point) {
    double total = 0.0;
    for (const auto& t : forest) total += t.node(t.route(point)).gamma[0];
    return total;
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Barddt: return "barddt";
        case Method::TBart: return "tbart";
        case Method::SBart: return "sbart";
        case Method::Polynomial: return "polynomial";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "barddt") return Method::Barddt;
    if (name == "tbart") return Method::TBart;
    if (name == "sbart") return Method::SBart;
    if (name == "polynomial") return Method::Polynomial;
    throw Error("unknown method '" + std::string(name) + "'");
}

double barddt_cate(const std::vector<Tree>& forest, std::span<const double> w) {
    double total = 0.0;
    for (const auto& t : forest) total += t.node(route(t, 0.0, w)).gamma[kDeltaIndex];
    return total;
}

TrainingSet barddt_training_set(const StandardizedDataset& data) {
    const auto& d = data.inner;
    TrainingSet ts;
    ts.basis = LeafBasis::Rdd;
    ts.y.assign(d.y.data(), d.y.data() + d.y.size());
    ts.x.assign(d.x.data(), d.x.data() + d.x.size());
    ts.z = d.z;
    ts.features = rdd_features(d, all_rows(d));
    return ts;
}

CateDraws fit_barddt(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config) {
    SamplerConfig cfg = config.sampler;
    cfg.leaf_scale = config.barddt_leaf_scale;
    auto out = empty_draws("barddt", window, cfg);
    const auto ts = barddt_training_set(data);

    std::vector<std::vector<double>> moderators;
    for (std::size_t i : window.indices) {
        auto p = window_point(data.inner, i, 0.0);
        moderators.emplace_back(p.begin() + 1, p.end());
    }
    const double scale = data.y_scale;
    const auto post = run_chain(ts, cfg, [&](std::size_t h, const Sampler& s) {
        for (std::size_t k = 0; k < moderators.size(); ++k) {
            out.draws(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)) =
                scale * barddt_cate(s.forest(), moderators[k]);
        }
        if (config.on_barddt_draw) config.on_barddt_draw(h, s);
    });
    for (double s2 : post.sigma2) out.sigma2.push_back(s2 * scale * scale);
    out.moves = post.moves;
    return out;
}

CateDraws fit_sbart(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config) {
    SamplerConfig cfg = config.sampler;
    cfg.leaf_scale = config.bart_leaf_scale;
    auto out = empty_draws("sbart", window, cfg);
    const auto& d = data.inner;

    TrainingSet ts;
    ts.basis = LeafBasis::Constant;
    ts.y.assign(d.y.data(), d.y.data() + d.y.size());
    ts.x.assign(d.x.data(), d.x.data() + d.x.size());
    ts.z = d.z;
    ts.features = rdd_features(d, all_rows(d));
    ts.features.emplace_back(d.z.begin(), d.z.end());

    std::vector<std::vector<double>> treated_pts;
    std::vector<std::vector<double>> control_pts;
    for (std::size_t i : window.indices) {
        auto p = window_point(d, i, 0.0);
        p.push_back(1.0);
        treated_pts.push_back(p);
        p.back() = 0.0;
        control_pts.push_back(std::move(p));
    }
    const double scale = data.y_scale;
    const auto post = run_chain(ts, cfg, [&](std::size_t h, const Sampler& s) {
        for (std::size_t k = 0; k < treated_pts.size(); ++k) {
            out.draws(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)) =
                scale * (forest_value(s.forest(), treated_pts[k]) - forest_value(s.forest(), control_pts[k]));
        }
    });
    for (double s2 : post.sigma2) out.sigma2.push_back(s2 * scale * scale);
    out.moves = post.moves;
    return out;
}

CateDraws fit_tbart(const StandardizedDataset& data, const EvaluationWindow& window, const ModelConfig& config) {
    SamplerConfig cfg = config.sampler;
    cfg.leaf_scale = config.bart_leaf_scale;
    auto out = empty_draws("tbart", window, cfg);
    const auto& d = data.inner;

    std::vector<std::size_t> treated;
    std::vector<std::size_t> control;
    for (std::size_t i = 0; i < d.size(); ++i) (d.z[i] ? treated : control).push_back(i);
    if (treated.empty() || control.empty()) throw Error("degenerate design: one treatment arm is empty");

    std::vector<std::vector<double>> points;
    for (std::size_t i : window.indices) points.push_back(window_point(d, i, 0.0));

    // Returns arm predictions at the window points on the sampling scale of
    // the full data.
    auto fit_arm = [&](const std::vector<std::size_t>& rows, std::uint64_t seed) {
        TrainingSet ts;
        ts.basis = LeafBasis::Constant;
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) y[static_cast<Eigen::Index>(k)] = d.y[static_cast<Eigen::Index>(rows[k])];
        const double mean = sample_mean(y);
        const double sd_raw = sample_sd(y);
        const double sd = sd_raw > 0.0 ? sd_raw : 1.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            ts.y.push_back((y[static_cast<Eigen::Index>(k)] - mean) / sd);
            ts.x.push_back(d.x[static_cast<Eigen::Index>(rows[k])]);
            ts.z.push_back(d.z[rows[k]]);
        }
        ts.features = rdd_features(d, rows);
        SamplerConfig arm_cfg = cfg;
        arm_cfg.seed = seed;
        Eigen::MatrixXd pred(cfg.num_draws, static_cast<Eigen::Index>(points.size()));
        const auto post = run_chain(ts, arm_cfg, [&](std::size_t h, const Sampler& s) {
            for (std::size_t k = 0; k < points.size(); ++k) {
                pred(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)) =
                    mean + sd * forest_value(s.forest(), points[k]);
            }
        });
        out.moves.grow_proposed += post.moves.grow_proposed;
        out.moves.grow_accepted += post.moves.grow_accepted;
        out.moves.prune_proposed += post.moves.prune_proposed;
        out.moves.prune_accepted += post.moves.prune_accepted;
        return pred;
    };

    const Eigen::MatrixXd f1 = fit_arm(treated, mix_seed(cfg.seed, 1));
    const Eigen::MatrixXd f0 = fit_arm(control, mix_seed(cfg.seed, 2));
    out.draws = data.y_scale * (f1 - f0);
    return out;
}

Eigen::VectorXd posterior_mean_cate(const CateDraws& draws) {
    if (draws.draws.rows() < 1) throw Error("no posterior draws");
    return draws.draws.colwise().mean().transpose();
}

}  // namespace barddt
