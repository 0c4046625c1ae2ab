#include "barddt/data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "barddt/error.hpp"

namespace barddt {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') {
        out = out.substr(1, out.size() - 2);
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

RddDataset RddDataset::create(Eigen::VectorXd y, Eigen::VectorXd x, Eigen::MatrixXd w, double cutoff) {
    RddDataset d;
    d.y = std::move(y);
    d.x = std::move(x);
    d.w = std::move(w);
    d.cutoff = cutoff;
    d.z.resize(static_cast<std::size_t>(d.x.size()));
    for (Eigen::Index i = 0; i < d.x.size(); ++i) {
        d.z[static_cast<std::size_t>(i)] = d.x[i] > cutoff ? 1 : 0;
    }
    for (Eigen::Index j = 0; j < d.w.cols(); ++j) d.w_names.push_back("w" + std::to_string(j + 1));
    d.validate();
    return d;
}

void RddDataset::validate() const {
    const auto n = y.size();
    if (n < 1) throw Error("dataset is empty");
    if (x.size() != n || static_cast<Eigen::Index>(z.size()) != n || w.rows() != n) {
        throw Error("dataset columns have unequal lengths");
    }
    if (!y.allFinite() || !x.allFinite() || !w.allFinite() || !std::isfinite(cutoff)) {
        throw Error("dataset contains missing or non-finite values");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool treated = x[i] > cutoff;
        if (static_cast<bool>(z[static_cast<std::size_t>(i)]) != treated) {
            throw Error("treatment indicator violates assignment rule at row " + std::to_string(i + 1));
        }
    }
}

double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() == 0) return 0.0;
    return v.mean();
}

double sample_sd(const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (v.size() < 2) return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

StandardizedDataset standardize(const RddDataset& data, bool center_y) {
    data.validate();
    const double sx = sample_sd(data.x);
    if (!(sx > 0.0)) throw Error("degenerate running variable");

    StandardizedDataset out;
    out.inner = data;
    out.x_shift = data.cutoff;
    out.x_scale = sx;
    out.inner.x = (data.x.array() - data.cutoff) / sx;
    out.inner.cutoff = 0.0;

    if (center_y) {
        const double sy = sample_sd(data.y);
        out.y_shift = sample_mean(data.y);
        // A constant outcome keeps unit scale so the inverse map stays defined.
        out.y_scale = sy > 0.0 ? sy : 1.0;
        out.inner.y = (data.y.array() - out.y_shift) / out.y_scale;
    }
    return out;
}

RddDataset destandardize(const StandardizedDataset& data) {
    RddDataset out = data.inner;
    out.x = data.inner.x.array() * data.x_scale + data.x_shift;
    out.y = data.inner.y.array() * data.y_scale + data.y_shift;
    out.cutoff = data.x_shift;
    return out;
}

EvaluationWindow evaluation_window(const StandardizedDataset& data, double delta) {
    if (!(delta > 0.0)) throw Error("evaluation window half-width must be positive");
    EvaluationWindow win;
    win.delta = delta;
    const auto& x = data.inner.x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) <= delta) win.indices.push_back(static_cast<std::size_t>(i));
    }
    if (win.indices.empty()) throw Error("no observations near cutoff");
    return win;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return j;
    }
    throw Error("missing column '" + name + "'");
}

Eigen::VectorXd CsvTable::numeric_column(const std::string& name) const {
    const auto j = column(name);
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double v = 0.0;
        if (!parse_double(rows[i][j], v)) {
            // Row numbers count the header as line 1.
            throw Error("non-numeric value '" + rows[i][j] + "' at line " + std::to_string(i + 2) +
                        ", column '" + name + "'");
        }
        out[static_cast<Eigen::Index>(i)] = v;
    }
    return out;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("'" + path + "' has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    table.header = split_line(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            throw Error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                        std::to_string(table.header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

RddDataset load_csv(const std::string& path, const ColumnMap& columns) {
    const auto table = read_csv(path);
    if (table.rows.empty()) throw Error("'" + path + "' has no data rows");
    Eigen::VectorXd y = table.numeric_column(columns.y);
    Eigen::VectorXd x = table.numeric_column(columns.x);
    Eigen::MatrixXd w(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(columns.w.size()));
    for (std::size_t j = 0; j < columns.w.size(); ++j) {
        w.col(static_cast<Eigen::Index>(j)) = table.numeric_column(columns.w[j]);
    }
    auto data = RddDataset::create(std::move(y), std::move(x), std::move(w), columns.cutoff);
    data.w_names = columns.w;

    if (columns.z) {
        const Eigen::VectorXd zcol = table.numeric_column(*columns.z);
        for (Eigen::Index i = 0; i < zcol.size(); ++i) {
            if (zcol[i] != 0.0 && zcol[i] != 1.0) {
                throw Error("treatment column '" + *columns.z + "' is not 0/1 at line " + std::to_string(i + 2));
            }
            if (static_cast<std::uint8_t>(zcol[i]) != data.z[static_cast<std::size_t>(i)]) {
                throw Error("treatment column '" + *columns.z + "' inconsistent with cutoff rule at line " +
                            std::to_string(i + 2));
            }
        }
    }
    return data;
}

}  // namespace barddt
