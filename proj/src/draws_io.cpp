#include "barddt/draws_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "barddt/data.hpp"
#include "barddt/error.hpp"

namespace barddt {

std::string format_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_draws_csv(std::ostream& out, const CateDraws& draws) {
    out << "draw,sigma2";
    for (std::size_t row : draws.window) out << ",tau_" << row + 1;
    out << '\n';
    const bool has_sigma = draws.sigma2.size() == draws.num_draws();
    for (std::size_t h = 0; h < draws.num_draws(); ++h) {
        out << h << ',' << (has_sigma ? format_exact(draws.sigma2[h]) : "NA");
        for (std::size_t k = 0; k < draws.num_points(); ++k) {
            out << ',' << format_exact(draws.draws(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(k)));
        }
        out << '\n';
    }
}

CateDraws read_draws_csv(const std::string& path) {
    const auto table = read_csv(path);
    if (table.header.size() < 3 || table.header[0] != "draw" || table.header[1] != "sigma2") {
        throw Error(path + ": not a draws file (expected header draw,sigma2,tau_<row>...)");
    }
    CateDraws out;
    for (std::size_t j = 2; j < table.header.size(); ++j) {
        const auto& name = table.header[j];
        std::size_t row = 0;
        std::size_t used = 0;
        try {
            if (name.rfind("tau_", 0) != 0) throw std::invalid_argument(name);
            row = std::stoul(name.substr(4), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != name.size() - 4 || row == 0) {
            throw Error(path + ": column " + std::to_string(j + 1) + " '" + name + "' is not tau_<row>");
        }
        out.window.push_back(row - 1);
    }
    const auto m = static_cast<Eigen::Index>(table.rows.size());
    out.draws.resize(m, static_cast<Eigen::Index>(out.window.size()));
    bool has_sigma = true;
    for (Eigen::Index h = 0; h < m; ++h) {
        if (table.rows[static_cast<std::size_t>(h)][1] == "NA") has_sigma = false;
    }
    for (std::size_t j = 2; j < table.header.size(); ++j) {
        out.draws.col(static_cast<Eigen::Index>(j - 2)) = table.numeric_column(table.header[j]);
    }
    if (has_sigma) {
        const auto s = table.numeric_column("sigma2");
        out.sigma2.assign(s.data(), s.data() + s.size());
    }
    return out;
}

void write_forest(std::ostream& out, std::size_t draw, const std::vector<Tree>& forest) {
    out << "draw " << draw << ' ' << forest.size() << '\n';
    for (const auto& t : forest) write_tree(out, t);
}

std::vector<std::vector<Tree>> read_forests(std::istream& in, std::size_t num_trees) {
    std::vector<std::vector<Tree>> out;
    std::string word;
    while (in >> word) {
        std::size_t draw = 0;
        std::size_t count = 0;
        if (word != "draw" || !(in >> draw >> count)) throw Error("malformed forest file near draw " + std::to_string(out.size()));
        if (count != num_trees) throw Error("forest file has " + std::to_string(count) + " trees per draw, expected " +
                                            std::to_string(num_trees));
        in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
        std::vector<Tree> forest;
        for (std::size_t j = 0; j < count; ++j) forest.push_back(read_tree(in));
        out.push_back(std::move(forest));
    }
    return out;
}

}  // namespace barddt
