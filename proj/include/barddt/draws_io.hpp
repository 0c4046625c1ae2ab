#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "barddt/models.hpp"
#include "barddt/tree.hpp"

namespace barddt {

// Header draw,sigma2,tau_<row>... with 1-based data rows; sigma2 is NA when absent.
void write_draws_csv(std::ostream& out, const CateDraws& draws);
CateDraws read_draws_csv(const std::string& path);

// Block "draw <h>" followed by each tree.
void write_forest(std::ostream& out, std::size_t draw, const std::vector<Tree>& forest);
std::vector<std::vector<Tree>> read_forests(std::istream& in, std::size_t num_trees);

// Round-trip safe decimal text.
std::string format_exact(double v);

}  // namespace barddt
