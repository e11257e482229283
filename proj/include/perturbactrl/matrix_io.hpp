#pragma once

#include "perturbactrl/lti.hpp"

#include <iosfwd>
#include <string>

namespace pctrl {

// Plain-text matrix format: first line "rows cols", then one whitespace
// separated row per line, scientific notation with 17 significant digits.

void write_matrix(std::ostream& os, const Matrix& M);
Matrix read_matrix(std::istream& is);

void save_matrix(const std::string& path, const Matrix& M);
Matrix load_matrix(const std::string& path);

// A system file holds A then B, each in the matrix format above.
void save_system(const std::string& path, const LtiSystem& sys);
LtiSystem load_system(const std::string& path);

// Deterministic formatting shared with the CSV writers.
std::string format_double(double x);

}  // namespace pctrl
