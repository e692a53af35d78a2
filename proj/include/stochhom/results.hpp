#pragma once

// CSV emission for single homogenizations and solver traces.

#include <string>
#include <vector>

#include "stochhom/fft_solver.hpp"

namespace stochhom {

// Versioned "kind,name,value" table: the 21 independent Mandel entries of
// c_hom (upper triangle, i <= j), the isotropic projection (raw and
// normalized by phase 0), and per-load-case iterations and residuals.
std::string homogenization_csv(const Homogenization& h, const PhaseTable& phases);

struct TraceRow {
  int load_case = 0;
  int iteration = 0;
  double eps_comp = 0.0;
  double eps_eq = 0.0;  // negative when not evaluated
};

std::string trace_csv(const std::vector<TraceRow>& rows);

}  // namespace stochhom
