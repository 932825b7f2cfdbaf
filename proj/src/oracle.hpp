#pragma once

// Exact minimization of the anisotropic relaxed functional
//   tv_anisotropic(v) + sum_b s_b |h_b - (T v)_b|
// at desk scale. A minimizer with values in the set of boundary levels
// exists; each threshold between consecutive levels is a binary min-cut.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "grid.hpp"

namespace lsgrad {

class SizeLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kOracleMaxCells = 4096;
inline constexpr std::size_t kOracleMaxLevels = 4096;
inline constexpr std::size_t kExhaustiveMaxCells = 16;
inline constexpr std::size_t kExhaustiveMaxLevels = 8;
inline constexpr double kExhaustiveMaxAssignments = 5e7;

struct OracleResult {
  double value = 0.0;
  BulkField u;
  std::vector<double> levels;     // sorted distinct boundary values
  std::vector<double> cut_values; // min-cut value between levels k and k+1
  bool nested = true;             // level sets shrink as the threshold rises
};

OracleResult coarea_mincut_min_phi(const Grid& grid, const BoundaryData& h);

double exhaustive_min_phi(const Grid& grid, const BoundaryData& h);

}  // namespace lsgrad
