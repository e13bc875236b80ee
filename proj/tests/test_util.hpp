#pragma once

#include "nsplab/linalg.hpp"

#include <random>

namespace nsplab::testing {

inline MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = g(rng);
  }
  return a;
}

inline SymMatrix random_sym(int n, std::mt19937_64& rng) {
  const MatrixXd g = gaussian(n, n, rng);
  return SymMatrix(MatrixXd((g + g.transpose()) / 2.0));
}

}  // namespace nsplab::testing
