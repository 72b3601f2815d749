#include "treepca/interp.hpp"

#include <cmath>
#include <string>

namespace treepca {

MagicGrid MagicGrid::build(const Eigen::MatrixXd& B) {
  const int ncand = static_cast<int>(B.rows());
  const int n = static_cast<int>(B.cols());
  if (n < 1) throw std::invalid_argument("empty basis");
  if (ncand < n) throw std::invalid_argument("candidate pool smaller than the basis dimension");

  const double scale = B.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;

  MagicGrid grid;
  grid.point_indices_.reserve(n);
  grid.basis_indices_.reserve(n);

  // R starts as B; after step k it holds the residual functions, which vanish
  // at every chosen point and in every chosen basis direction. Eliminating
  // the pivot row and column is the matrix form of subtracting the partial
  // interpolant, so the greedy never revisits a chosen point or index.
  Eigen::MatrixXd R = B;
  for (int k = 0; k < n; ++k) {
    int pi = -1, pj = -1;
    double best = -1.0;
    for (int i = 0; i < ncand; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = std::abs(R(i, j));
        if (v > best) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    }
    if (best <= tol)
      throw UnisolvenceError(
          k, "candidate pool cannot resolve the basis (pivot " + std::to_string(best) +
                 " at step " + std::to_string(k) + ")");
    grid.point_indices_.push_back(pi);
    grid.basis_indices_.push_back(pj);
    R -= (R.col(pj) / R(pi, pj)) * R.row(pi);
  }

  grid.interp_matrix_.resize(n, n);
  for (int k = 0; k < n; ++k) grid.interp_matrix_.row(k) = B.row(grid.point_indices_[k]);
  grid.lu_.compute(grid.interp_matrix_);
  return grid;
}

Eigen::MatrixXd MagicGrid::interp_coeffs(const Eigen::MatrixXd& values_at_points) const {
  if (values_at_points.rows() != interp_matrix_.rows())
    throw std::invalid_argument("value rows must match the number of interpolation points");
  return lu_.solve(values_at_points);
}

}  // namespace treepca
