#pragma once
// Interpolation on an n-dimensional function space given its basis evaluated
// on a candidate pool. Points are chosen by a greedy max-residual sweep so
// that the resulting grid is unisolvent; the selected points are always a
// subset of the pool, which gives grid nesting for free when a parent node's
// pool is the product of its sons' grids.

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace treepca {

struct UnisolvenceError : std::runtime_error {
  int step;  // greedy step (0-based) at which the pivot collapsed
  UnisolvenceError(int step_, const std::string& what) : std::runtime_error(what), step(step_) {}
};

class MagicGrid {
 public:
  // B: candidate-by-basis evaluation matrix; must have full column rank.
  // Greedy: pick the (point, basis) entry of maximal absolute residual,
  // eliminate that row and column from the residual (rank-one update), and
  // repeat n times. Ties break to the lowest candidate index, then the lowest
  // basis index. A pivot below 1e-12 * max|B| aborts with UnisolvenceError.
  static MagicGrid build(const Eigen::MatrixXd& B);

  int size() const { return static_cast<int>(point_indices_.size()); }
  const std::vector<int>& point_indices() const { return point_indices_; }
  const std::vector<int>& basis_indices() const { return basis_indices_; }

  // n-by-n matrix (phi_j(x^k)), rows in selection order; kept factorized.
  const Eigen::MatrixXd& interp_matrix() const { return interp_matrix_; }
  const Eigen::PartialPivLU<Eigen::MatrixXd>& lu() const { return lu_; }

  // Solves interp_matrix * c = values (one column per right-hand side):
  // the interpolant sum_j c_j phi_j matches the values on the grid.
  Eigen::MatrixXd interp_coeffs(const Eigen::MatrixXd& values_at_points) const;

 private:
  std::vector<int> point_indices_;
  std::vector<int> basis_indices_;
  Eigen::MatrixXd interp_matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

inline MagicGrid magic_points(const Eigen::MatrixXd& B) { return MagicGrid::build(B); }

inline Eigen::MatrixXd interp_coeffs(const MagicGrid& grid, const Eigen::MatrixXd& values) {
  return grid.interp_coeffs(values);
}

}  // namespace treepca
