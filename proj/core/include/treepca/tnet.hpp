#pragma once
// Tree tensor networks: per-node coefficient tensors gluing the nodes of a
// dimension partition tree into one multivariate function, plus small-scale
// dense conversion and a truncated-SVD oracle used to validate the sampling
// algorithm against exact low-rank truncations.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "treepca/bases.hpp"
#include "treepca/dimtree.hpp"

namespace treepca {

// Learned (or hand-built) representation. Coefficient layout per node:
//  - active tree leaf: matrix [r x n], one orthonormal-basis coefficient row
//    per component;
//  - interior node and root: matrix [r x prod(son sizes)], the column index
//    running row-major over the sons in son order (first son slowest); a son
//    contributes its rank if active, its full leaf dimension otherwise;
//  - inactive leaf: no storage (its identity basis is implicit).
// The root has r = 1.
class TreeTensor {
 public:
  DimensionTree tree;
  ActiveSet active;
  std::vector<FeatureSpace> leaf_spaces;  // by dimension, index nu-1
  std::vector<Eigen::MatrixXd> coeff;     // by node index
  bool orthonormal_components = false;

  // Components contributed by a node to its parent: rank if active, leaf
  // dimension if an inactive leaf.
  int son_size(int node) const;
  int rank_of(int node) const;  // rows of the node's coefficient block (root: 1)

  RankTuple realized_ranks() const;
  LeafDims leaf_dims() const;
  std::int64_t storage() const;

  void validate() const;  // shape consistency with tree/active/spaces

  // Max entrywise deviation of the component Gram matrices from identity,
  // over all active nodes, computed by contracting Grams bottom-up. Zero (to
  // rounding) iff the orthonormal-component flag is legitimate.
  double component_gram_defect() const;

  // Frobenius norm of the root coefficients; equals the L2(mu) norm of the
  // represented function when components are orthonormal. Throws otherwise.
  double norm() const;

  // Versioned JSON container: tree text, feature-space names, row-major
  // coefficient arrays with shapes.
  std::string serialize() const;
  static TreeTensor deserialize(const std::string& json_text);
};

// Coefficients on the full product basis, row-major (dimension 1 slowest).
struct DenseTensor {
  std::vector<int> shape;
  Eigen::VectorXd values;

  std::int64_t size() const { return values.size(); }
  double& at(const std::vector<int>& index);
  double at(const std::vector<int>& index) const;
  // Function value at a point: contracts the coefficients with the
  // orthonormal basis rows of the given feature spaces.
  double eval(const std::vector<FeatureSpace>& spaces, const std::vector<double>& point) const;
  double norm() const { return values.norm(); }
};

// Entry cap for dense conversions; guards accidental exponential blowups.
inline constexpr std::int64_t kDenseCap = 10'000'000;

std::vector<double> eval_tree(const TreeTensor& tt, const std::vector<std::vector<double>>& points);
Eigen::VectorXd eval_tree(const TreeTensor& tt, const Eigen::MatrixXd& points);  // rows = points

DenseTensor to_dense(const TreeTensor& tt);

struct AlphaSvd {
  Eigen::MatrixXd left;        // [dim over alpha x rank]
  Eigen::VectorXd sigma;       // all singular values of the matricisation
  Eigen::MatrixXd right;       // [dim over complement x rank]
  int rank = 0;                // columns kept
  double truncation_error = 0; // Frobenius norm of the dropped tail
};

// SVD of the alpha-matricisation (rows: dims in alpha, sorted; columns: the
// complement). Keeps `rank` terms, or when rank < 0 the smallest rank whose
// squared tail is below (tol * full norm)^2. alpha must be a nonempty strict
// subset of {1..d}.
AlphaSvd dense_alpha_svd(const DenseTensor& x, const Node& alpha, int rank, double tol = 0.0);

}  // namespace treepca
