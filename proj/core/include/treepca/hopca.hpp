#pragma once
// Builds a tree tensor approximation of a black-box function from adaptively
// selected point evaluations. Each active node, visited leaves to root, gets
// an empirical principal subspace computed from interpolated partial
// evaluations; the subspace's own interpolation points are selected inside
// the node's candidate grid, so grids stay nested and the evaluation count
// has a closed form.

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "treepca/bases.hpp"
#include "treepca/dimtree.hpp"
#include "treepca/rng.hpp"
#include "treepca/tnet.hpp"

namespace treepca {

// A function of d variables plus the product measure it lives on. Training
// evaluations are counted (atomically: batches may be issued concurrently);
// error estimation goes through the uncounted path.
class BlackBox {
 public:
  BlackBox() = default;
  BlackBox(std::function<double(const std::vector<double>&)> f, std::vector<Measure1D> measures)
      : f_(std::move(f)), measures_(std::move(measures)) {}

  int dimension() const { return static_cast<int>(measures_.size()); }
  const std::vector<Measure1D>& measures() const { return measures_; }

  double eval_counted(const std::vector<double>& x) {
    count_->fetch_add(1, std::memory_order_relaxed);
    return f_(x);
  }
  double eval_uncounted(const std::vector<double>& x) const { return f_(x); }

  std::int64_t eval_count() const { return count_->load(); }
  void reset_count() { count_->store(0); }

 private:
  std::function<double(const std::vector<double>&)> f_;
  std::vector<Measure1D> measures_;
  // Shared so copies of the box keep feeding one counter.
  std::shared_ptr<std::atomic<std::int64_t>> count_ =
      std::make_shared<std::atomic<std::int64_t>>(0);
};

// How many samples each node's principal component analysis gets, and when to
// stop adding components.
struct BudgetPolicy {
  enum class Mode { PrescribedRank, PrescribedTolerance };
  enum class LocalRule { Eps, EpsOverSqrtA };

  Mode mode = Mode::PrescribedRank;
  int uniform_rank = 0;   // rank mode: used when `ranks` is empty
  RankTuple ranks;        // rank mode: per-node override
  double gamma = 1.0;     // sample multiplier, >= 1 (rank mode: m = gamma*r;
                          // tolerance mode: m = gamma*dim)
  double eps = 0.0;       // tolerance mode target
  LocalRule local_rule = LocalRule::Eps;

  static BudgetPolicy prescribed_rank(int rank, double gamma = 1.0);
  static BudgetPolicy prescribed_rank(RankTuple ranks, double gamma = 1.0);
  static BudgetPolicy prescribed_tolerance(double eps, LocalRule rule = LocalRule::Eps,
                                           double gamma = 1.0);

  int rank_at(const Node& node) const;  // rank mode only
};

// Per-node outcome: orthonormal principal components in the node's working
// basis, the spectrum they were cut from, and the interpolation points kept.
struct NodeResult {
  Node node;
  Eigen::MatrixXd components;                     // [r x dim V]
  Eigen::VectorXd singular_values;                // of the scaled sample matrix
  std::vector<std::vector<double>> magic_points;  // tuples over the node's dims (sorted)
  int m_samples = 0;
  bool degenerate = false;  // PCA saw a zero matrix; one zero component kept
};

struct ApproxReport {
  std::int64_t evaluations = 0;  // training evaluations consumed (M)
  std::int64_t storage = 0;      // coefficient count of the result (S)
  std::map<Node, int> ranks;
  std::vector<NodeResult> nodes;  // bottom-up order
  bool degenerate = false;
  bool rank_clamped = false;  // some node had less sample rank than requested
};

// Evaluates u on the product of grid points (tuples over alpha's dimensions,
// sorted) and complement samples (tuples over the remaining dimensions,
// sorted); entry (i,k) pairs grid point i with sample k. Counts exactly
// #grid * #samples evaluations.
Eigen::MatrixXd partial_sample_matrix(BlackBox& u, const Node& alpha,
                                      const std::vector<std::vector<double>>& grid_alpha,
                                      const std::vector<std::vector<double>>& samples_alpha_c);

struct PcaResult {
  Eigen::MatrixXd components;  // [r x dim V], orthonormal rows
  Eigen::VectorXd sigma;
  bool degenerate = false;
  bool clamped = false;
};

// Principal components of coefficient sample columns (orthonormal basis
// assumed, so column norms are function norms). The matrix is scaled by
// 1/sqrt(m) before the SVD. rank >= 0 keeps exactly min(rank, min(rows, m))
// components (left singular vectors are orthonormal even past the numerical
// rank, and a deterministic count keeps the storage formula exact); rank < 0
// keeps the smallest r with tail energy sum_{k>r} sigma_k^2 <= tol^2 *
// sum_k sigma_k^2, the tail accumulated smallest-first to dodge cancellation.
PcaResult empirical_pca(const Eigen::MatrixXd& coeff_samples, int rank, double tol = 0.0);

std::pair<TreeTensor, ApproxReport> hopca_approximate(BlackBox& u, const DimensionTree& tree,
                                                      const ActiveSet& active,
                                                      const std::vector<FeatureSpace>& leaf_spaces,
                                                      const BudgetPolicy& policy,
                                                      std::uint64_t seed,
                                                      int candidate_pool_size = 1000);

// Closed-form evaluation count for a run that realizes exactly the given
// ranks; equals storage_complexity when gamma = 1 in rank mode.
std::int64_t predicted_evaluations(const DimensionTree& tree, const ActiveSet& active,
                                   const RankTuple& ranks, const LeafDims& leaf_dims,
                                   const BudgetPolicy& policy);

// Order-d view of the 2^d samples f(i * 2^-d): entry (i_1,...,i_d) with bits
// i_k in {0,1} is f evaluated at the binary fraction 0.i_1 i_2 ... i_d.
BlackBox tensorize(std::function<double(double)> f, int d);

}  // namespace treepca
