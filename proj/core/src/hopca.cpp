#include "treepca/hopca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "treepca/interp.hpp"

namespace treepca {

namespace {

// Number of PCA samples a node gets: proportional to the requested rank in
// rank mode, to the working-space dimension in tolerance mode.
int samples_for(const BudgetPolicy& policy, int requested_rank, int space_dim) {
  if (policy.mode == BudgetPolicy::Mode::PrescribedRank) {
    return std::max(requested_rank,
                    static_cast<int>(std::lround(policy.gamma * requested_rank)));
  }
  return std::max(1, static_cast<int>(std::lround(policy.gamma * space_dim)));
}

using MatOp = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// Applies `op` to axis `ax` of F, whose rows are indexed row-major by `sizes`
// (first axis slowest). op maps [sizes[ax] x q] to [n' x q]; sizes[ax] is
// updated to n'.
Eigen::MatrixXd apply_axis(const Eigen::MatrixXd& F, std::vector<int>& sizes, int ax,
                           const MatOp& op) {
  std::int64_t left = 1, right = 1;
  for (int i = 0; i < ax; ++i) left *= sizes[i];
  for (int i = ax + 1; i < static_cast<int>(sizes.size()); ++i) right *= sizes[i];
  const int n = sizes[ax];
  const auto cols = F.cols();

  Eigen::MatrixXd gathered(n, left * right * cols);
  for (std::int64_t l = 0; l < left; ++l)
    for (int j = 0; j < n; ++j)
      for (std::int64_t r = 0; r < right; ++r)
        gathered.block(j, (l * right + r) * cols, 1, cols) = F.row((l * n + j) * right + r);

  Eigen::MatrixXd mapped = op(gathered);
  const int n2 = static_cast<int>(mapped.rows());

  Eigen::MatrixXd out(left * n2 * right, cols);
  for (std::int64_t l = 0; l < left; ++l)
    for (int j = 0; j < n2; ++j)
      for (std::int64_t r = 0; r < right; ++r)
        out.row((l * n2 + j) * right + r) = mapped.block(j, (l * right + r) * cols, 1, cols);

  sizes[ax] = n2;
  return out;
}

// Interpolation state a finished node exposes to its parent: the grid points
// kept (tuples over the node's sorted dimensions) and the factorized
// interpolation operator on them.
struct NodeState {
  std::vector<std::vector<double>> points;
  MagicGrid grid;
  int size = 0;
};

// Draws `count` tuples over the complement of `alpha`, one value per missing
// dimension in ascending order.
std::vector<std::vector<double>> draw_complement_samples(const Node& alpha,
                                                         const std::vector<Measure1D>& measures,
                                                         int count, RngStream& rng) {
  const int d = static_cast<int>(measures.size());
  std::vector<int> missing;
  for (int nu = 1; nu <= d; ++nu)
    if (!std::binary_search(alpha.begin(), alpha.end(), nu)) missing.push_back(nu);
  std::vector<std::vector<double>> samples(count, std::vector<double>(missing.size()));
  for (int k = 0; k < count; ++k)
    for (std::size_t i = 0; i < missing.size(); ++i)
      samples[k][i] = sample_one(measures[missing[i] - 1], rng);
  return samples;
}

// Cartesian product of the sons' grids, emitted as tuples over the parent's
// sorted dimensions; tuple index is row-major with the first son slowest,
// matching the coefficient column layout.
std::vector<std::vector<double>> product_grid(const DimensionTree& tree, int node_idx,
                                              const std::vector<const NodeState*>& son_states) {
  const Node& alpha = tree.nodes[node_idx];
  const auto& sons = tree.sons[node_idx];
  const int nsons = static_cast<int>(sons.size());

  // Positions of each son's dimensions inside the parent's sorted tuple.
  std::vector<std::vector<int>> slot(nsons);
  for (int s = 0; s < nsons; ++s) {
    for (int dim : tree.nodes[sons[s]]) {
      auto it = std::lower_bound(alpha.begin(), alpha.end(), dim);
      slot[s].push_back(static_cast<int>(it - alpha.begin()));
    }
  }

  std::int64_t total = 1;
  for (const auto* st : son_states) total *= st->size;
  std::vector<std::vector<double>> grid(total, std::vector<double>(alpha.size()));
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t rem = idx;
    for (int s = nsons - 1; s >= 0; --s) {
      const int js = static_cast<int>(rem % son_states[s]->size);
      rem /= son_states[s]->size;
      const auto& pt = son_states[s]->points[js];
      for (std::size_t i = 0; i < pt.size(); ++i) grid[idx][slot[s][i]] = pt[i];
    }
  }
  return grid;
}

std::string node_label(const Node& node) { return node_to_string(node); }

}  // namespace

BudgetPolicy BudgetPolicy::prescribed_rank(int rank, double gamma) {
  if (rank < 1) throw std::invalid_argument("prescribed rank must be >= 1");
  if (gamma < 1.0) throw std::invalid_argument("sample multiplier must be >= 1");
  BudgetPolicy p;
  p.mode = Mode::PrescribedRank;
  p.uniform_rank = rank;
  p.gamma = gamma;
  return p;
}

BudgetPolicy BudgetPolicy::prescribed_rank(RankTuple ranks, double gamma) {
  if (gamma < 1.0) throw std::invalid_argument("sample multiplier must be >= 1");
  BudgetPolicy p;
  p.mode = Mode::PrescribedRank;
  p.ranks = std::move(ranks);
  return p.gamma = gamma, p;
}

BudgetPolicy BudgetPolicy::prescribed_tolerance(double eps, LocalRule rule, double gamma) {
  if (!(eps > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (gamma < 1.0) throw std::invalid_argument("sample multiplier must be >= 1");
  BudgetPolicy p;
  p.mode = Mode::PrescribedTolerance;
  p.eps = eps;
  p.local_rule = rule;
  p.gamma = gamma;
  return p;
}

int BudgetPolicy::rank_at(const Node& node) const {
  if (mode != Mode::PrescribedRank)
    throw std::logic_error("rank_at is only meaningful in prescribed-rank mode");
  if (!ranks.r.empty()) return ranks.at(node);
  if (uniform_rank < 1) throw std::logic_error("no rank prescribed");
  return uniform_rank;
}

Eigen::MatrixXd partial_sample_matrix(BlackBox& u, const Node& alpha,
                                      const std::vector<std::vector<double>>& grid_alpha,
                                      const std::vector<std::vector<double>>& samples_alpha_c) {
  const int d = u.dimension();
  std::vector<int> missing;
  for (int nu = 1; nu <= d; ++nu)
    if (!std::binary_search(alpha.begin(), alpha.end(), nu)) missing.push_back(nu);

  Eigen::MatrixXd values(grid_alpha.size(), samples_alpha_c.size());
  std::vector<double> x(d);
  for (std::size_t i = 0; i < grid_alpha.size(); ++i) {
    if (grid_alpha[i].size() != alpha.size())
      throw std::invalid_argument("grid tuple length does not match node dimension count");
    for (std::size_t t = 0; t < alpha.size(); ++t) x[alpha[t] - 1] = grid_alpha[i][t];
    for (std::size_t k = 0; k < samples_alpha_c.size(); ++k) {
      if (samples_alpha_c[k].size() != missing.size())
        throw std::invalid_argument("sample tuple length does not match complement size");
      for (std::size_t t = 0; t < missing.size(); ++t) x[missing[t] - 1] = samples_alpha_c[k][t];
      values(i, k) = u.eval_counted(x);
    }
  }
  return values;
}

PcaResult empirical_pca(const Eigen::MatrixXd& coeff_samples, int rank, double tol) {
  const auto rows = coeff_samples.rows();
  const auto cols = coeff_samples.cols();
  if (rows == 0 || cols == 0) throw std::invalid_argument("empty sample matrix");

  Eigen::MatrixXd scaled = coeff_samples / std::sqrt(static_cast<double>(cols));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU);
  const Eigen::VectorXd& sigma = svd.singularValues();

  PcaResult res;
  res.sigma = sigma;

  const double top = sigma.size() > 0 ? sigma(0) : 0.0;
  if (top == 0.0) {
    // The sampled function is (numerically) zero on this node: keep a single
    // zero component so shapes stay consistent.
    res.components = Eigen::MatrixXd::Zero(1, rows);
    res.degenerate = true;
    res.clamped = rank > 1;
    return res;
  }

  int keep;
  if (rank >= 0) {
    // Keep exactly the requested count when the sample matrix allows it;
    // trailing components with tiny singular values are still orthonormal
    // directions and keep the retained dimension (and hence the storage and
    // evaluation counts) deterministic.
    keep = std::min<int>(rank, static_cast<int>(sigma.size()));
    if (keep < 1) keep = 1;
    res.clamped = keep < rank;
  } else {
    // Smallest r whose discarded energy fits the tolerance. The suffix sums
    // are accumulated from the smallest values up: subtracting from the total
    // would drown tails near (tol^2 * total) in cancellation noise.
    const int n = static_cast<int>(sigma.size());
    std::vector<double> suffix(n + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + sigma(k) * sigma(k);
    const double total = suffix[0];
    keep = 1;
    while (keep < n && suffix[keep] > tol * tol * total) ++keep;
  }

  res.components = svd.matrixU().leftCols(keep).transpose();
  // Deterministic sign: the largest-magnitude entry of each component is
  // made positive.
  for (int k = 0; k < res.components.rows(); ++k) {
    int arg = 0;
    res.components.row(k).cwiseAbs().maxCoeff(&arg);
    if (res.components(k, arg) < 0.0) res.components.row(k) = -res.components.row(k);
  }
  return res;
}

std::pair<TreeTensor, ApproxReport> hopca_approximate(BlackBox& u, const DimensionTree& tree,
                                                      const ActiveSet& active,
                                                      const std::vector<FeatureSpace>& leaf_spaces,
                                                      const BudgetPolicy& policy,
                                                      std::uint64_t seed,
                                                      int candidate_pool_size) {
  const int d = tree.d;
  if (static_cast<int>(leaf_spaces.size()) != d)
    throw std::invalid_argument("one feature space per dimension is required");
  if (u.dimension() != d)
    throw std::invalid_argument("function dimension does not match tree dimension");
  if (candidate_pool_size < 1) throw std::invalid_argument("candidate pool must be nonempty");

  RngStream root_rng(seed);
  const std::int64_t count_start = u.eval_count();

  // Per-dimension candidate pools and interpolation grids for the full
  // feature spaces. Inactive leaves use these directly; active leaves start
  // from them. Pool draws consume no function evaluations.
  std::vector<NodeState> leaf_full(d);
  for (int nu = 1; nu <= d; ++nu) {
    const FeatureSpace& space = leaf_spaces[nu - 1];
    RngStream pool_rng = root_rng.split("cand:" + std::to_string(nu));
    std::vector<double> pool = candidate_grid(space, candidate_pool_size, pool_rng);
    if (static_cast<int>(pool.size()) < space.dim)
      throw std::invalid_argument("candidate pool smaller than feature space dimension");
    Eigen::MatrixXd basis = basis_eval(space, pool);
    MagicGrid grid = MagicGrid::build(basis);
    NodeState st;
    st.size = space.dim;
    st.points.reserve(space.dim);
    for (int idx : grid.point_indices()) st.points.push_back({pool[idx]});
    st.grid = std::move(grid);
    leaf_full[nu - 1] = std::move(st);
  }

  const int active_count = active.count();
  const double local_tol = policy.local_rule == BudgetPolicy::LocalRule::EpsOverSqrtA
                               ? policy.eps / std::sqrt(static_cast<double>(std::max(1, active_count)))
                               : policy.eps;

  TreeTensor tt;
  tt.tree = tree;
  tt.active = active;
  tt.leaf_spaces = leaf_spaces;
  tt.coeff.assign(tree.node_count(), Eigen::MatrixXd());

  ApproxReport report;
  std::vector<NodeState> state(tree.node_count());

  // Inactive leaves expose the full feature space to their parents.
  for (int idx = 0; idx < tree.node_count(); ++idx) {
    if (tree.is_leaf(idx) && !active.is_active(idx) && idx != tree.root()) {
      const int nu = tree.nodes[idx][0];
      state[idx] = leaf_full[nu - 1];
    }
  }

  std::vector<int> order = nodes_bottom_up(tree, active);
  order.push_back(tree.root());  // interpolation-only final step
  for (int idx : order) {
    const Node& alpha = tree.nodes[idx];
    const bool is_root = idx == tree.root();
    const bool leaf = tree.is_leaf(idx);

    // Candidate interpolation grid and working-space dimension of this node.
    std::vector<std::vector<double>> grid;
    std::vector<const NodeState*> son_states;
    int space_dim;
    if (leaf) {
      const int nu = alpha[0];
      grid = leaf_full[nu - 1].points;
      space_dim = leaf_full[nu - 1].size;
    } else {
      for (int s : tree.sons[idx]) son_states.push_back(&state[s]);
      std::int64_t prod = 1;
      for (const auto* st : son_states) prod *= st->size;
      if (prod > kDenseCap)
        throw std::runtime_error("node working space too large at " + node_label(alpha));
      grid = product_grid(tree, idx, son_states);
      space_dim = static_cast<int>(prod);
    }

    if (is_root) {
      // The root is pure interpolation on its sons' product grid.
      Eigen::MatrixXd values = partial_sample_matrix(u, alpha, grid, {{}});
      std::vector<int> sizes;
      for (const auto* st : son_states) sizes.push_back(st->size);
      Eigen::MatrixXd coeffs = values;
      for (std::size_t s = 0; s < son_states.size(); ++s) {
        const MagicGrid* g = &son_states[s]->grid;
        coeffs = apply_axis(coeffs, sizes, static_cast<int>(s),
                            [g](const Eigen::MatrixXd& m) { return g->lu().solve(m); });
      }
      tt.coeff[idx] = coeffs.transpose();
      continue;
    }

    // Sample budget.
    int requested = -1;
    int m;
    if (policy.mode == BudgetPolicy::Mode::PrescribedRank) {
      requested = policy.rank_at(alpha);
      if (requested > space_dim)
        throw std::invalid_argument("prescribed rank " + std::to_string(requested) + " at " +
                                    node_label(alpha) + " exceeds working dimension " +
                                    std::to_string(space_dim));
      m = samples_for(policy, requested, space_dim);
    } else {
      m = samples_for(policy, 0, space_dim);
    }

    RngStream smpl_rng = root_rng.split("smpl:" + node_label(alpha));
    std::vector<std::vector<double>> samples =
        draw_complement_samples(alpha, u.measures(), m, smpl_rng);

    Eigen::MatrixXd values = partial_sample_matrix(u, alpha, grid, samples);

    // Interpolation coefficients of each sampled partial function.
    Eigen::MatrixXd coeffs;
    if (leaf) {
      coeffs = leaf_full[alpha[0] - 1].grid.interp_coeffs(values);
    } else {
      std::vector<int> sizes;
      for (const auto* st : son_states) sizes.push_back(st->size);
      coeffs = values;
      for (std::size_t s = 0; s < son_states.size(); ++s) {
        const MagicGrid* g = &son_states[s]->grid;
        coeffs = apply_axis(coeffs, sizes, static_cast<int>(s),
                            [g](const Eigen::MatrixXd& m2) { return g->lu().solve(m2); });
      }
    }

    PcaResult pca = empirical_pca(coeffs, policy.mode == BudgetPolicy::Mode::PrescribedRank
                                              ? requested
                                              : -1,
                                  local_tol);
    const int r = static_cast<int>(pca.components.rows());
    tt.coeff[idx] = pca.components;
    report.degenerate = report.degenerate || pca.degenerate;
    report.rank_clamped = report.rank_clamped || pca.clamped;

    // Interpolation points for the retained subspace, selected inside this
    // node's own grid so parent grids remain nested. A degenerate node keeps
    // its zero component but needs a usable one-point grid, so its place is
    // taken by the span of the first full-basis function (nonzero on the
    // grid, hence unisolvent); the interpolated values upstream stay zero.
    Eigen::MatrixXd selector = pca.components.transpose();
    if (pca.degenerate) selector = Eigen::MatrixXd::Identity(space_dim, 1);
    Eigen::MatrixXd basis_u;
    if (leaf) {
      basis_u = leaf_full[alpha[0] - 1].grid.interp_matrix() * selector;
    } else {
      std::vector<int> sizes;
      for (const auto* st : son_states) sizes.push_back(st->size);
      basis_u = selector;
      for (std::size_t s = 0; s < son_states.size(); ++s) {
        const MagicGrid* g = &son_states[s]->grid;
        basis_u = apply_axis(basis_u, sizes, static_cast<int>(s),
                             [g](const Eigen::MatrixXd& m2) { return g->interp_matrix() * m2; });
      }
    }
    MagicGrid ugrid = MagicGrid::build(basis_u);

    NodeState st;
    st.size = r;
    st.points.reserve(r);
    for (int pi : ugrid.point_indices()) st.points.push_back(grid[pi]);
    st.grid = std::move(ugrid);

    NodeResult nres;
    nres.node = alpha;
    nres.components = pca.components;
    nres.singular_values = pca.sigma;
    nres.magic_points = st.points;
    nres.m_samples = m;
    nres.degenerate = pca.degenerate;
    report.nodes.push_back(std::move(nres));
    report.ranks[alpha] = r;

    state[idx] = std::move(st);
  }

  tt.orthonormal_components = !report.degenerate;
  tt.validate();

  report.evaluations = u.eval_count() - count_start;
  report.storage = tt.storage();
  return {std::move(tt), std::move(report)};
}

std::int64_t predicted_evaluations(const DimensionTree& tree, const ActiveSet& active,
                                   const RankTuple& ranks, const LeafDims& leaf_dims,
                                   const BudgetPolicy& policy) {
  // Retained size a node exposes to its parent.
  auto size_of = [&](int idx) -> std::int64_t {
    if (active.is_active(idx)) return ranks.at(tree.nodes[idx]);
    if (!tree.is_leaf(idx)) throw std::invalid_argument("inactive interior node");
    return leaf_dims.at(tree.nodes[idx]);
  };

  std::int64_t total = 0;
  for (int idx = 0; idx < tree.node_count(); ++idx) {
    const bool is_root = idx == tree.root();
    std::int64_t grid_size;
    if (tree.is_leaf(idx)) {
      if (!active.is_active(idx) && !is_root) continue;
      grid_size = leaf_dims.at(tree.nodes[idx]);
    } else {
      if (!active.is_active(idx) && !is_root) continue;
      grid_size = 1;
      for (int s : tree.sons[idx]) grid_size *= size_of(s);
    }
    if (is_root) {
      total += grid_size;
    } else {
      const int r = active.is_active(idx) ? ranks.at(tree.nodes[idx]) : 0;
      const int m = policy.mode == BudgetPolicy::Mode::PrescribedRank
                        ? samples_for(policy, r, static_cast<int>(grid_size))
                        : samples_for(policy, 0, static_cast<int>(grid_size));
      total += m * grid_size;
    }
  }
  return total;
}

BlackBox tensorize(std::function<double(double)> f, int d) {
  if (d < 1 || d > 60) throw std::invalid_argument("tensorized order out of range");
  std::vector<Measure1D> measures(d, Measure1D::finite_uniform(2));
  auto g = [f = std::move(f), d](const std::vector<double>& x) {
    double t = 0.0;
    for (int k = 0; k < d; ++k) {
      const double v = x[k];
      const long code = std::lround(v);
      if (std::abs(v - static_cast<double>(code)) > 1e-9 || (code != 0 && code != 1))
        throw std::invalid_argument("tensorized argument is not a binary digit");
      if (code == 1) t += std::ldexp(1.0, -(k + 1));
    }
    return f(t);
  };
  return BlackBox(std::move(g), std::move(measures));
}

}  // namespace treepca
