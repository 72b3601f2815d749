// Acceptance suite: one self-contained check per shipped guarantee. Each
// criterion prints a single PASS/FAIL line with its pinned thresholds baked
// into the code below; the binary exits nonzero if any line fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "treepca/bench.hpp"
#include "treepca/interp.hpp"

using namespace treepca;
using treepca_test::as_black_box;
using treepca_test::random_tree_tensor;

namespace {

const TreeKind kKinds[4] = {TreeKind::TT, TreeKind::TTT, TreeKind::Tucker, TreeKind::Balanced};

// 1. Closed-form budgets: linear-tree storage at rank 3, degree 4, and the
// matching evaluation count when every node draws exactly rank samples.
bool criterion1(std::string& detail) {
  const std::vector<int> ds{5, 10, 20, 50, 100};
  const std::vector<std::int64_t> expected{165, 390, 840, 2190, 4440};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto [tree, active] = build_tree(TreeKind::TT, ds[i]);
    const RankTuple ranks = RankTuple::uniform(tree, active, 3);
    const LeafDims dims = LeafDims::uniform(tree, 5);
    const std::int64_t s = storage_complexity(tree, active, ranks, dims);
    const std::int64_t m =
        predicted_evaluations(tree, active, ranks, dims, BudgetPolicy::prescribed_rank(3));
    if (s != expected[i] || m != s) {
      std::ostringstream os;
      os << "d=" << ds[i] << " gave S=" << s << " M=" << m << ", expected " << expected[i];
      detail = os.str();
      return false;
    }
  }
  detail = "linear tree, r=3, n=5: S = {165,390,840,2190,4440} at d={5,10,20,50,100}, M = S";
  return true;
}

// 2. Quartic-oscillator chain recovered to near machine precision on a fixed
// sampling budget equal to the storage.
bool criterion2(std::string& detail) {
  const std::vector<int> ds{5, 10, 20};
  const std::vector<std::int64_t> expected_s{165, 390, 840};
  std::ostringstream os;
  bool ok = true;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ExperimentConfig cfg;
    cfg.function = "henon_heiles";
    cfg.d = ds[i];
    cfg.tree = "tt";
    cfg.degree = 4;
    cfg.mode = "rank";
    cfg.rank = 3;
    cfg.runs = 10;
    cfg.mc_samples = 20000;
    const RunReport report = run_experiment(cfg);
    int budget_exact = 0, small_err = 0;
    for (const RunRow& row : report.rows) {
      if (row.ok && row.evaluations == expected_s[i] && row.storage == expected_s[i])
        ++budget_exact;
      if (row.ok && row.err_l2 <= 1e-9) ++small_err;
    }
    if (budget_exact != 10 || small_err < 9) ok = false;
    os << " d=" << ds[i] << ": M=S=" << expected_s[i] << " in " << budget_exact
       << "/10, err<=1e-9 in " << small_err << "/10;";
  }
  detail = "quartic chain, rank 3, degree 4:" + os.str();
  return ok;
}

// 3. Degree sweep of sin(x1+...+x10) at rank 2: deterministic budgets, and
// the median error at most 5x the pinned reference errors. The bound is
// one-sided because this implementation lands below the references (at the
// best-approximation limit of each degree).
bool criterion3(std::string& detail) {
  const std::vector<int> degrees{3, 7, 11};
  const std::vector<std::int64_t> expected_m{148, 228, 308};
  const std::vector<double> reference_err{3.2e-1, 1.8e-4, 2.2e-8};
  std::ostringstream os;
  bool ok = true;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    ExperimentConfig cfg;
    cfg.function = "sine_sum";
    cfg.d = 10;
    cfg.tree = "ttt";
    cfg.degree = degrees[i];
    cfg.mode = "rank";
    cfg.rank = 2;
    cfg.runs = 5;
    cfg.mc_samples = 20000;
    const RunReport report = run_experiment(cfg);
    int budget_exact = 0;
    for (const RunRow& row : report.rows)
      if (row.ok && row.evaluations == expected_m[i]) ++budget_exact;
    const bool err_ok = report.failures == 0 && report.err_l2.q50 <= 5.0 * reference_err[i];
    if (budget_exact != 5 || !err_ok) ok = false;
    os << " p=" << degrees[i] << ": M=" << expected_m[i] << " in " << budget_exact
       << "/5, median err " << report.err_l2.q50 << " (bound " << 5.0 * reference_err[i] << ");";
  }
  detail = "sine of a 10-term sum, rank 2 (one-sided error bound):" + os.str();
  return ok;
}

// 4. Binary-digit compression of t^2 on 2^40 points at tolerance 1e-8: ranks
// capped at 3, storage a few hundred, million-sample error near the target.
bool criterion4(std::string& detail) {
  ExperimentConfig cfg;
  cfg.function = "tensorized_square";
  cfg.d = 40;
  cfg.tree = "tt";
  cfg.mode = "tolerance";
  cfg.eps = 1e-8;
  cfg.runs = 10;
  cfg.mc_samples = 1000000;
  const RunReport report = run_experiment(cfg);
  int rank3 = 0, small_err = 0, small_s = 0;
  for (const RunRow& row : report.rows) {
    if (row.ok && row.max_rank == 3) ++rank3;
    if (row.ok && row.err_l2 <= 1e-7) ++small_err;
    if (row.ok && row.storage <= 400) ++small_s;
  }
  std::ostringstream os;
  os << "t^2 on 40 binary digits, tolerance 1e-8: max rank 3 in " << rank3
     << "/10, err<=1e-7 in " << small_err << "/10, S<=400 in " << small_s << "/10";
  detail = os.str();
  return rank3 == 10 && small_err >= 9 && small_s == 10;
}

// 5. Same compression for sqrt(t) at tolerance 1e-4: no finite rank is exact,
// but the adaptive run stays small and accurate.
bool criterion5(std::string& detail) {
  ExperimentConfig cfg;
  cfg.function = "tensorized_sqrt";
  cfg.d = 40;
  cfg.tree = "tt";
  cfg.mode = "tolerance";
  cfg.eps = 1e-4;
  cfg.runs = 10;
  cfg.mc_samples = 1000000;
  const RunReport report = run_experiment(cfg);
  int good = 0;
  for (const RunRow& row : report.rows)
    if (row.ok && row.err_l2 <= 1e-2 && row.max_rank <= 6) ++good;
  std::ostringstream os;
  os << "sqrt(t) on 40 binary digits, tolerance 1e-4: err<=1e-2 and max rank<=6 in " << good
     << "/10";
  detail = os.str();
  return good >= 9;
}

// 6. The 8-variable well-flow benchmark at uniform rank 5, degree 10, on the
// linear tree whose closed-form storage is 22r + 66r^2 = 1760.
bool criterion6(std::string& detail) {
  ExperimentConfig cfg;
  cfg.function = "borehole";
  cfg.d = 8;
  cfg.tree = "tt";
  cfg.degree = 10;
  cfg.mode = "rank";
  cfg.rank = 5;
  cfg.runs = 10;
  cfg.mc_samples = 100000;
  const RunReport report = run_experiment(cfg);
  int budget_exact = 0, small_err = 0;
  for (const RunRow& row : report.rows) {
    if (row.ok && row.storage == 1760 && row.evaluations == 1760) ++budget_exact;
    if (row.ok && row.err_l2 <= 1e-5) ++small_err;
  }
  std::ostringstream os;
  os << "well-flow function, linear tree, rank 5, degree 10: M=S=1760 in " << budget_exact
     << "/10, err<=1e-5 in " << small_err << "/10";
  detail = os.str();
  return budget_exact == 10 && small_err >= 9;
}

// 7. Oracle equivalence on random low-rank functions: prescribing the true
// ranks recovers the function; adaptive runs land within a factor 10 of the
// exact truncated-SVD error at the ranks they realized.
bool criterion7(std::string& detail) {
  const double eps_cycle[3] = {3e-1, 1e-1, 3e-2};
  int rank_recovered = 0, tol_within = 0;
  const int cases = 20;
  for (int i = 0; i < cases; ++i) {
    const TreeKind kind = kKinds[i % 4];
    const int d = 2 + i % 3;
    const int dim = 3 + i % 3;
    const int rank = 1 + i % 3;
    const TreeTensor target = random_tree_tensor(kind, d, dim, rank, 5000 + i);
    BlackBox box = as_black_box(target);

    auto [rec, rep] =
        hopca_approximate(box, target.tree, target.active, target.leaf_spaces,
                          BudgetPolicy::prescribed_rank(target.realized_ranks()), 7000 + i);
    if (mc_relative_error(box, rec, 20000, 100 + i) <= 1e-8) ++rank_recovered;

    auto [rec2, rep2] =
        hopca_approximate(box, target.tree, target.active, target.leaf_spaces,
                          BudgetPolicy::prescribed_tolerance(eps_cycle[i % 3]), 8000 + i);
    const DenseTensor dense = to_dense(target);
    double tail2 = 0.0;
    for (const NodeResult& nr : rep2.nodes) {
      const AlphaSvd svd =
          dense_alpha_svd(dense, nr.node, static_cast<int>(nr.components.rows()), 0.0);
      tail2 += svd.truncation_error * svd.truncation_error;
    }
    const double ideal = std::sqrt(tail2) / dense.norm();
    const double err = mc_relative_error(box, rec2, 20000, 200 + i);
    if (err <= std::max(10.0 * ideal, 1e-8)) ++tol_within;
  }
  std::ostringstream os;
  os << "random low-rank targets: exact-rank recovery<=1e-8 in " << rank_recovered << "/" << cases
     << ", adaptive error within 10x truncated-SVD ideal in " << tol_within << "/" << cases;
  detail = os.str();
  return rank_recovered >= 18 && tol_within == cases;
}

// 8. Invariant sweeps, >=100 randomized cases per suite: grid nesting, PCA
// orthonormality and budget accounting over full pipeline runs; interpolation
// idempotence over random spaces; norm agreement over random representations.
bool criterion8(std::string& detail) {
  int nest_fail = 0, pca_fail = 0, acct_fail = 0, interp_fail = 0, norm_fail = 0;
  const int cases = 100;

  for (int i = 0; i < cases; ++i) {
    const TreeKind kind = kKinds[i % 4];
    const int d = 2 + i % 3;
    const int dim = 2 + i % 4;
    const int rank = 1 + i % std::min(3, dim);
    const TreeTensor target = random_tree_tensor(kind, d, dim, rank, 4000 + i);
    BlackBox box = as_black_box(target);
    BudgetPolicy policy;
    if (i % 2 == 0)
      policy = BudgetPolicy::prescribed_rank(rank, i % 4 == 0 ? 2.0 : 1.0);
    else
      policy = BudgetPolicy::prescribed_tolerance(i % 4 == 1 ? 1e-6 : 1e-1);
    auto [tt, rep] =
        hopca_approximate(box, target.tree, target.active, target.leaf_spaces, policy, 6000 + i);

    // Grid nesting: a node's points restricted to an active son's dimensions
    // must reappear verbatim in that son's grid.
    std::map<Node, std::set<std::vector<double>>> grids;
    for (const NodeResult& nr : rep.nodes)
      grids[nr.node] = {nr.magic_points.begin(), nr.magic_points.end()};
    bool nested = true;
    for (const NodeResult& nr : rep.nodes) {
      const int idx = target.tree.index_of(nr.node);
      for (int son : target.tree.sons[idx]) {
        const auto it = grids.find(target.tree.nodes[son]);
        if (it == grids.end()) continue;  // inactive leaf keeps no grid
        std::vector<int> slots;
        for (int v : target.tree.nodes[son])
          slots.push_back(static_cast<int>(
              std::lower_bound(nr.node.begin(), nr.node.end(), v) - nr.node.begin()));
        for (const std::vector<double>& pt : nr.magic_points) {
          std::vector<double> restricted;
          for (int s : slots) restricted.push_back(pt[s]);
          if (!it->second.count(restricted)) nested = false;
        }
      }
    }
    if (!nested) ++nest_fail;

    bool orthonormal = tt.component_gram_defect() <= 1e-9;
    for (const NodeResult& nr : rep.nodes) {
      const Eigen::MatrixXd gram = nr.components * nr.components.transpose();
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
      if ((gram - eye).cwiseAbs().maxCoeff() > 1e-10) orthonormal = false;
    }
    if (!orthonormal) ++pca_fail;

    const std::int64_t predicted = predicted_evaluations(
        target.tree, target.active, tt.realized_ranks(), tt.leaf_dims(), policy);
    if (rep.evaluations != box.eval_count() || rep.evaluations != predicted ||
        rep.storage != tt.storage())
      ++acct_fail;
  }

  for (int i = 0; i < cases; ++i) {
    RngStream rng(7700 + i);
    const int p = 2 + i % 5;
    FeatureSpace space = i % 3 == 0   ? FeatureSpace::legendre(p)
                         : i % 3 == 1 ? FeatureSpace::hermite(p)
                                      : FeatureSpace::canonical(p + 1);
    const std::vector<double> pool = candidate_grid(space, 200, rng);
    const Eigen::MatrixXd B = basis_eval(space, pool);
    const MagicGrid grid = magic_points(B);

    // Members of the space are reproduced exactly.
    Eigen::VectorXd c(space.dim);
    for (int k = 0; k < space.dim; ++k) c(k) = rng.next_gaussian();
    const Eigen::VectorXd back = grid.interp_coeffs(grid.interp_matrix() * c);
    bool good = (back - c).norm() <= 1e-8 * std::max(1.0, c.norm());

    // Interpolating an interpolant changes nothing.
    Eigen::VectorXd values(grid.size());
    for (int k = 0; k < grid.size(); ++k) values(k) = std::exp(pool[grid.point_indices()[k]]);
    const Eigen::VectorXd a1 = grid.interp_coeffs(values);
    const Eigen::VectorXd a2 = grid.interp_coeffs(grid.interp_matrix() * a1);
    if ((a2 - a1).norm() > 1e-8 * std::max(1.0, a1.norm())) good = false;
    if (!good) ++interp_fail;
  }

  for (int i = 0; i < cases; ++i) {
    const TreeKind kind = kKinds[i % 4];
    const int d = 2 + i % 3;
    const int dim = 2 + i % 4;
    const int rank = 1 + i % std::min(3, dim);
    const TreeTensor tt = random_tree_tensor(kind, d, dim, rank, 9000 + i);
    const DenseTensor dense = to_dense(tt);
    if (std::abs(tt.norm() - dense.norm()) > 1e-9 * std::max(1.0, dense.norm())) ++norm_fail;
  }

  std::ostringstream os;
  os << cases << " cases per suite, failures: nesting " << nest_fail << ", PCA orthonormality "
     << pca_fail << ", budget accounting " << acct_fail << ", interpolation idempotence "
     << interp_fail << ", norm vs dense " << norm_fail;
  detail = os.str();
  return nest_fail + pca_fail + acct_fail + interp_fail + norm_fail == 0;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    double budget_seconds;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Entry> entries{{1, 1.0, criterion1},   {2, 60.0, criterion2},
                                   {3, 60.0, criterion3},  {4, 60.0, criterion4},
                                   {5, 120.0, criterion5}, {6, 120.0, criterion6},
                                   {7, 120.0, criterion7}, {8, 120.0, criterion8}};
  bool all_ok = true;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = entry.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("unexpected exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > entry.budget_seconds) {
      ok = false;
      detail += " [over time budget]";
    }
    std::printf("%s - criterion %d: %s (%.1fs / %.0fs)\n", ok ? "PASS" : "FAIL", entry.id,
                detail.c_str(), seconds, entry.budget_seconds);
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
