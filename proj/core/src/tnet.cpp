#include "treepca/tnet.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

namespace treepca {

namespace {

// Basis row without the matrix allocation of basis_eval; eval hot path.
void basis_row(const FeatureSpace& space, double x, Eigen::VectorXd& out) {
  const int n = space.dim;
  out.resize(n);
  switch (space.family) {
    case FeatureSpace::Family::Legendre: {
      const double a = space.measure.a, b = space.measure.b;
      const double t = (2.0 * x - a - b) / (b - a);
      double pm1 = 1.0, p = t;
      out(0) = 1.0;
      if (n > 1) out(1) = std::sqrt(3.0) * t;
      for (int j = 2; j < n; ++j) {
        const double pj = ((2 * j - 1) * t * p - (j - 1) * pm1) / j;
        pm1 = p;
        p = pj;
        out(j) = std::sqrt(2.0 * j + 1.0) * pj;
      }
      break;
    }
    case FeatureSpace::Family::Hermite: {
      double qm1 = 0.0, q = 1.0;
      out(0) = 1.0;
      for (int j = 1; j < n; ++j) {
        const double qj =
            (x * q - std::sqrt(static_cast<double>(j - 1)) * qm1) / std::sqrt(static_cast<double>(j));
        qm1 = q;
        q = qj;
        out(j) = qj;
      }
      break;
    }
    case FeatureSpace::Family::Canonical: {
      const int m = space.measure.m;
      const int code = static_cast<int>(std::llround(x));
      if (std::abs(x - code) > 1e-9 || code < 0 || code >= m)
        throw std::invalid_argument("point outside the finite support");
      out.setZero();
      if (code < n) out(code) = std::sqrt(static_cast<double>(m));
      break;
    }
  }
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

std::int64_t product_of(const std::vector<int>& v) {
  std::int64_t p = 1;
  for (int x : v) p *= x;
  return p;
}

// Reorders the columns of W from a row-major multi-index over dims_in to a
// row-major multi-index over the same dims sorted ascending.
Eigen::MatrixXd sort_column_axes(const Eigen::MatrixXd& W, const std::vector<int>& dims_in,
                                 const std::vector<int>& sizes_in) {
  const int k = static_cast<int>(dims_in.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return dims_in[a] < dims_in[b]; });
  bool already = true;
  for (int i = 0; i < k; ++i) already = already && order[i] == i;
  if (already) return W;

  std::vector<int> sizes_out(k);
  for (int i = 0; i < k; ++i) sizes_out[i] = sizes_in[order[i]];
  std::vector<std::int64_t> stride_in(k, 1);
  for (int i = k - 2; i >= 0; --i) stride_in[i] = stride_in[i + 1] * sizes_in[i + 1];

  const std::int64_t ncols = W.cols();
  Eigen::MatrixXd out(W.rows(), ncols);
  std::vector<int> idx(k, 0);  // multi-index in output (sorted) order
  for (std::int64_t col = 0; col < ncols; ++col) {
    std::int64_t src = 0;
    for (int i = 0; i < k; ++i) src += static_cast<std::int64_t>(idx[i]) * stride_in[order[i]];
    out.col(col) = W.col(src);
    for (int i = k - 1; i >= 0; --i) {
      if (++idx[i] < sizes_out[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

}  // namespace

int TreeTensor::son_size(int node) const {
  if (active.is_active(node)) return rank_of(node);
  if (!tree.is_leaf(node))
    throw std::logic_error("inactive interior node in representation");
  return leaf_spaces[tree.nodes[node].front() - 1].dim;
}

int TreeTensor::rank_of(int node) const {
  if (node == tree.root()) return 1;
  if (!active.is_active(node))
    throw std::logic_error("inactive node " + node_to_string(tree.nodes[node]) + " has no rank");
  return static_cast<int>(coeff[node].rows());
}

RankTuple TreeTensor::realized_ranks() const {
  RankTuple t;
  for (int i = 0; i < tree.node_count(); ++i)
    if (active.is_active(i)) t.r[tree.nodes[i]] = rank_of(i);
  return t;
}

LeafDims TreeTensor::leaf_dims() const {
  LeafDims l;
  for (int i = 0; i < tree.node_count(); ++i)
    if (tree.is_leaf(i)) {
      if (tree.nodes[i].size() != 1)
        throw std::logic_error("multi-dimension leaf not supported in representations");
      l.n[tree.nodes[i]] = leaf_spaces[tree.nodes[i].front() - 1].dim;
    }
  return l;
}

std::int64_t TreeTensor::storage() const {
  return storage_complexity(tree, active, realized_ranks(), leaf_dims());
}

void TreeTensor::validate() const {
  if (static_cast<int>(leaf_spaces.size()) != tree.d)
    throw std::logic_error("one feature space per dimension required");
  if (static_cast<int>(coeff.size()) != tree.node_count())
    throw std::logic_error("one coefficient block per node required");
  for (int i = 0; i < tree.node_count(); ++i) {
    const bool stored = (i == tree.root()) || active.is_active(i);
    if (!stored) {
      if (coeff[i].size() != 0)
        throw std::logic_error("inactive leaf must not carry coefficients");
      continue;
    }
    std::int64_t expected_cols;
    if (tree.is_leaf(i)) {
      expected_cols = leaf_spaces[tree.nodes[i].front() - 1].dim;
    } else {
      expected_cols = 1;
      for (int s : tree.sons[i]) expected_cols *= son_size(s);
    }
    if (coeff[i].cols() != expected_cols)
      throw std::logic_error("coefficient width mismatch at node " + node_to_string(tree.nodes[i]));
    if (i == tree.root() && coeff[i].rows() != 1)
      throw std::logic_error("root must have exactly one component");
    if (coeff[i].rows() < 1) throw std::logic_error("empty component block");
  }
}

double TreeTensor::component_gram_defect() const {
  validate();
  std::vector<Eigen::MatrixXd> gram(tree.node_count());
  double defect = 0.0;
  for (int i = tree.node_count() - 1; i >= 0; --i) {
    if (i == tree.root()) continue;
    if (!active.is_active(i)) {
      gram[i] = Eigen::MatrixXd::Identity(son_size(i), son_size(i));
      continue;
    }
    if (tree.is_leaf(i)) {
      gram[i] = coeff[i] * coeff[i].transpose();
    } else {
      Eigen::MatrixXd G = Eigen::MatrixXd::Identity(1, 1);
      for (int s : tree.sons[i]) G = kron(G, gram[s]);
      gram[i] = coeff[i] * G * coeff[i].transpose();
    }
    const int r = static_cast<int>(gram[i].rows());
    defect = std::max(defect,
                      (gram[i] - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff());
  }
  return defect;
}

double TreeTensor::norm() const {
  if (!orthonormal_components)
    throw std::logic_error("norm is only exact with orthonormal components; use a Monte-Carlo "
                           "estimate instead");
  return coeff[tree.root()].norm();
}

Eigen::VectorXd eval_tree(const TreeTensor& tt, const Eigen::MatrixXd& points) {
  tt.validate();
  const int d = tt.tree.d;
  if (points.cols() != d) throw std::invalid_argument("points must have d columns");
  const Eigen::Index npts = points.rows();
  Eigen::VectorXd out(npts);

  const int count = tt.tree.node_count();
  std::vector<Eigen::VectorXd> h(count);
  Eigen::VectorXd row, g, tmp;
  for (Eigen::Index p = 0; p < npts; ++p) {
    // Canonical node order puts parents before sons, so a reverse sweep is
    // bottom-up.
    for (int i = count - 1; i >= 0; --i) {
      if (tt.tree.is_leaf(i)) {
        const int nu = tt.tree.nodes[i].front();
        basis_row(tt.leaf_spaces[nu - 1], points(p, nu - 1), row);
        h[i] = tt.active.is_active(i) ? (tt.coeff[i] * row).eval() : row;
      } else {
        g.resize(1);
        g(0) = 1.0;
        for (int s : tt.tree.sons[i]) {
          const Eigen::VectorXd& hs = h[s];
          tmp.resize(g.size() * hs.size());
          for (Eigen::Index a = 0; a < g.size(); ++a)
            tmp.segment(a * hs.size(), hs.size()) = g(a) * hs;
          g.swap(tmp);
        }
        h[i] = tt.coeff[i] * g;
      }
    }
    out(p) = h[tt.tree.root()](0);
  }
  return out;
}

std::vector<double> eval_tree(const TreeTensor& tt, const std::vector<std::vector<double>>& points) {
  Eigen::MatrixXd P(points.size(), tt.tree.d);
  for (size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(points[i].size()) != tt.tree.d)
      throw std::invalid_argument("point arity mismatch");
    for (int j = 0; j < tt.tree.d; ++j) P(i, j) = points[i][j];
  }
  Eigen::VectorXd v = eval_tree(tt, P);
  return std::vector<double>(v.data(), v.data() + v.size());
}

double& DenseTensor::at(const std::vector<int>& index) {
  std::int64_t flat = 0;
  for (size_t i = 0; i < shape.size(); ++i) flat = flat * shape[i] + index[i];
  return values(flat);
}

double DenseTensor::at(const std::vector<int>& index) const {
  return const_cast<DenseTensor*>(this)->at(index);
}

double DenseTensor::eval(const std::vector<FeatureSpace>& spaces,
                         const std::vector<double>& point) const {
  const int d = static_cast<int>(shape.size());
  // Contract one dimension at a time, last dimension first (it is the fastest
  // axis, so each pass is a dense [m x n] * [n] product).
  Eigen::VectorXd cur = values, row;
  for (int nu = d; nu >= 1; --nu) {
    basis_row(spaces[nu - 1], point[nu - 1], row);
    const Eigen::Index n = shape[nu - 1];
    const Eigen::Index m = cur.size() / n;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
        cur.data(), m, n);
    cur = M * row;
  }
  return cur(0);
}

DenseTensor to_dense(const TreeTensor& tt) {
  tt.validate();
  DenseTensor out;
  out.shape.resize(tt.tree.d);
  std::int64_t total = 1;
  for (int nu = 1; nu <= tt.tree.d; ++nu) {
    out.shape[nu - 1] = tt.leaf_spaces[nu - 1].dim;
    total *= out.shape[nu - 1];
    if (total > kDenseCap) throw std::invalid_argument("dense conversion exceeds the entry cap");
  }

  // W maps a node's components to coefficients on the node's full product
  // basis, columns row-major over the node's dimensions sorted ascending.
  const int count = tt.tree.node_count();
  std::vector<Eigen::MatrixXd> W(count);
  for (int i = count - 1; i >= 0; --i) {
    if (tt.tree.is_leaf(i)) {
      const int n = tt.leaf_spaces[tt.tree.nodes[i].front() - 1].dim;
      W[i] = tt.active.is_active(i) ? tt.coeff[i] : Eigen::MatrixXd::Identity(n, n);
    } else {
      Eigen::MatrixXd K = Eigen::MatrixXd::Identity(1, 1);
      std::vector<int> dims_in, sizes_in;
      for (int s : tt.tree.sons[i]) {
        K = kron(K, W[s]);
        for (int nu : tt.tree.nodes[s]) {
          dims_in.push_back(nu);
          sizes_in.push_back(tt.leaf_spaces[nu - 1].dim);
        }
      }
      W[i] = sort_column_axes(tt.coeff[i] * K, dims_in, sizes_in);
    }
  }
  out.values = W[tt.tree.root()].row(0);
  return out;
}

AlphaSvd dense_alpha_svd(const DenseTensor& x, const Node& alpha, int rank, double tol) {
  const int d = static_cast<int>(x.shape.size());
  if (alpha.empty() || static_cast<int>(alpha.size()) >= d)
    throw std::invalid_argument("alpha must be a nonempty strict subset of the dimensions");
  for (int nu : alpha)
    if (nu < 1 || nu > d) throw std::invalid_argument("alpha dimension out of range");

  std::vector<int> comp;
  for (int nu = 1; nu <= d; ++nu)
    if (std::find(alpha.begin(), alpha.end(), nu) == alpha.end()) comp.push_back(nu);

  std::vector<int> asz, csz;
  for (int nu : alpha) asz.push_back(x.shape[nu - 1]);
  for (int nu : comp) csz.push_back(x.shape[nu - 1]);
  const std::int64_t ar = product_of(asz), cc = product_of(csz);

  Eigen::MatrixXd M(ar, cc);
  std::vector<int> index(d, 0);
  for (std::int64_t ia = 0; ia < ar; ++ia) {
    std::int64_t rest = ia;
    for (int i = static_cast<int>(alpha.size()) - 1; i >= 0; --i) {
      index[alpha[i] - 1] = static_cast<int>(rest % asz[i]);
      rest /= asz[i];
    }
    for (std::int64_t ic = 0; ic < cc; ++ic) {
      std::int64_t r2 = ic;
      for (int i = static_cast<int>(comp.size()) - 1; i >= 0; --i) {
        index[comp[i] - 1] = static_cast<int>(r2 % csz[i]);
        r2 /= csz[i];
      }
      M(ia, ic) = x.at(index);
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  AlphaSvd out;
  out.sigma = svd.singularValues();

  const int full = static_cast<int>(out.sigma.size());
  int keep;
  if (rank >= 0) {
    keep = std::min(rank, full);
  } else {
    const double total2 = out.sigma.squaredNorm();
    keep = full;
    double tail = 0.0;
    for (int r = full; r >= 1; --r) {
      tail += out.sigma(r - 1) * out.sigma(r - 1);
      if (tail > tol * tol * total2) break;
      keep = r - 1;
    }
  }
  out.rank = keep;
  out.left = svd.matrixU().leftCols(keep);
  out.right = svd.matrixV().leftCols(keep);
  double tail2 = 0.0;
  for (int k = keep; k < full; ++k) tail2 += out.sigma(k) * out.sigma(k);
  out.truncation_error = std::sqrt(tail2);
  return out;
}

std::string TreeTensor::serialize() const {
  validate();
  nlohmann::json j;
  j["format"] = "treepca.tree_tensor";
  j["version"] = 1;
  j["tree"] = tree_to_text(tree, active);
  j["leaf_spaces"] = nlohmann::json::array();
  for (const auto& s : leaf_spaces) j["leaf_spaces"].push_back(s.name());
  j["orthonormal_components"] = orthonormal_components;
  j["nodes"] = nlohmann::json::array();
  for (int i = 0; i < tree.node_count(); ++i) {
    if (i != tree.root() && !active.is_active(i)) continue;
    nlohmann::json nj;
    nj["node"] = node_to_string(tree.nodes[i]);
    nj["shape"] = {coeff[i].rows(), coeff[i].cols()};
    std::vector<double> data;
    data.reserve(coeff[i].size());
    for (Eigen::Index r = 0; r < coeff[i].rows(); ++r)
      for (Eigen::Index c = 0; c < coeff[i].cols(); ++c) data.push_back(coeff[i](r, c));
    nj["data"] = std::move(data);
    j["nodes"].push_back(std::move(nj));
  }
  return j.dump();
}

TreeTensor TreeTensor::deserialize(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (j.value("format", "") != "treepca.tree_tensor")
    throw std::invalid_argument("not a tree tensor container");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported container version");

  TreeTensor tt;
  std::tie(tt.tree, tt.active) = parse_tree_text(j.at("tree").get<std::string>());
  for (const auto& name : j.at("leaf_spaces"))
    tt.leaf_spaces.push_back(FeatureSpace::parse(name.get<std::string>()));
  tt.orthonormal_components = j.value("orthonormal_components", false);
  tt.coeff.assign(tt.tree.node_count(), Eigen::MatrixXd());
  for (const auto& nj : j.at("nodes")) {
    // Nodes are keyed by their dimension set, not by list position, so
    // containers survive any re-ordering of the canonical node list.
    const std::string ns = nj.at("node").get<std::string>();
    Node node;
    std::string tok;
    for (char c : ns) {
      if (c >= '0' && c <= '9') {
        tok += c;
      } else if (!tok.empty()) {
        node.push_back(std::stoi(tok));
        tok.clear();
      }
    }
    const int idx = tt.tree.index_of(node);
    const auto shape = nj.at("shape").get<std::vector<Eigen::Index>>();
    const auto data = nj.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] * shape[1] != static_cast<Eigen::Index>(data.size()))
      throw std::invalid_argument("inconsistent coefficient block for node " + ns);
    Eigen::MatrixXd C(shape[0], shape[1]);
    for (Eigen::Index r = 0; r < shape[0]; ++r)
      for (Eigen::Index c = 0; c < shape[1]; ++c) C(r, c) = data[r * shape[1] + c];
    tt.coeff[idx] = std::move(C);
  }
  tt.validate();
  return tt;
}

}  // namespace treepca
