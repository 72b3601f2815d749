#include "treepca/bases.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "treepca/rng.hpp"

namespace treepca {

double RngStream::next_gaussian() {
  const double u1 = next_double_open();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Measure1D Measure1D::uniform(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("uniform measure needs a < b");
  Measure1D m;
  m.kind = Kind::Uniform;
  m.a = a;
  m.b = b;
  return m;
}

Measure1D Measure1D::std_gaussian() {
  Measure1D m;
  m.kind = Kind::StdGaussian;
  return m;
}

Measure1D Measure1D::finite_uniform(int count) {
  if (count < 1) throw std::invalid_argument("finite measure needs at least one point");
  Measure1D m;
  m.kind = Kind::FiniteUniform;
  m.m = count;
  return m;
}

FeatureSpace FeatureSpace::legendre(int degree, double a, double b) {
  if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
  FeatureSpace s;
  s.measure = Measure1D::uniform(a, b);
  s.family = Family::Legendre;
  s.dim = degree + 1;
  return s;
}

FeatureSpace FeatureSpace::hermite(int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
  FeatureSpace s;
  s.measure = Measure1D::std_gaussian();
  s.family = Family::Hermite;
  s.dim = degree + 1;
  return s;
}

FeatureSpace FeatureSpace::canonical(int m) {
  FeatureSpace s;
  s.measure = Measure1D::finite_uniform(m);
  s.family = Family::Canonical;
  s.dim = m;
  return s;
}

std::string FeatureSpace::name() const {
  switch (family) {
    case Family::Legendre: {
      std::string s = "legendre:p=" + std::to_string(dim - 1);
      if (measure.a != -1.0 || measure.b != 1.0) {
        char buf[80];
        std::snprintf(buf, sizeof buf, ":a=%.17g:b=%.17g", measure.a, measure.b);
        s += buf;
      }
      return s;
    }
    case Family::Hermite: return "hermite:p=" + std::to_string(dim - 1);
    case Family::Canonical: return "canonical:m=" + std::to_string(measure.m);
  }
  return "?";
}

FeatureSpace FeatureSpace::parse(const std::string& name) {
  // family:key=value[:key=value...]
  std::vector<std::pair<std::string, std::string>> kv;
  std::string family;
  size_t pos = 0;
  while (pos <= name.size()) {
    const size_t colon = name.find(':', pos);
    const std::string tok =
        name.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
    if (pos == 0) {
      family = tok;
    } else {
      const size_t eq = tok.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("bad feature space name: " + name);
      kv.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  auto get = [&](const std::string& key) -> const std::string* {
    for (const auto& [k, v] : kv)
      if (k == key) return &v;
    return nullptr;
  };

  if (family == "legendre") {
    const std::string* p = get("p");
    if (!p) throw std::invalid_argument("bad feature space name: " + name);
    const std::string *a = get("a"), *b = get("b");
    if ((a == nullptr) != (b == nullptr))
      throw std::invalid_argument("bad feature space name: " + name);
    return legendre(std::stoi(*p), a ? std::stod(*a) : -1.0, b ? std::stod(*b) : 1.0);
  }
  if (family == "hermite") {
    const std::string* p = get("p");
    if (!p) throw std::invalid_argument("bad feature space name: " + name);
    return hermite(std::stoi(*p));
  }
  if (family == "canonical") {
    const std::string* m = get("m");
    if (!m) throw std::invalid_argument("bad feature space name: " + name);
    return canonical(std::stoi(*m));
  }
  throw std::invalid_argument("bad feature space name: " + name);
}

Eigen::MatrixXd basis_eval(const FeatureSpace& space, const std::vector<double>& points) {
  const int n = space.dim;
  const int npts = static_cast<int>(points.size());
  Eigen::MatrixXd B(npts, n);

  switch (space.family) {
    case FeatureSpace::Family::Legendre: {
      const double a = space.measure.a, b = space.measure.b;
      for (int k = 0; k < npts; ++k) {
        // Map to the reference interval, then the standard three-term
        // recurrence; sqrt(2j+1) normalizes against the uniform probability
        // measure.
        const double t = (2.0 * points[k] - a - b) / (b - a);
        double pm1 = 1.0, p = t;
        B(k, 0) = 1.0;
        if (n > 1) B(k, 1) = std::sqrt(3.0) * t;
        for (int j = 2; j < n; ++j) {
          const double pj = ((2 * j - 1) * t * p - (j - 1) * pm1) / j;
          pm1 = p;
          p = pj;
          B(k, j) = std::sqrt(2.0 * j + 1.0) * pj;
        }
      }
      break;
    }
    case FeatureSpace::Family::Hermite: {
      for (int k = 0; k < npts; ++k) {
        // Probabilists' Hermite, recurrence kept in normalized form
        // (phi_j = He_j / sqrt(j!)) to avoid factorial overflow.
        const double x = points[k];
        double qm1 = 0.0, q = 1.0;
        B(k, 0) = 1.0;
        for (int j = 1; j < n; ++j) {
          const double qj = (x * q - std::sqrt(static_cast<double>(j - 1)) * qm1) /
                            std::sqrt(static_cast<double>(j));
          qm1 = q;
          q = qj;
          B(k, j) = qj;
        }
      }
      break;
    }
    case FeatureSpace::Family::Canonical: {
      const int m = space.measure.m;
      const double scale = std::sqrt(static_cast<double>(m));
      B.setZero();
      for (int k = 0; k < npts; ++k) {
        const double x = points[k];
        const int code = static_cast<int>(std::llround(x));
        if (std::abs(x - code) > 1e-9 || code < 0 || code >= m)
          throw std::invalid_argument("canonical basis point must be an integer code in 0.." +
                                      std::to_string(m - 1));
        if (code < n) B(k, code) = scale;
      }
      break;
    }
  }
  return B;
}

double sample_one(const Measure1D& measure, RngStream& rng) {
  switch (measure.kind) {
    case Measure1D::Kind::Uniform:
      return measure.a + (measure.b - measure.a) * rng.next_double();
    case Measure1D::Kind::StdGaussian:
      return rng.next_gaussian();
    case Measure1D::Kind::FiniteUniform: {
      int code = static_cast<int>(rng.next_double() * measure.m);
      if (code >= measure.m) code = measure.m - 1;  // guard the 1.0-epsilon edge
      return static_cast<double>(code);
    }
  }
  throw std::logic_error("unknown measure kind");
}

std::vector<double> sample(const Measure1D& measure, int count, RngStream& rng) {
  if (count < 0) throw std::invalid_argument("negative sample count");
  std::vector<double> out(count);
  for (double& x : out) x = sample_one(measure, rng);
  return out;
}

std::vector<double> candidate_grid(const FeatureSpace& space, int size, RngStream& rng) {
  if (space.measure.kind == Measure1D::Kind::FiniteUniform) {
    std::vector<double> pts(space.measure.m);
    for (int i = 0; i < space.measure.m; ++i) pts[i] = static_cast<double>(i);
    return pts;
  }
  return sample(space.measure, size, rng);
}

void gauss_quadrature(const Measure1D& measure, int npoints, std::vector<double>& points,
                      std::vector<double>& weights) {
  if (measure.kind == Measure1D::Kind::FiniteUniform) {
    points.resize(measure.m);
    weights.assign(measure.m, 1.0 / measure.m);
    for (int i = 0; i < measure.m; ++i) points[i] = static_cast<double>(i);
    return;
  }
  if (npoints < 1) throw std::invalid_argument("quadrature needs at least one point");

  // Golub-Welsch: eigen-decompose the Jacobi matrix of the orthonormal
  // recurrence; nodes are the eigenvalues, weights the squared first
  // eigenvector components (measure normalized to mass one).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npoints, npoints);
  for (int j = 1; j < npoints; ++j) {
    double off;
    if (measure.kind == Measure1D::Kind::Uniform) {
      off = j / std::sqrt(4.0 * j * j - 1.0);  // reference interval [-1,1]
    } else {
      off = std::sqrt(static_cast<double>(j));  // probabilists' Hermite
    }
    J(j - 1, j) = J(j, j - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  points.resize(npoints);
  weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    double t = es.eigenvalues()(i);
    if (measure.kind == Measure1D::Kind::Uniform)
      t = 0.5 * (measure.a + measure.b) + 0.5 * (measure.b - measure.a) * t;
    points[i] = t;
    const double v = es.eigenvectors()(0, i);
    weights[i] = v * v;
  }
}

}  // namespace treepca
