#pragma once
// Univariate measured sets with orthonormal bases: Legendre polynomials for a
// uniform measure, probabilists' Hermite polynomials for the standard
// Gaussian, and the scaled indicator (canonical) basis for finite uniform
// sets. Provides samplers and the candidate pools used for point selection.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "treepca/rng.hpp"

namespace treepca {

struct Measure1D {
  enum class Kind { Uniform, StdGaussian, FiniteUniform };
  Kind kind = Kind::Uniform;
  double a = -1.0, b = 1.0;  // uniform bounds
  int m = 0;                 // finite set size (points are the codes 0..m-1)

  static Measure1D uniform(double a, double b);
  static Measure1D std_gaussian();
  static Measure1D finite_uniform(int m);
};

struct FeatureSpace {
  enum class Family { Legendre, Hermite, Canonical };
  Measure1D measure;
  Family family = Family::Legendre;
  int dim = 1;  // polynomial families: degree p = dim - 1

  static FeatureSpace legendre(int degree, double a = -1.0, double b = 1.0);
  static FeatureSpace hermite(int degree);
  static FeatureSpace canonical(int m);

  // Config-file name, e.g. "legendre:p=10", "hermite:p=4", "canonical:m=2".
  std::string name() const;
  static FeatureSpace parse(const std::string& name);
};

// Rows are points, columns are the orthonormal basis functions phi_0..phi_{n-1}.
Eigen::MatrixXd basis_eval(const FeatureSpace& space, const std::vector<double>& points);

// i.i.d. draws; advances the stream.
std::vector<double> sample(const Measure1D& measure, int count, RngStream& rng);
double sample_one(const Measure1D& measure, RngStream& rng);

// Candidate pool for point selection: `size` random points for continuous
// measures (1000 unless configured otherwise), the full support for finite
// ones.
std::vector<double> candidate_grid(const FeatureSpace& space, int size, RngStream& rng);

// Gauss quadrature matching the measure (normalized to total weight 1); used
// by the orthonormality checks. Finite measures return the support with
// uniform weights.
void gauss_quadrature(const Measure1D& measure, int npoints, std::vector<double>& points,
                      std::vector<double>& weights);

}  // namespace treepca
