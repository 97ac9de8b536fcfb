#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "semidecay/operators.hpp"

namespace testing_support {

using semidecay::Complex;
using semidecay::ComplexVector;
using semidecay::DenseMatrix;

inline DenseMatrix random_matrix(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline ComplexVector random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

/// Random matrix rescaled to spectral radius `rho`.
inline DenseMatrix with_spectral_radius(const DenseMatrix& m, double rho) {
  Eigen::ComplexEigenSolver<DenseMatrix> es(m);
  return m * (rho / es.eigenvalues().cwiseAbs().maxCoeff());
}

/// Random matrix rescaled to operator norm `norm`.
inline DenseMatrix with_norm(const DenseMatrix& m, double norm) {
  Eigen::JacobiSVD<DenseMatrix> svd(m);
  return m * (norm / svd.singularValues()(0));
}

inline ComplexVector unit(int n, int j) {
  ComplexVector e = ComplexVector::Zero(n);
  e(j) = 1.0;
  return e;
}

inline double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support
