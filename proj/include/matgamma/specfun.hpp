#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "matgamma/numerics.hpp"
#include "matgamma/partitions.hpp"

namespace matgamma {

// Real symmetric matrix with cached eigendecomposition and a scale-free
// positive-definiteness flag (min eigenvalue > 1e-10 * max |eigenvalue|).
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m, double sym_tol = 1e-10);

  const Matrix& matrix() const { return mat_; }
  const Vector& eigenvalues() const { return eigs_; }
  const Matrix& eigenvectors() const { return vecs_; }
  int dim() const { return static_cast<int>(mat_.rows()); }
  bool positive_definite() const { return pd_; }
  double trace() const { return mat_.trace(); }
  double spectral_radius() const;
  double log_det() const;  // requires positive definite
  Matrix sqrt() const;     // requires positive semidefinite
  Matrix inverse() const;  // requires positive definite

 private:
  Matrix mat_;
  Vector eigs_;
  Matrix vecs_;
  bool pd_;
};

// exp(tr X).
double etr(const Matrix& X);

// ln Gamma_k(a) = (k(k-1)/4) ln pi + sum_{i=1..k} ln Gamma(a - (i-1)/2).
// Requires a > (k-1)/2 (the continuous part of the Gindikin set); throws
// std::domain_error otherwise.
double mv_gamma_ln(int k, double a);

// Parameters of a (p)F(q) series of matrix argument.
struct HypergeomConfig {
  std::vector<double> upper;  // a_1..a_p
  std::vector<double> lower;  // b_1..b_q
  int max_weight = 60;
  double rel_tol = 1e-10;
  bool force_series = false;  // skip closed-form fast paths

  // Rejects lower parameters on the pole lattice
  // {(i-1)/2 - t : i <= n, 0 <= t < max_weight} for an n-dimensional
  // argument.
  void validate_for_dim(int n) const;
};

struct SeriesResult {
  double value = 0.0;
  double last_weight_contribution = 0.0;
  int truncated_at = 0;
  bool converged = false;
};

// Series value carried as mantissa * exp(log_scale) so that very large or
// very small sums survive; SeriesResult::value is the collapsed double.
struct SeriesEval {
  SeriesResult result;
  double mantissa = 0.0;
  double log_scale = 0.0;
  double log_value() const;  // requires a positive sum
};

// (p)F(q) of one matrix argument.  Fast paths (unless force_series):
// p=q=0 gives etr(X); p=1,q=0 gives |I - X|^{-a} for spectral radius < 1.
// A divergent 1F0 (spectral radius >= 1) throws std::domain_error.
SeriesResult hypergeom_one(const HypergeomConfig& cfg, const SymMatrix& X);

// Two-argument series: C_kappa(X) replaced by
// C_kappa(X) C_kappa(Y) / C_kappa(I_n).  Y may be smaller than X (the
// orthogonal-average convention for an n x n against a k x k argument);
// dim(Y) > dim(X) is a dimension-mismatch error.
SeriesResult hypergeom_two(const HypergeomConfig& cfg, const SymMatrix& X,
                           const SymMatrix& Y);

// Spectrum-level entry points used by the density formulas, where the
// argument arises as a product of symmetric matrices and only its
// eigenvalues are meaningful.
SeriesEval hypergeom_series(const HypergeomConfig& cfg, const Vector& eigs_x);
SeriesEval hypergeom_two_series(const HypergeomConfig& cfg, const Vector& eigs_x,
                                const Vector& eigs_y, int norm_dim);

// Monte Carlo average of (p)F(q)(X H1 Y H1') over Haar-distributed
// orthogonal H = (H1, H2), H1 the first k columns; the independent oracle
// for hypergeom_two.  X is n x n, Y is k x k with n >= k; Y (or X) must be
// positive semidefinite so the product spectrum stays real.
struct HaarAverage {
  double mean = 0.0;
  double std_error = 0.0;
};
HaarAverage haar_average_oracle(const HypergeomConfig& cfg, const SymMatrix& X,
                                const SymMatrix& Y, long samples,
                                std::uint64_t seed, int block_count = 100,
                                int threads = 4);

}  // namespace matgamma
