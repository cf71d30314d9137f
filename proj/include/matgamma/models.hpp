#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "matgamma/numerics.hpp"
#include "matgamma/specfun.hpp"

namespace matgamma {

enum class FamilyTag { T1, T15, T2, T3 };
const char* family_name(FamilyTag tag);
FamilyTag family_from_name(const std::string& name);

// The four zero-mean matrix-normal families.  Each spec validates its
// structural constraints at construction, assembles the nk x nk precision
// matrix Theta acting on vec(X') (rows of X stacked), and requires Theta to
// be symmetric positive definite: smallest eigenvalue > 1e-10 * largest.
//
// Theta conventions (A matrices are sample-level n x n, B variable-level
// k x k rank-one frames):
//   T1:   Theta = sum_{j,j'} A_{jj'} (x) b_j b_{j'}'
//   T1.5: Theta = sum_j A_{jj} (x) b_j b_j'
//   T2:   Theta = sum_{i,j} gamma_{ij} a_i a_i' (x) b_j b_j'
//   T3:   Theta = Phi^{-1} (x) Psi^{-1}

class T1Spec {
 public:
  // grid(i, j) = A_{ij}, an n x n matrix; grid must satisfy A_ij' = A_ji,
  // zero diagonals off the block diagonal, strictly positive diagonals on
  // it.  b holds the orthonormal frame as columns.
  T1Spec(int n, int k, std::vector<std::vector<Matrix>> grid, Matrix b);

  int n() const { return n_; }
  int k() const { return k_; }
  const Matrix& A(int i, int j) const { return grid_[i][j]; }
  const Matrix& frame() const { return b_; }
  const Matrix& theta() const { return theta_; }
  double log_det_theta() const { return log_det_theta_; }

 private:
  int n_, k_;
  std::vector<std::vector<Matrix>> grid_;
  Matrix b_;
  Matrix theta_;
  double log_det_theta_;
};

class T15Spec {
 public:
  T15Spec(int n, int k, std::vector<Matrix> diag_blocks, Matrix b);

  int n() const { return n_; }
  int k() const { return k_; }
  const Matrix& A(int j) const { return blocks_[j]; }
  const Matrix& frame() const { return b_; }
  const Matrix& theta() const { return theta_; }
  double log_det_theta() const { return log_det_theta_; }

 private:
  int n_, k_;
  std::vector<Matrix> blocks_;
  Matrix b_;
  Matrix theta_;
  double log_det_theta_;
};

class T2Spec {
 public:
  // a: n x n orthonormal columns; b: k x k orthonormal columns;
  // gamma: n x k strictly positive weights.
  T2Spec(int n, int k, Matrix a, Matrix b, Matrix gamma);

  int n() const { return n_; }
  int k() const { return k_; }
  const Matrix& left_frame() const { return a_; }
  const Matrix& frame() const { return b_; }
  const Matrix& gamma() const { return gamma_; }
  const Matrix& theta() const { return theta_; }
  double log_det_theta() const { return log_det_theta_; }

 private:
  int n_, k_;
  Matrix a_, b_, gamma_;
  Matrix theta_;
  double log_det_theta_;
};

class T3Spec {
 public:
  // Phi (n x n) and Psi (k x k) SPD; optional mean shift M (n x k).
  T3Spec(Matrix phi, Matrix psi, Matrix mean = Matrix());

  int n() const { return n_; }
  int k() const { return k_; }
  const Matrix& phi() const { return phi_; }
  const Matrix& psi() const { return psi_; }
  const Matrix& mean() const { return mean_; }
  const Matrix& theta() const { return theta_; }
  double log_det_theta() const { return log_det_theta_; }

 private:
  int n_, k_;
  Matrix phi_, psi_, mean_;
  Matrix theta_;
  double log_det_theta_;
};

using ModelSpec = std::variant<T1Spec, T15Spec, T2Spec, T3Spec>;

FamilyTag family_of(const ModelSpec& spec);
int model_n(const ModelSpec& spec);
int model_k(const ModelSpec& spec);

// The nk x nk precision of vec(X'); validated SPD.
SymMatrix build_precision(const ModelSpec& spec);

// ln p(X) evaluated through the family's own trace display; equals the
// nk-dimensional normal log density of vec(X') with precision theta (and
// mean vec(M') for T3).
double log_density(const ModelSpec& spec, const Matrix& X);

// i.i.d. draws with vec(X') ~ N(vec(M'), Theta^{-1}); deterministic given
// seed.
std::vector<Matrix> sample(const ModelSpec& spec, int count, std::uint64_t seed);

// T3 alternative route X = Phi^{1/2} G Psi^{1/2} + M, G i.i.d. standard
// normal; first two moments match the generic sampler.
std::vector<Matrix> sample_t3_split(const T3Spec& spec, int count,
                                    std::uint64_t seed);

// Free-parameter counts as published: T1 -> n(n-1)k^2/2 + nk,
// T1.5 -> n(n+1)k/2, T2 -> nk, T3 -> n + k.
long long degrees_of_freedom(FamilyTag tag, int n, int k);

// Lossless nesting conversions along T3 c T2 c T1.5 c T1.
T2Spec to_t2(const T3Spec& spec);
T15Spec to_t15(const T2Spec& spec);
T1Spec to_t1(const T15Spec& spec);

}  // namespace matgamma
