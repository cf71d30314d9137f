#pragma once

#include <Eigen/Dense>

#include "matgamma/models.hpp"
#include "matgamma/specfun.hpp"

namespace matgamma {

// Quadratic-form model for S = (X + M)'(X + M) with X ~ T1.
//
// Derived quantities:
//   U     k x k trace form, u_ij = tr(A_ij) / n.  The /n normalization is
//         what makes the k = 1 reduction hit the chi-square density and the
//         Kronecker-separable subfamily hit the Wishart density exactly; it
//         is pinned by those oracles.
//   Omega k x k shift penalty sum_{ij} B_ij M' A_ij M, stored symmetrized
//         (only its trace ever enters a formula).
//   Delta k x k noncentrality G'G with G = sum_{ij} A_ij M B_ij; PSD by
//         construction.
class QFModel {
 public:
  explicit QFModel(T1Spec spec, Matrix shift = Matrix());

  const T1Spec& spec() const { return spec_; }
  const Matrix& shift() const { return shift_; }
  bool central() const { return central_; }
  int n() const { return spec_.n(); }
  int k() const { return spec_.k(); }

  const Matrix& trace_form() const { return u_; }        // U
  const Matrix& omega() const { return omega_; }         // Omega
  const Matrix& delta() const { return delta_; }         // Delta
  double log_det_theta() const { return spec_.log_det_theta(); }
  const Matrix& frame() const { return spec_.frame(); }  // B = (b_1..b_k)

 private:
  T1Spec spec_;
  Matrix shift_;
  bool central_;
  Matrix u_, omega_, delta_;
};

HypergeomConfig default_qf_config();

// Density of S at a PD point:
//   |Theta|^{1/2} / (2^{nk/2} Gamma_k(n/2)) etr(-UT/2) |T|^{(n-k-1)/2}
// with T = B'SB, times etr(-Omega/2) 0F1(n/2; Delta^{1/2} S Delta^{1/2} / 4)
// when the shift is nonzero.  Requires n > k - 1.
double density_S(const QFModel& model, const SymMatrix& S,
                 const HypergeomConfig& cfg = default_qf_config());
double log_density_S(const QFModel& model, const SymMatrix& S,
                     const HypergeomConfig& cfg = default_qf_config());

// Kronecker-separable density with the free positive constant q:
//   etr(-Psi^{-1}S/q) |S|^{(n-k-1)/2} 0F0(I - (q/2) Phi^{-1}, Psi^{-1}S/q)
//   / (2^{nk/2} Gamma_k(n/2) |Phi|^{k/2} |Psi|^{n/2}).
// The value is independent of q.
double wishart_density(int n, const SymMatrix& phi, const SymMatrix& psi,
                       const SymMatrix& S, double q,
                       const HypergeomConfig& cfg = default_qf_config());

// Moment generating function in the published parameterization:
//   |Theta|^{1/2} |U|^{-n/2} |I - W|^{-n/2},
//   W = U^{-1/2} B'RB U^{-1/2}, 2R = Gamma + I,
// times etr(-Omega/2) etr(Delta_T U^{-1}(I-W)^{-1} / 2) off center
// (Delta_T = B' Delta B).  The bundled (Gamma + I)/2 argument means the
// value at Gamma = 0 is E etr(S/4), not 1; mgf_gamma_for_dummy maps a plain
// dummy matrix G (for E exp(sum_{i<=j} g_ij s_ij)) to the Gamma producing
// it.  Spectral radius of W must be < 1.
double mgf(const QFModel& model, const Matrix& gamma);

// Gamma such that mgf(model, Gamma) = E exp(sum_{i<=j} g_ij s_ij) on the
// exactly-solved subfamily: Gamma = 4 G~ - I with G~ the symmetric matrix
// carrying g_ii on the diagonal and g_ij / 2 off it.
Matrix mgf_gamma_for_dummy(const Matrix& g);

// Exact Gaussian route for the same expectation, valid for every T1 model:
// E exp(sum_{i<=j} g_ij s_ij) via the nk-dimensional determinant identity.
// Used to cross-check mgf and to measure where the closed form drifts off
// the truth outside the separable subfamily.
double mgf_exact(const QFModel& model, const Matrix& g);

// MGF of wishart_density as a function of the plain dummy matrix G
// (E exp(sum_{i<=j} g_ij s_ij)):
//   (q/2)^{nk/2} |Phi|^{-k/2} |W|^{-n/2}
//     1F0(n/2; I - (q/2) Phi^{-1}, W^{-1}),
//   W = I - q Psi^{1/2} G~ Psi^{1/2}.
// q-invariant; throws on singular or non-PD W and on series divergence.
double mgf_wishart(int n, const SymMatrix& phi, const SymMatrix& psi,
                   const Matrix& g, double q,
                   const HypergeomConfig& cfg = default_qf_config());

// Joint density of the ordered characteristic roots l_1 > ... > l_k > 0 of
// S; zero outside the ordered cone.
double roots_density(const QFModel& model, const Vector& roots,
                     const HypergeomConfig& cfg = default_qf_config());

// Classical central Wishart latent-roots density:
//   pi^{k^2/2} / (2^{nk/2} Gamma_k(n/2) Gamma_k(k/2) |Psi|^{n/2})
//     prod l_i^{(n-k-1)/2} prod_{i<j}(l_i - l_j) 0F0(-Psi^{-1}/2, L).
double james_roots_density(int n, const SymMatrix& psi, const Vector& roots,
                           const HypergeomConfig& cfg = default_qf_config());

// The 1928 three-variate product-moment display, transcribed verbatim
// (including the -8Ff exponent term) as a cross-check target.  A..H are the
// minor ratios of B; the statistic matrix [[a,f,g],[f,b,h],[g,h,c]] must be
// PD and n > 4.
double wishart1928_density_k3(double a, double b, double c, double f,
                              double g, double h, const SymMatrix& B, int n);

}  // namespace matgamma
