#include "matgamma/quadform.hpp"

#include <cmath>
#include <stdexcept>

namespace matgamma {

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() ||
      (m - m.transpose()).cwiseAbs().maxCoeff() >
          1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(what) + ": matrix must be symmetric");
}

Vector eigenvalues_of(const Matrix& sym) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrized(sym)).eigenvalues();
}

}  // namespace

QFModel::QFModel(T1Spec spec, Matrix shift)
    : spec_(std::move(spec)), shift_(std::move(shift)) {
  const int n = spec_.n(), k = spec_.k();
  if (shift_.size() == 0) shift_ = Matrix::Zero(n, k);
  if (shift_.rows() != n || shift_.cols() != k)
    throw std::invalid_argument("QFModel: shift must be n x k");
  central_ = shift_.cwiseAbs().maxCoeff() == 0.0;

  u_.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) u_(i, j) = spec_.A(i, j).trace() / n;

  if (central_) {
    omega_ = Matrix::Zero(k, k);
    delta_ = Matrix::Zero(k, k);
  } else {
    const Matrix& B = spec_.frame();
    Matrix omega = Matrix::Zero(k, k);
    Matrix G = Matrix::Zero(n, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const Matrix bij = B.col(i) * B.col(j).transpose();
        omega += bij * shift_.transpose() * spec_.A(i, j) * shift_;
        G += spec_.A(i, j) * shift_ * bij;
      }
    omega_ = symmetrized(omega);
    delta_ = G.transpose() * G;
  }
}

HypergeomConfig default_qf_config() {
  HypergeomConfig cfg;
  cfg.max_weight = 150;
  cfg.rel_tol = 1e-10;
  return cfg;
}

double log_density_S(const QFModel& model, const SymMatrix& S,
                     const HypergeomConfig& cfg) {
  const int n = model.n(), k = model.k();
  if (!(n > k - 1))
    throw std::domain_error(
        "density_S: requires n > k - 1 (S is singular with probability one)");
  if (S.dim() != k) throw std::invalid_argument("density_S: S must be k x k");
  if (!S.positive_definite())
    throw std::invalid_argument("density_S: S must be positive definite");

  const Matrix T = model.frame().transpose() * S.matrix() * model.frame();
  double lg = 0.5 * model.log_det_theta() - 0.5 * n * k * std::log(2.0) -
              mv_gamma_ln(k, 0.5 * n) -
              0.5 * (model.trace_form() * T).trace() +
              0.5 * (n - k - 1) * S.log_det();
  if (!model.central()) {
    lg += -0.5 * model.omega().trace();
    const Matrix dhalf = SymMatrix(model.delta()).sqrt();
    const Vector arg = 0.25 * eigenvalues_of(dhalf * S.matrix() * dhalf).array();
    HypergeomConfig f01 = cfg;
    f01.upper.clear();
    f01.lower = {0.5 * n};
    lg += hypergeom_series(f01, arg).log_value();
  }
  return lg;
}

double density_S(const QFModel& model, const SymMatrix& S,
                 const HypergeomConfig& cfg) {
  return std::exp(log_density_S(model, S, cfg));
}

double wishart_density(int n, const SymMatrix& phi, const SymMatrix& psi,
                       const SymMatrix& S, double q,
                       const HypergeomConfig& cfg) {
  const int k = psi.dim();
  if (!(n > k - 1)) throw std::domain_error("wishart_density: requires n > k - 1");
  if (!(q > 0.0)) throw std::invalid_argument("wishart_density: q must be positive");
  if (!phi.positive_definite() || !psi.positive_definite() || !S.positive_definite())
    throw std::invalid_argument("wishart_density: Phi, Psi, S must be PD");
  if (S.dim() != k) throw std::invalid_argument("wishart_density: S must match Psi");
  const int nn = phi.dim();
  if (nn != n) throw std::invalid_argument("wishart_density: Phi must be n x n");

  const Matrix psi_inv = psi.inverse();
  const double lg = -(psi_inv * S.matrix()).trace() / q +
                    0.5 * (n - k - 1) * S.log_det() -
                    0.5 * n * k * std::log(2.0) - mv_gamma_ln(k, 0.5 * n) -
                    0.5 * k * phi.log_det() - 0.5 * n * psi.log_det();

  const Vector eigs_x =
      (1.0 - 0.5 * q * phi.eigenvalues().cwiseInverse().array()).matrix();
  // eig(Psi^{-1} S / q) through the symmetric conjugation
  const Matrix psi_inv_half = SymMatrix(psi_inv).sqrt();
  const Vector eigs_y =
      eigenvalues_of(psi_inv_half * S.matrix() * psi_inv_half) / q;
  HypergeomConfig f00 = cfg;
  f00.upper.clear();
  f00.lower.clear();
  const SeriesEval series = hypergeom_two_series(f00, eigs_x, eigs_y, n);
  if (!series.result.converged)
    throw std::runtime_error("wishart_density: series did not converge; raise max_weight");
  return std::exp(lg) * series.result.value;
}

namespace {

// E exp(sum_{i<=j} g_ij s_ij) = E etr(G~ S) with the off-diagonals halved.
Matrix halved_dummy(const Matrix& g) {
  Matrix gt = 0.5 * (g + g.transpose());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j)
      if (i != j) gt(i, j) *= 0.5;
  return gt;
}

}  // namespace

Matrix mgf_gamma_for_dummy(const Matrix& g) {
  return 4.0 * halved_dummy(g) - Matrix::Identity(g.rows(), g.cols());
}

double mgf(const QFModel& model, const Matrix& gamma) {
  const int n = model.n(), k = model.k();
  require_symmetric(gamma, "mgf");
  const SymMatrix U(model.trace_form());
  if (!U.positive_definite()) throw std::domain_error("mgf: U must be positive definite");

  const Matrix R = 0.5 * (gamma + Matrix::Identity(k, k));
  const Matrix u_inv_half = SymMatrix(U.inverse()).sqrt();
  const Matrix W = u_inv_half * model.frame().transpose() * R * model.frame() *
                   u_inv_half;
  const SymMatrix Wsym(W);
  if (Wsym.spectral_radius() >= 1.0)
    throw std::domain_error("mgf: moment generating function does not exist "
                            "at this Gamma (spectral radius of W >= 1)");
  double lg = 0.5 * model.log_det_theta() - 0.5 * n * U.log_det() -
              0.5 * n * (1.0 - Wsym.eigenvalues().array()).log().sum();
  if (!model.central()) {
    const Matrix delta_t =
        model.frame().transpose() * model.delta() * model.frame();
    const Matrix iw_inv = SymMatrix(Matrix::Identity(k, k) - W).inverse();
    lg += -0.5 * model.omega().trace() +
          0.5 * (delta_t * U.inverse() * iw_inv).trace();
  }
  return std::exp(lg);
}

double mgf_exact(const QFModel& model, const Matrix& g) {
  const int n = model.n(), k = model.k();
  require_symmetric(g, "mgf_exact");
  const Matrix gt = halved_dummy(g);
  const Matrix Q = kron(Matrix::Identity(n, n), gt);
  const Matrix sigma = SymMatrix(model.spec().theta()).inverse();
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mgf_exact: covariance factorization failed");
  const Matrix L = llt.matrixL();
  const Matrix inner =
      Matrix::Identity(n * k, n * k) - 2.0 * L.transpose() * Q * L;
  const SymMatrix inner_sym(inner);
  if (!inner_sym.positive_definite())
    throw std::domain_error("mgf_exact: expectation diverges at this dummy");
  double lg = -0.5 * inner_sym.log_det();
  if (!model.central()) {
    const Vector mu = vec_rows(model.shift());
    const Vector qmu = Q * mu;
    const Vector w = inner_sym.inverse() * (L.transpose() * qmu);
    lg += mu.dot(qmu) + 2.0 * qmu.dot(L * w);
  }
  return std::exp(lg);
}

double mgf_wishart(int n, const SymMatrix& phi, const SymMatrix& psi,
                   const Matrix& g, double q, const HypergeomConfig& cfg) {
  const int k = psi.dim();
  if (!(q > 0.0)) throw std::invalid_argument("mgf_wishart: q must be positive");
  if (!phi.positive_definite() || !psi.positive_definite())
    throw std::invalid_argument("mgf_wishart: Phi and Psi must be PD");
  require_symmetric(g, "mgf_wishart");
  const Matrix gt = halved_dummy(g);
  const Matrix psi_half = psi.sqrt();
  const Matrix W =
      Matrix::Identity(k, k) - q * psi_half * gt * psi_half;
  const SymMatrix Wsym(W);
  if (!Wsym.positive_definite())
    throw std::domain_error(
        "mgf_wishart: W = I - q Psi^{1/2} G Psi^{1/2} must be PD");

  const Vector eigs_x =
      (1.0 - 0.5 * q * phi.eigenvalues().cwiseInverse().array()).matrix();
  const Vector eigs_y = Wsym.eigenvalues().cwiseInverse();
  HypergeomConfig f10 = cfg;
  f10.upper = {0.5 * n};
  f10.lower.clear();
  if (eigs_x.cwiseAbs().maxCoeff() * eigs_y.cwiseAbs().maxCoeff() >= 1.0)
    throw std::domain_error("mgf_wishart: 1F0 series diverges at this dummy");
  const SeriesEval series = hypergeom_two_series(f10, eigs_x, eigs_y, n);
  const double lg = 0.5 * n * k * std::log(0.5 * q) - 0.5 * k * phi.log_det() -
                    0.5 * n * Wsym.log_det();
  return std::exp(lg) * series.result.value;
}

double roots_density(const QFModel& model, const Vector& roots,
                     const HypergeomConfig& cfg) {
  const int n = model.n(), k = model.k();
  if (!(n > k - 1)) throw std::domain_error("roots_density: requires n > k - 1");
  if (roots.size() != k)
    throw std::invalid_argument("roots_density: needs k roots");
  for (int i = 0; i < k; ++i) {
    if (!(roots[i] > 0.0)) return 0.0;
    if (i > 0 && !(roots[i - 1] > roots[i])) return 0.0;
  }

  double lg = 0.5 * k * k * std::log(M_PI) + 0.5 * model.log_det_theta() -
              0.5 * n * k * std::log(2.0) - mv_gamma_ln(k, 0.5 * n) -
              mv_gamma_ln(k, 0.5 * k) +
              0.5 * (n - k - 1) * roots.array().log().sum();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) lg += std::log(roots[i] - roots[j]);

  HypergeomConfig f00 = cfg;
  f00.upper.clear();
  f00.lower.clear();
  const Vector minus_half_u = -0.5 * eigenvalues_of(model.trace_form()).array();
  const SeriesEval central =
      hypergeom_two_series(f00, minus_half_u, roots, k);
  double value = std::exp(lg) * central.result.value;
  if (!model.central()) {
    HypergeomConfig f01 = cfg;
    f01.upper.clear();
    f01.lower = {0.5 * n};
    const Vector quarter_delta = 0.25 * eigenvalues_of(model.delta()).array();
    const SeriesEval nc = hypergeom_two_series(f01, quarter_delta, roots, k);
    value *= std::exp(-0.5 * model.omega().trace()) * nc.result.value;
  }
  return value;
}

double james_roots_density(int n, const SymMatrix& psi, const Vector& roots,
                           const HypergeomConfig& cfg) {
  const int k = psi.dim();
  if (!(n > k - 1)) throw std::domain_error("james_roots_density: requires n > k - 1");
  if (!psi.positive_definite())
    throw std::invalid_argument("james_roots_density: Psi must be PD");
  if (roots.size() != k)
    throw std::invalid_argument("james_roots_density: needs k roots");
  for (int i = 0; i < k; ++i) {
    if (!(roots[i] > 0.0)) return 0.0;
    if (i > 0 && !(roots[i - 1] > roots[i])) return 0.0;
  }
  double lg = 0.5 * k * k * std::log(M_PI) - 0.5 * n * k * std::log(2.0) -
              mv_gamma_ln(k, 0.5 * n) - mv_gamma_ln(k, 0.5 * k) -
              0.5 * n * psi.log_det() +
              0.5 * (n - k - 1) * roots.array().log().sum();
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) lg += std::log(roots[i] - roots[j]);
  HypergeomConfig f00 = cfg;
  f00.upper.clear();
  f00.lower.clear();
  const Vector minus_half_prec = -0.5 * psi.eigenvalues().cwiseInverse().array();
  const SeriesEval series = hypergeom_two_series(f00, minus_half_prec, roots, k);
  return std::exp(lg) * series.result.value;
}

double wishart1928_density_k3(double a, double b, double c, double f,
                              double g, double h, const SymMatrix& B, int n) {
  if (B.dim() != 3) throw std::invalid_argument("wishart1928_density_k3: B must be 3 x 3");
  if (!(n > 4)) throw std::domain_error("wishart1928_density_k3: requires n > 4");
  if (!B.positive_definite())
    throw std::invalid_argument("wishart1928_density_k3: B must be PD");
  Matrix stat(3, 3);
  stat << a, f, g, f, b, h, g, h, c;
  const SymMatrix stat_sym(stat);
  if (!stat_sym.positive_definite())
    throw std::invalid_argument(
        "wishart1928_density_k3: statistic matrix must be PD");

  const Matrix& M = B.matrix();
  const double det = M.determinant();
  auto minor = [&M](int i, int j) {
    Matrix sub(2, 2);
    int r = 0;
    for (int p = 0; p < 3; ++p) {
      if (p == i) continue;
      int cc = 0;
      for (int qq = 0; qq < 3; ++qq) {
        if (qq == j) continue;
        sub(r, cc++) = M(p, qq);
      }
      ++r;
    }
    return sub.determinant();
  };
  const double A = minor(0, 0) / det, Bc = minor(1, 1) / det,
               C = minor(2, 2) / det, F = minor(0, 1) / det,
               G = minor(0, 2) / det, H = minor(1, 2) / det;
  Matrix ratio(3, 3);
  ratio << A, F, G, F, Bc, H, G, H, C;

  const double lg =
      -1.5 * std::log(M_PI) - std::lgamma(0.5 * (n - 1)) -
      std::lgamma(0.5 * (n - 2)) - std::lgamma(0.5 * (n - 3)) +
      0.5 * (n - 1) * std::log(ratio.determinant()) +
      0.5 * (n - 5) * stat_sym.log_det() +
      (-A * a - Bc * b - C * c - 2.0 * H * h - 2.0 * G * g - 8.0 * F * f);
  return std::exp(lg);
}

}  // namespace matgamma
