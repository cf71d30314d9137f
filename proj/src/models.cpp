#include "matgamma/models.hpp"

#include <cmath>
#include <stdexcept>

namespace matgamma {

namespace {

constexpr double kOrthTol = 1e-12;
constexpr double kStructTol = 1e-12;

void check_orthonormal(const Matrix& B, const char* what) {
  const Matrix g = B.transpose() * B - Matrix::Identity(B.cols(), B.cols());
  if (g.cwiseAbs().maxCoeff() > kOrthTol * std::max(1.0, B.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(std::string(what) + ": columns are not orthonormal");
}

// SPD screen used for every assembled precision: smallest eigenvalue must
// exceed 1e-10 times the largest.
struct ThetaInfo {
  Matrix theta;
  double log_det;
};

ThetaInfo validate_theta(Matrix theta, const char* family) {
  theta = 0.5 * (theta + theta.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(theta);
  const Vector& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > 1e-10 * top))
    throw std::invalid_argument(std::string(family) +
                                ": assembled precision is not positive definite");
  return {theta, ev.array().log().sum()};
}

Matrix rank_one(const Matrix& frame, int i, int j) {
  return frame.col(i) * frame.col(j).transpose();
}

}  // namespace

const char* family_name(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::T1: return "T1";
    case FamilyTag::T15: return "T1.5";
    case FamilyTag::T2: return "T2";
    case FamilyTag::T3: return "T3";
  }
  return "?";
}

FamilyTag family_from_name(const std::string& name) {
  if (name == "T1") return FamilyTag::T1;
  if (name == "T1.5" || name == "T15") return FamilyTag::T15;
  if (name == "T2") return FamilyTag::T2;
  if (name == "T3") return FamilyTag::T3;
  throw std::invalid_argument("unknown family tag: " + name);
}

T1Spec::T1Spec(int n, int k, std::vector<std::vector<Matrix>> grid, Matrix b)
    : n_(n), k_(k), grid_(std::move(grid)), b_(std::move(b)) {
  if (n < 1 || k < 1) throw std::invalid_argument("T1Spec: dimensions must be >= 1");
  if (static_cast<int>(grid_.size()) != k)
    throw std::invalid_argument("T1Spec: grid must be k x k");
  for (const auto& row : grid_)
    if (static_cast<int>(row.size()) != k)
      throw std::invalid_argument("T1Spec: grid must be k x k");
  if (b_.rows() != k || b_.cols() != k)
    throw std::invalid_argument("T1Spec: frame must be k x k");
  check_orthonormal(b_, "T1Spec");
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const Matrix& A = grid_[i][j];
      if (A.rows() != n || A.cols() != n)
        throw std::invalid_argument("T1Spec: every A_ij must be n x n");
      if ((A.transpose() - grid_[j][i]).cwiseAbs().maxCoeff() >
          kStructTol * std::max(1.0, A.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("T1Spec: requires A_ij' = A_ji");
      for (int d = 0; d < n; ++d) {
        if (i == j && !(A(d, d) > 0.0))
          throw std::invalid_argument("T1Spec: diagonal entries of A_ii must be positive");
        if (i != j && std::abs(A(d, d)) > kStructTol)
          throw std::invalid_argument("T1Spec: diagonal entries of A_ij (i != j) must be zero");
      }
    }
  Matrix theta = Matrix::Zero(n * k, n * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      theta += kron(grid_[i][j], rank_one(b_, i, j));
  auto info = validate_theta(std::move(theta), "T1Spec");
  theta_ = std::move(info.theta);
  log_det_theta_ = info.log_det;
}

T15Spec::T15Spec(int n, int k, std::vector<Matrix> diag_blocks, Matrix b)
    : n_(n), k_(k), blocks_(std::move(diag_blocks)), b_(std::move(b)) {
  if (n < 1 || k < 1) throw std::invalid_argument("T15Spec: dimensions must be >= 1");
  if (static_cast<int>(blocks_.size()) != k)
    throw std::invalid_argument("T15Spec: needs k diagonal blocks");
  if (b_.rows() != k || b_.cols() != k)
    throw std::invalid_argument("T15Spec: frame must be k x k");
  check_orthonormal(b_, "T15Spec");
  for (const Matrix& A : blocks_) {
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("T15Spec: every A_jj must be n x n");
    if ((A - A.transpose()).cwiseAbs().maxCoeff() >
        kStructTol * std::max(1.0, A.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("T15Spec: A_jj must be symmetric");
    for (int d = 0; d < n; ++d)
      if (!(A(d, d) > 0.0))
        throw std::invalid_argument("T15Spec: diagonal entries of A_jj must be positive");
  }
  Matrix theta = Matrix::Zero(n * k, n * k);
  for (int j = 0; j < k; ++j) theta += kron(blocks_[j], rank_one(b_, j, j));
  auto info = validate_theta(std::move(theta), "T15Spec");
  theta_ = std::move(info.theta);
  log_det_theta_ = info.log_det;
}

T2Spec::T2Spec(int n, int k, Matrix a, Matrix b, Matrix gamma)
    : n_(n), k_(k), a_(std::move(a)), b_(std::move(b)), gamma_(std::move(gamma)) {
  if (n < 1 || k < 1) throw std::invalid_argument("T2Spec: dimensions must be >= 1");
  if (a_.rows() != n || a_.cols() != n)
    throw std::invalid_argument("T2Spec: left frame must be n x n");
  if (b_.rows() != k || b_.cols() != k)
    throw std::invalid_argument("T2Spec: right frame must be k x k");
  if (gamma_.rows() != n || gamma_.cols() != k)
    throw std::invalid_argument("T2Spec: gamma must be n x k");
  check_orthonormal(a_, "T2Spec");
  check_orthonormal(b_, "T2Spec");
  if (!(gamma_.minCoeff() > 0.0))
    throw std::invalid_argument("T2Spec: gamma entries must be positive");
  Matrix theta = Matrix::Zero(n * k, n * k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j)
      theta += gamma_(i, j) * kron(rank_one(a_, i, i), rank_one(b_, j, j));
  auto info = validate_theta(std::move(theta), "T2Spec");
  theta_ = std::move(info.theta);
  log_det_theta_ = info.log_det;
}

T3Spec::T3Spec(Matrix phi, Matrix psi, Matrix mean)
    : phi_(std::move(phi)), psi_(std::move(psi)), mean_(std::move(mean)) {
  n_ = static_cast<int>(phi_.rows());
  k_ = static_cast<int>(psi_.rows());
  SymMatrix sphi(phi_);
  SymMatrix spsi(psi_);
  if (!sphi.positive_definite() || !spsi.positive_definite())
    throw std::invalid_argument("T3Spec: Phi and Psi must be SPD");
  if (mean_.size() == 0) mean_ = Matrix::Zero(n_, k_);
  if (mean_.rows() != n_ || mean_.cols() != k_)
    throw std::invalid_argument("T3Spec: mean must be n x k");
  auto info = validate_theta(kron(sphi.inverse(), spsi.inverse()), "T3Spec");
  theta_ = std::move(info.theta);
  log_det_theta_ = info.log_det;
}

FamilyTag family_of(const ModelSpec& spec) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, T1Spec>) return FamilyTag::T1;
        else if constexpr (std::is_same_v<T, T15Spec>) return FamilyTag::T15;
        else if constexpr (std::is_same_v<T, T2Spec>) return FamilyTag::T2;
        else return FamilyTag::T3;
      },
      spec);
}

int model_n(const ModelSpec& spec) {
  return std::visit([](const auto& s) { return s.n(); }, spec);
}

int model_k(const ModelSpec& spec) {
  return std::visit([](const auto& s) { return s.k(); }, spec);
}

SymMatrix build_precision(const ModelSpec& spec) {
  return SymMatrix(std::visit([](const auto& s) -> const Matrix& { return s.theta(); }, spec));
}

namespace {

double quad_form(const ModelSpec& spec, const Matrix& X) {
  return std::visit(
      [&X](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, T1Spec>) {
          // vec' Theta vec = sum_{i,j} y_i' A_ij y_j with y_j = X b_j.  The
          // left/right orientation of the cross terms matters once A_ij is
          // not symmetric (only A_ij' = A_ji is guaranteed).
          const Matrix Y = X * s.frame();
          double q = 0.0;
          for (int j = 0; j < s.k(); ++j)
            q += Y.col(j).dot(s.A(j, j) * Y.col(j));
          for (int j = 0; j < s.k(); ++j)
            for (int j2 = j + 1; j2 < s.k(); ++j2)
              q += 2.0 * Y.col(j).dot(s.A(j, j2) * Y.col(j2));
          return q;
        } else if constexpr (std::is_same_v<T, T15Spec>) {
          const Matrix Y = X * s.frame();
          double q = 0.0;
          for (int j = 0; j < s.k(); ++j)
            q += Y.col(j).dot(s.A(j) * Y.col(j));
          return q;
        } else if constexpr (std::is_same_v<T, T2Spec>) {
          const Matrix P = s.left_frame().transpose() * X * s.frame();
          double q = 0.0;
          for (int i = 0; i < s.n(); ++i)
            for (int j = 0; j < s.k(); ++j)
              q += s.gamma()(i, j) * P(i, j) * P(i, j);
          return q;
        } else {
          const Matrix D = X - s.mean();
          const Matrix phi_inv_d = SymMatrix(s.phi()).inverse() * D;
          const Matrix psi_inv = SymMatrix(s.psi()).inverse();
          return (phi_inv_d * psi_inv * D.transpose()).trace();
        }
      },
      spec);
}

}  // namespace

double log_density(const ModelSpec& spec, const Matrix& X) {
  const int n = model_n(spec), k = model_k(spec);
  if (X.rows() != n || X.cols() != k)
    throw std::invalid_argument("log_density: X has wrong dimensions");
  const double log_det =
      std::visit([](const auto& s) { return s.log_det_theta(); }, spec);
  return 0.5 * log_det - 0.5 * n * k * std::log(2.0 * M_PI) -
         0.5 * quad_form(spec, X);
}

std::vector<Matrix> sample(const ModelSpec& spec, int count, std::uint64_t seed) {
  const int n = model_n(spec), k = model_k(spec);
  const Matrix& theta = std::visit([](const auto& s) -> const Matrix& { return s.theta(); }, spec);
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample: Cholesky of the precision failed");
  Vector mean_vec = Vector::Zero(n * k);
  if (const T3Spec* t3 = std::get_if<T3Spec>(&spec))
    mean_vec = vec_rows(t3->mean());
  RngStream rng(seed);
  std::vector<Matrix> out;
  out.reserve(count);
  const Matrix L = llt.matrixL();
  for (int c = 0; c < count; ++c) {
    Vector z(n * k);
    for (int i = 0; i < n * k; ++i) z[i] = rng.normal();
    // cov(L^{-T} z) = Theta^{-1}
    Vector v = L.transpose().triangularView<Eigen::Upper>().solve(z);
    out.push_back(unvec_rows(mean_vec + v, n, k));
  }
  return out;
}

std::vector<Matrix> sample_t3_split(const T3Spec& spec, int count,
                                    std::uint64_t seed) {
  const Matrix phi_half = SymMatrix(spec.phi()).sqrt();
  const Matrix psi_half = SymMatrix(spec.psi()).sqrt();
  RngStream rng(seed);
  std::vector<Matrix> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c)
    out.push_back(phi_half * rng.normal_matrix(spec.n(), spec.k()) * psi_half +
                  spec.mean());
  return out;
}

long long degrees_of_freedom(FamilyTag tag, int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("degrees_of_freedom: bad dimensions");
  const long long N = n, K = k;
  switch (tag) {
    case FamilyTag::T1: return N * (N - 1) / 2 * K * K + N * K;
    case FamilyTag::T15: return N * (N + 1) / 2 * K;
    case FamilyTag::T2: return N * K;
    case FamilyTag::T3: return N + K;
  }
  throw std::invalid_argument("degrees_of_freedom: bad family");
}

T2Spec to_t2(const T3Spec& spec) {
  Eigen::SelfAdjointEigenSolver<Matrix> ephi(SymMatrix(spec.phi()).inverse());
  Eigen::SelfAdjointEigenSolver<Matrix> epsi(SymMatrix(spec.psi()).inverse());
  Matrix gamma(spec.n(), spec.k());
  for (int i = 0; i < spec.n(); ++i)
    for (int j = 0; j < spec.k(); ++j)
      gamma(i, j) = ephi.eigenvalues()[i] * epsi.eigenvalues()[j];
  return T2Spec(spec.n(), spec.k(), ephi.eigenvectors(), epsi.eigenvectors(),
                gamma);
}

T15Spec to_t15(const T2Spec& spec) {
  // Theta_2 = sum_j (sum_i gamma_ij a_i a_i') (x) b_j b_j'.
  std::vector<Matrix> blocks;
  blocks.reserve(spec.k());
  for (int j = 0; j < spec.k(); ++j) {
    Matrix A = Matrix::Zero(spec.n(), spec.n());
    for (int i = 0; i < spec.n(); ++i)
      A += spec.gamma()(i, j) * spec.left_frame().col(i) *
           spec.left_frame().col(i).transpose();
    blocks.push_back(std::move(A));
  }
  return T15Spec(spec.n(), spec.k(), std::move(blocks), spec.frame());
}

T1Spec to_t1(const T15Spec& spec) {
  std::vector<std::vector<Matrix>> grid(
      spec.k(), std::vector<Matrix>(spec.k(), Matrix::Zero(spec.n(), spec.n())));
  for (int j = 0; j < spec.k(); ++j) grid[j][j] = spec.A(j);
  return T1Spec(spec.n(), spec.k(), std::move(grid), spec.frame());
}

}  // namespace matgamma
