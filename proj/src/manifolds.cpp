#include "matgamma/manifolds.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace matgamma {

Matrix haar_orthogonal(int n, RngStream& rng) {
  const Matrix Z = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(Z);
  Matrix Q = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (R(i, i) < 0.0) Q.col(i) = -Q.col(i);
  return Q;
}

std::vector<Matrix> sample_orthogonal(int n, int count, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_orthogonal: n must be >= 1");
  if (count < 0) throw std::invalid_argument("sample_orthogonal: count must be >= 0");
  RngStream rng(seed);
  std::vector<Matrix> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(haar_orthogonal(n, rng));
  return out;
}

std::vector<StiefelPoint> sample_stiefel(int n, int k, int count,
                                         std::uint64_t seed) {
  if (n < k) throw std::invalid_argument("sample_stiefel: requires n >= k");
  if (k < 1) throw std::invalid_argument("sample_stiefel: k must be >= 1");
  RngStream rng(seed);
  std::vector<StiefelPoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back({haar_orthogonal(n, rng).leftCols(k)});
  return out;
}

PolarDecomposition polar_decompose(const Matrix& Z) {
  if (Z.rows() < Z.cols() || Z.cols() < 1)
    throw std::invalid_argument("polar_decompose: Z must be n x k with n >= k >= 1");
  Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-10 * s(0))
    throw std::invalid_argument("polar_decompose: Z is rank deficient");
  PolarDecomposition out;
  out.frame.H = svd.matrixU() * svd.matrixV().transpose();
  out.r_half = svd.matrixV() * s.asDiagonal() * svd.matrixV().transpose();
  return out;
}

bool gindikin_contains(int k, double a) {
  if (k < 1) throw std::invalid_argument("gindikin_contains: k must be >= 1");
  const double edge = 0.5 * (k - 1);
  if (a >= edge) return true;
  if (a < -1e-12) return false;
  const double twice = 2.0 * a;
  return std::abs(twice - std::round(twice)) <= 2e-12 && std::round(twice) >= 0;
}

}  // namespace matgamma
