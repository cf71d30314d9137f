#pragma once

#include <cstdint>
#include <vector>

#include "matgamma/numerics.hpp"

namespace matgamma {

// Point on the Stiefel manifold St_{n,k}: H'H = I_k within 1e-12.
struct StiefelPoint {
  Matrix H;
  int n() const { return static_cast<int>(H.rows()); }
  int k() const { return static_cast<int>(H.cols()); }
};

// One Haar-distributed orthogonal matrix from an owned stream: QR of an
// i.i.d. standard normal matrix with the R_ii > 0 sign correction (naive QR
// alone is not Haar).
Matrix haar_orthogonal(int n, RngStream& rng);

// Haar-distributed draws from O(n); deterministic given seed.
std::vector<Matrix> sample_orthogonal(int n, int count, std::uint64_t seed);

// First k columns of a Haar orthogonal draw: the unique left-spherical
// (uniform) distribution on St_{n,k}.  Requires n >= k.
std::vector<StiefelPoint> sample_stiefel(int n, int k, int count,
                                         std::uint64_t seed);

// Unique polar factorization Z = H * Rhalf with H'H = I_k and Rhalf
// symmetric positive definite: H = Z (Z'Z)^{-1/2}, Rhalf = (Z'Z)^{1/2}.
// Throws for rank-deficient Z (smallest singular value <= 1e-10 * largest).
struct PolarDecomposition {
  StiefelPoint frame;
  Matrix r_half;
};
PolarDecomposition polar_decompose(const Matrix& Z);

// Membership in the Gindikin set {0, 1/2, 1, ..., (k-1)/2} U [(k-1)/2, inf);
// half-integers are matched within 1e-12 absolute.
bool gindikin_contains(int k, double a);

}  // namespace matgamma
