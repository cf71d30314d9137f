#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "matgamma/manifolds.hpp"
#include "matgamma/model_io.hpp"
#include "matgamma/models.hpp"
#include "matgamma/verify.hpp"

using matgamma::FamilyTag;
using matgamma::Matrix;
using matgamma::ModelSpec;
using matgamma::T15Spec;
using matgamma::T1Spec;
using matgamma::T2Spec;
using matgamma::T3Spec;
using matgamma::Vector;

TEST_CASE("precision assembly pinned examples") {
  // T3 with identity factors
  const T3Spec id3(Matrix::Identity(2, 2), Matrix::Identity(3, 3));
  CHECK((id3.theta() - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-14);

  // Phi^{-1} = diag(1,2), Psi^{-1} = diag(3,4) -> diag(3,4,6,8)
  Vector phi_inv(2), psi_inv(2);
  phi_inv << 1.0, 2.0;
  psi_inv << 3.0, 4.0;
  const T3Spec t3(Vector(phi_inv.cwiseInverse()).asDiagonal(),
                  Vector(psi_inv.cwiseInverse()).asDiagonal());
  Vector want(4);
  want << 3.0, 4.0, 6.0, 8.0;
  CHECK((t3.theta() - Matrix(want.asDiagonal())).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("T2 with separable gamma equals the corresponding T3") {
  matgamma::RngStream rng(8);
  const int n = 3, k = 2;
  const Matrix a = matgamma::haar_orthogonal(n, rng);
  const Matrix b = matgamma::haar_orthogonal(k, rng);
  Vector alpha(n), beta(k);
  alpha << 0.7, 1.3, 2.0;
  beta << 0.9, 1.8;
  Matrix gamma(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) gamma(i, j) = alpha[i] * beta[j];
  const T2Spec t2(n, k, a, b, gamma);

  Matrix phi_inv = Matrix::Zero(n, n), psi_inv = Matrix::Zero(k, k);
  for (int i = 0; i < n; ++i)
    phi_inv += alpha[i] * a.col(i) * a.col(i).transpose();
  for (int j = 0; j < k; ++j)
    psi_inv += beta[j] * b.col(j) * b.col(j).transpose();
  const T3Spec t3(matgamma::SymMatrix(phi_inv).inverse(),
                  matgamma::SymMatrix(psi_inv).inverse());
  CHECK((t2.theta() - t3.theta()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("vec identity: tr(A X B X') = vec(X')'(A (x) B) vec(X')") {
  matgamma::RngStream rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + rep % 3, k = 2 + rep % 2;
    const Matrix A = matgamma::random_symmetric(n, rng, 1.5);
    const Matrix B = matgamma::random_symmetric(k, rng, 1.5);
    const Matrix X = rng.normal_matrix(n, k);
    const double lhs = (A * X * B * X.transpose()).trace();
    const Vector v = matgamma::vec_rows(X);
    const double rhs = v.dot(matgamma::kron(A, B) * v);
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("log density equals the dense MVN oracle for every family") {
  matgamma::RngStream rng(14);
  std::vector<ModelSpec> specs;
  specs.push_back(matgamma::make_t1_coupled(3, 2, 0.2, 99));
  {
    std::vector<Matrix> blocks;
    for (int j = 0; j < 2; ++j)
      blocks.push_back(matgamma::random_spd(3, rng, 0.5, 1.5));
    specs.push_back(T15Spec(3, 2, std::move(blocks),
                            matgamma::haar_orthogonal(2, rng)));
  }
  {
    Matrix gamma(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) gamma(i, j) = 0.5 + 0.3 * (i + j);
    specs.push_back(T2Spec(2, 3, matgamma::haar_orthogonal(2, rng),
                           matgamma::haar_orthogonal(3, rng), gamma));
  }
  specs.push_back(T3Spec(matgamma::random_spd(4, rng, 0.5, 2.0),
                         matgamma::random_spd(3, rng, 0.5, 2.0),
                         rng.normal_matrix(4, 3)));

  for (const auto& spec : specs) {
    const matgamma::SymMatrix theta = matgamma::build_precision(spec);
    const int n = matgamma::model_n(spec), k = matgamma::model_k(spec);
    Vector mu = Vector::Zero(n * k);
    if (const T3Spec* t3 = std::get_if<T3Spec>(&spec))
      mu = matgamma::vec_rows(t3->mean());
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix X = rng.normal_matrix(n, k);
      const Vector v = matgamma::vec_rows(X) - mu;
      const double oracle = 0.5 * theta.log_det() -
                            0.5 * n * k * std::log(2.0 * M_PI) -
                            0.5 * v.dot(theta.matrix() * v);
      CHECK(matgamma::log_density(spec, X) ==
            doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("scalar T3 at zero is the standard normal") {
  const T3Spec t3(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  CHECK(matgamma::log_density(ModelSpec(t3), Matrix::Zero(1, 1)) ==
        doctest::Approx(-0.5 * std::log(2.0 * M_PI)).epsilon(1e-14));
}

TEST_CASE("nesting conversions preserve the distribution") {
  matgamma::RngStream rng(16);
  const T3Spec t3(matgamma::random_spd(3, rng, 0.5, 2.0),
                  matgamma::random_spd(2, rng, 0.5, 2.0));
  const T2Spec t2 = matgamma::to_t2(t3);
  const T15Spec t15 = matgamma::to_t15(t2);
  const T1Spec t1 = matgamma::to_t1(t15);

  CHECK((t3.theta() - t2.theta()).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((t2.theta() - t15.theta()).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK((t15.theta() - t1.theta()).cwiseAbs().maxCoeff() <= 1e-11);

  for (int rep = 0; rep < 8; ++rep) {
    const Matrix X = rng.normal_matrix(3, 2);
    const double ref = matgamma::log_density(ModelSpec(t3), X);
    CHECK(matgamma::log_density(ModelSpec(t2), X) ==
          doctest::Approx(ref).epsilon(1e-10));
    CHECK(matgamma::log_density(ModelSpec(t15), X) ==
          doctest::Approx(ref).epsilon(1e-10));
    CHECK(matgamma::log_density(ModelSpec(t1), X) ==
          doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("density integrates to one for nk <= 2") {
  // scalar T3
  const T3Spec scalar(Matrix::Identity(1, 1) * 0.8, Matrix::Identity(1, 1));
  const double sd = std::sqrt(0.8);
  const double one_d = matgamma::adaptive_simpson(
      [&](double x) {
        return std::exp(
            matgamma::log_density(ModelSpec(scalar), Matrix::Constant(1, 1, x)));
      },
      -8.0 * sd, 8.0 * sd, 1e-8);
  CHECK(one_d == doctest::Approx(1.0).epsilon(1e-4));

  // 1 x 2 T3 with correlation between the two entries
  Matrix psi(2, 2);
  psi << 1.0, 0.4, 0.4, 0.7;
  const T3Spec pair(Matrix::Identity(1, 1), psi);
  auto inner = [&](double x) {
    return matgamma::adaptive_simpson(
        [&](double y) {
          Matrix X(1, 2);
          X << x, y;
          return std::exp(matgamma::log_density(ModelSpec(pair), X));
        },
        -8.0, 8.0, 1e-9);
  };
  const double two_d = matgamma::adaptive_simpson(inner, -8.0, 8.0, 1e-7);
  CHECK(two_d == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("sampler determinism is bitwise") {
  const T3Spec t3(Matrix::Identity(2, 2), Matrix::Identity(2, 2) * 0.5);
  const auto a = matgamma::sample(ModelSpec(t3), 10, 12345);
  const auto b = matgamma::sample(ModelSpec(t3), 10, 12345);
  for (int i = 0; i < 10; ++i)
    CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);
  const auto c = matgamma::sample(ModelSpec(t3), 10, 54321);
  CHECK((a[0] - c[0]).cwiseAbs().maxCoeff() != 0.0);
}

TEST_CASE("degrees of freedom table") {
  CHECK(matgamma::degrees_of_freedom(FamilyTag::T3, 3, 2) == 5);
  CHECK(matgamma::degrees_of_freedom(FamilyTag::T2, 3, 2) == 6);
  CHECK(matgamma::degrees_of_freedom(FamilyTag::T15, 2, 3) == 9);
  CHECK(matgamma::degrees_of_freedom(FamilyTag::T1, 3, 2) == 18);
  // nesting never increases the free-parameter count (the published table
  // breaks this at n = 1 or k = 1, where nk < n + k, so start at 2)
  for (int n = 2; n <= 5; ++n)
    for (int k = 2; k <= 5; ++k) {
      using matgamma::degrees_of_freedom;
      CHECK(degrees_of_freedom(FamilyTag::T1, n, k) >=
            degrees_of_freedom(FamilyTag::T15, n, k));
      CHECK(degrees_of_freedom(FamilyTag::T15, n, k) >=
            degrees_of_freedom(FamilyTag::T2, n, k));
      CHECK(degrees_of_freedom(FamilyTag::T2, n, k) >=
            degrees_of_freedom(FamilyTag::T3, n, k));
    }
}

TEST_CASE("structural validation rejects bad specs") {
  // non-orthonormal frame
  CHECK_THROWS_AS(T3Spec(Matrix::Identity(2, 2), -Matrix::Identity(2, 2)),
                  std::invalid_argument);
  Matrix frame(2, 2);
  frame << 1.0, 1.0, 0.0, 1.0;
  std::vector<Matrix> blocks(2, Matrix::Identity(2, 2));
  CHECK_THROWS_AS(T15Spec(2, 2, blocks, frame), std::invalid_argument);

  // off-diagonal block with a nonzero diagonal entry
  std::vector<std::vector<Matrix>> grid(2, std::vector<Matrix>(2, Matrix()));
  grid[0][0] = grid[1][1] = Matrix::Identity(2, 2);
  Matrix off(2, 2);
  off << 0.1, 0.2, 0.2, 0.0;
  grid[0][1] = off;
  grid[1][0] = off.transpose();
  CHECK_THROWS_AS(T1Spec(2, 2, grid, Matrix::Identity(2, 2)),
                  std::invalid_argument);

  // negative gamma
  Matrix gamma = Matrix::Constant(2, 2, -1.0);
  CHECK_THROWS_AS(T2Spec(2, 2, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                         gamma),
                  std::invalid_argument);
}

TEST_CASE("model JSON round trip is lossless") {
  matgamma::RngStream rng(19);
  std::vector<ModelSpec> specs;
  specs.push_back(matgamma::make_t1_coupled(2, 2, 0.2, 7));
  specs.push_back(T3Spec(matgamma::random_spd(2, rng, 0.5, 2.0),
                         matgamma::random_spd(2, rng, 0.5, 2.0),
                         rng.normal_matrix(2, 2)));
  for (const auto& spec : specs) {
    const auto j = matgamma::model_to_json(spec);
    const ModelSpec back = matgamma::model_from_json(j);
    const Matrix& ta = std::visit([](const auto& s) -> const Matrix& { return s.theta(); }, spec);
    const Matrix& tb = std::visit([](const auto& s) -> const Matrix& { return s.theta(); }, back);
    CHECK((ta - tb).cwiseAbs().maxCoeff() == 0.0);
  }
}
