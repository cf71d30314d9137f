#include <doctest.h>

#include <cmath>

#include "matgamma/manifolds.hpp"
#include "matgamma/quadform.hpp"
#include "matgamma/verify.hpp"
#include "oracles.hpp"

using matgamma::Matrix;
using matgamma::QFModel;
using matgamma::SymMatrix;
using matgamma::Vector;

namespace {

Matrix scalar_m(double x) {
  Matrix m(1, 1);
  m << x;
  return m;
}

QFModel chi_square_model(int n) {
  return QFModel(
      matgamma::make_t1_isotropic(n, Vector::Ones(1), Matrix::Identity(1, 1)));
}

}  // namespace

TEST_CASE("scalar reduction: density of S is the chi-square density") {
  // pinned: n = 2, s = 2 -> e^{-1}/2
  CHECK(matgamma::density_S(chi_square_model(2), SymMatrix(scalar_m(2.0))) ==
        doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-13));
  for (int n : {2, 3, 5, 8})
    for (double s : {0.3, 1.0, 2.7, 6.0}) {
      CHECK(matgamma::density_S(chi_square_model(n), SymMatrix(scalar_m(s))) ==
            doctest::Approx(oracles::chi2_pdf(n, s)).epsilon(1e-12));
    }
}

TEST_CASE("noncentral scalar reduction: noncentral chi-square density") {
  const int n = 4;
  Matrix shift(n, 1);
  shift << 0.9, -0.4, 0.6, 0.2;
  const double delta = shift.squaredNorm();
  const QFModel model(
      matgamma::make_t1_isotropic(n, Vector::Ones(1), Matrix::Identity(1, 1)),
      shift);
  CHECK(model.omega()(0, 0) == doctest::Approx(delta).epsilon(1e-13));
  CHECK(model.delta()(0, 0) == doctest::Approx(delta).epsilon(1e-13));
  for (double s : {0.5, 1.5, 4.0, 9.0})
    CHECK(matgamma::density_S(model, SymMatrix(scalar_m(s))) ==
          doctest::Approx(oracles::noncentral_chi2_pdf(n, delta, s))
              .epsilon(1e-10));
}

TEST_CASE("derived quantities vanish at zero shift and the paths coincide") {
  const auto spec = matgamma::make_t1_coupled(3, 2, 0.2, 5);
  const QFModel central(spec);
  const QFModel shifted(spec, Matrix::Zero(3, 2));
  CHECK(central.omega().cwiseAbs().maxCoeff() == 0.0);
  CHECK(central.delta().cwiseAbs().maxCoeff() == 0.0);
  CHECK(shifted.central());
  matgamma::RngStream rng(3);
  const SymMatrix S(matgamma::random_spd(2, rng, 1.0, 3.0));
  // identical central code path output, bit for bit
  CHECK(matgamma::density_S(central, S) == matgamma::density_S(shifted, S));
}

TEST_CASE("separable subfamily reduces to the q-free density") {
  // A_{jj'} = beta_j delta_{jj'} Phi^{-1} with isotropic Phi = c I: the
  // closed S-density and the separable (Wishart-type) density agree.
  matgamma::RngStream rng(29);
  const int n = 4, k = 2;
  const double c = 1.6;  // Phi = c^{-1} I ... precision scale
  Vector beta(k);
  beta << 0.9, 1.7;
  const Matrix B = matgamma::haar_orthogonal(k, rng);
  const QFModel model(matgamma::make_t1_isotropic(n, Vector(c * beta), B));
  const SymMatrix phi(Matrix::Identity(n, n) / c);
  Matrix psi_inv = Matrix::Zero(k, k);
  for (int j = 0; j < k; ++j)
    psi_inv += beta[j] * B.col(j) * B.col(j).transpose();
  const SymMatrix psi(SymMatrix(psi_inv).inverse());
  for (int rep = 0; rep < 5; ++rep) {
    const SymMatrix S(matgamma::random_spd(k, rng, 0.8, 4.0));
    const double via_model = matgamma::density_S(model, S);
    for (double q : {0.5, 2.0, 3.0}) {
      CHECK(matgamma::wishart_density(n, phi, psi, S, q) ==
            doctest::Approx(via_model).epsilon(1e-8));
    }
  }
}

TEST_CASE("density of S integrates to one over the PD cone (k = 2)") {
  const int n = 5;
  Vector scales(2);
  scales << 1.0, 1.6;
  const QFModel model(
      matgamma::make_t1_isotropic(n, scales, Matrix::Identity(2, 2)));
  // Psi = diag(1, 1/1.6); S_11 ~ chi2_5, S_22 ~ chi2_5 / 1.6.
  auto integrand = [&](double s11, double s12, double s22) {
    if (s11 <= 0.0 || s22 <= 0.0 || s12 * s12 >= s11 * s22) return 0.0;
    Matrix S(2, 2);
    S << s11, s12, s12, s22;
    return matgamma::density_S(model, SymMatrix(S));
  };
  auto inner2 = [&](double s11, double s22) {
    const double lim = std::sqrt(s11 * s22);
    return matgamma::adaptive_simpson(
        [&](double s12) { return integrand(s11, s12, s22); }, -lim, lim, 2e-7,
        18);
  };
  auto inner1 = [&](double s11) {
    return matgamma::adaptive_simpson(
        [&](double s22) { return inner2(s11, s22); }, 0.0, 22.0, 2e-6, 16);
  };
  const double total =
      matgamma::adaptive_simpson(inner1, 0.0, 34.0, 2e-5, 16);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("frame consistency under signed permutations") {
  // B -> BQ with the A grid conjugated the same way leaves the model, and
  // hence the density, unchanged.
  const int n = 3, k = 2;
  const auto spec = matgamma::make_t1_coupled(n, k, 0.25, 13);
  matgamma::RngStream rng(14);
  const Matrix M = 0.7 * rng.normal_matrix(n, k);
  const QFModel base(spec, M);

  // Q: swap the two frame vectors and flip the sign of the first.
  Matrix Q(2, 2);
  Q << 0.0, 1.0, -1.0, 0.0;
  std::vector<std::vector<Matrix>> grid(k, std::vector<Matrix>(k, Matrix()));
  // A'_{rs} = q_r q_s A_{pi(r) pi(s)} with pi = (2 1), signs (-1, +1)
  const int pi[2] = {1, 0};
  const double sg[2] = {-1.0, 1.0};
  for (int r = 0; r < k; ++r)
    for (int s = 0; s < k; ++s)
      grid[r][s] = sg[r] * sg[s] * spec.A(pi[r], pi[s]);
  const matgamma::T1Spec respec(n, k, grid, spec.frame() * Q);
  const QFModel remodel(respec, M);

  CHECK((respec.theta() - spec.theta()).cwiseAbs().maxCoeff() <= 1e-12);
  for (int rep = 0; rep < 5; ++rep) {
    const SymMatrix S(matgamma::random_spd(k, rng, 0.5, 3.0));
    CHECK(matgamma::density_S(remodel, S) ==
          doctest::Approx(matgamma::density_S(base, S)).epsilon(1e-10));
  }
}

TEST_CASE("separable density: classical reductions and q invariance") {
  // k = 1, n = 2 pinned point: e^{-1}/2 for every q
  for (double q : {0.5, 1.0, 2.0}) {
    CHECK(matgamma::wishart_density(2, SymMatrix(Matrix::Identity(2, 2)),
                                    SymMatrix(scalar_m(1.0)),
                                    SymMatrix(scalar_m(2.0)), q) ==
          doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-10));
  }

  // Phi = I at q = 2: the central Wishart closed form
  matgamma::RngStream rng(33);
  const int n = 5, k = 2;
  const SymMatrix psi(matgamma::random_spd(k, rng, 0.5, 1.5));
  const SymMatrix S(matgamma::random_spd(k, rng, 1.0, 4.0));
  const double want =
      std::exp(-0.5 * (psi.inverse() * S.matrix()).trace() +
               0.5 * (n - k - 1) * S.log_det() - 0.5 * n * k * std::log(2.0) -
               matgamma::mv_gamma_ln(k, 0.5 * n) - 0.5 * n * psi.log_det());
  CHECK(matgamma::wishart_density(n, SymMatrix(Matrix::Identity(n, n)), psi, S,
                                  2.0) == doctest::Approx(want).epsilon(1e-8));

  // the |S|^{(n-k-1)/2} exponent vanishes at n = k + 1: finite limit at 0+
  const int kk = 2;
  const SymMatrix tiny(1e-8 * Matrix::Identity(kk, kk));
  const double near_zero =
      matgamma::wishart_density(kk + 1, SymMatrix(Matrix::Identity(kk + 1, kk + 1)),
                                SymMatrix(Matrix::Identity(kk, kk)), tiny, 1.0);
  const double at_origin_scale =
      std::exp(-0.5 * (kk + 1) * kk * std::log(2.0) -
               matgamma::mv_gamma_ln(kk, 0.5 * (kk + 1)));
  CHECK(near_zero == doctest::Approx(at_origin_scale).epsilon(1e-4));

  CHECK_THROWS_AS(
      matgamma::wishart_density(n, SymMatrix(Matrix::Identity(n, n)), psi, S,
                                -1.0),
      std::invalid_argument);
}

TEST_CASE("mgf: published form, alignment, and the exact route") {
  // Gamma = -I gives R = 0, W = 0: value |Theta|^{1/2}|U|^{-n/2}
  const int n = 4;
  Vector scales(2);
  scales << 1.2, 0.8;
  matgamma::RngStream rng(44);
  const Matrix frame = matgamma::haar_orthogonal(2, rng);
  const QFModel model(matgamma::make_t1_isotropic(n, scales, frame));
  const double at_minus_i = matgamma::mgf(model, -Matrix::Identity(2, 2));
  const SymMatrix U(model.trace_form());
  CHECK(at_minus_i == doctest::Approx(std::exp(0.5 * model.log_det_theta() -
                                               0.5 * n * U.log_det()))
                          .epsilon(1e-12));

  // scalar chi-square cross-check through the R-parameterization
  for (int nn : {2, 4, 6}) {
    const QFModel scalar = chi_square_model(nn);
    for (double g : {-0.5, 0.1, 0.3}) {
      const double aligned = matgamma::mgf(scalar, matgamma::mgf_gamma_for_dummy(scalar_m(g)));
      CHECK(aligned == doctest::Approx(oracles::chi2_mgf(nn, g)).epsilon(1e-12));
    }
    // the Gamma = 0 normalization factor is E etr(S/4) = 2^{n/2}, not 1
    CHECK(matgamma::mgf(scalar, Matrix::Zero(1, 1)) ==
          doctest::Approx(std::pow(2.0, 0.5 * nn)).epsilon(1e-12));
  }

  // subfamily with a rotated frame: closed form equals the exact
  // determinant route for a full symmetric dummy
  Matrix G(2, 2);
  G << 0.05, 0.02, 0.02, -0.04;
  CHECK(matgamma::mgf(model, matgamma::mgf_gamma_for_dummy(G)) ==
        doctest::Approx(matgamma::mgf_exact(model, G)).epsilon(1e-11));

  // divergence: W reaches spectral radius one
  CHECK_THROWS_AS(
      matgamma::mgf(chi_square_model(3), scalar_m(3.0)),
      std::domain_error);
}

TEST_CASE("mgf: noncentral scalar reduction") {
  const int n = 3;
  Matrix shift(n, 1);
  shift << 0.8, -0.3, 0.5;
  const double delta = shift.squaredNorm();
  const QFModel model(
      matgamma::make_t1_isotropic(n, Vector::Ones(1), Matrix::Identity(1, 1)),
      shift);
  for (double g : {-0.4, 0.15, 0.35}) {
    const double want =
        oracles::chi2_mgf(n, g) * std::exp(delta * g / (1.0 - 2.0 * g));
    CHECK(matgamma::mgf(model, matgamma::mgf_gamma_for_dummy(scalar_m(g))) ==
          doctest::Approx(want).epsilon(1e-11));
    CHECK(matgamma::mgf_exact(model, scalar_m(g)) ==
          doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("mgf-density consistency: Laplace transform of density_S") {
  const int n = 4;
  const QFModel model(matgamma::make_t1_isotropic(
      n, Vector::Constant(1, 1.3), Matrix::Identity(1, 1)));
  for (double g : {-0.3, 0.2}) {
    const double quad = matgamma::adaptive_simpson(
        [&](double s) {
          return std::exp(g * s) *
                 matgamma::density_S(model, SymMatrix(scalar_m(s)));
        },
        1e-12, 160.0, 1e-10);
    const double closed =
        matgamma::mgf(model, matgamma::mgf_gamma_for_dummy(scalar_m(g)));
    CHECK(quad == doctest::Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("wishart mgf: scalar oracle, q invariance, degenerate first arg") {
  // k = 1, Psi = 1, Phi = I_n: S ~ chi-square_n
  for (int n : {2, 5}) {
    const SymMatrix phi(Matrix::Identity(n, n));
    const SymMatrix psi(scalar_m(1.0));
    for (double g : {-0.6, 0.2}) {
      for (double q : {0.5, 1.0, 2.0, 5.0}) {
        CHECK(matgamma::mgf_wishart(n, phi, psi, scalar_m(g), q) ==
              doctest::Approx(oracles::chi2_mgf(n, g)).epsilon(1e-8));
      }
    }
  }

  // Phi = (q/2) I makes the first series argument vanish identically:
  // the value collapses to (q/2)^{nk/2} |Phi|^{-k/2} |W|^{-n/2}.
  const int n = 3, k = 2;
  const double q = 3.0;
  const SymMatrix phi(0.5 * q * Matrix::Identity(n, n));
  matgamma::RngStream rng(55);
  const SymMatrix psi(matgamma::random_spd(k, rng, 0.5, 1.2));
  Matrix G(k, k);
  G << 0.05, 0.01, 0.01, -0.06;
  Matrix gt = G;
  gt(0, 1) *= 0.5;
  gt(1, 0) *= 0.5;
  const Matrix psi_half = psi.sqrt();
  const SymMatrix W(Matrix::Identity(k, k) - q * psi_half * gt * psi_half);
  const double want = std::exp(0.5 * n * k * std::log(0.5 * q) -
                               0.5 * k * phi.log_det() - 0.5 * n * W.log_det());
  CHECK(matgamma::mgf_wishart(n, phi, psi, G, q) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("roots density: ordering support and the k = 1 identity") {
  Vector scales(2);
  scales << 1.0, 2.0;
  const QFModel model(
      matgamma::make_t1_isotropic(6, scales, Matrix::Identity(2, 2)));
  Vector bad(2);
  bad << 1.0, 3.0;  // unordered
  CHECK(matgamma::roots_density(model, bad) == 0.0);
  Vector tied(2);
  tied << 2.0, 2.0;  // Vandermonde zero boundary
  CHECK(matgamma::roots_density(model, tied) == 0.0);
  Vector neg(2);
  neg << 2.0, -0.5;
  CHECK(matgamma::roots_density(model, neg) == 0.0);

  // scalar case: identical to the density of S, central and noncentral
  const QFModel scalar(matgamma::make_t1_isotropic(
      5, Vector::Constant(1, 1.3), Matrix::Identity(1, 1)));
  Matrix shift(5, 1);
  shift << 0.3, 0.1, -0.4, 0.2, 0.5;
  const QFModel scalar_nc(scalar.spec(), shift);
  for (double s : {0.4, 1.0, 2.5, 6.0}) {
    CHECK(matgamma::roots_density(scalar, Vector::Constant(1, s)) ==
          doctest::Approx(matgamma::density_S(scalar, SymMatrix(scalar_m(s))))
              .epsilon(1e-12));
    CHECK(matgamma::roots_density(scalar_nc, Vector::Constant(1, s)) ==
          doctest::Approx(matgamma::density_S(scalar_nc, SymMatrix(scalar_m(s))))
              .epsilon(1e-12));
  }
}

TEST_CASE("roots density integrates to one over the ordered cone") {
  const int n = 6;
  const QFModel model(
      matgamma::make_t1_isotropic(n, Vector::Ones(2), Matrix::Identity(2, 2)));
  matgamma::HypergeomConfig cfg = matgamma::default_qf_config();
  cfg.max_weight = 200;
  // integrate in (u, v) = (l1 + l2, l1 - l2); the cone is v > 0
  auto inner = [&](double u) {
    return matgamma::adaptive_simpson(
        [&](double v) {
          if (v <= 0.0 || v >= u) return 0.0;
          Vector l(2);
          l << 0.5 * (u + v), 0.5 * (u - v);
          return 0.5 * matgamma::roots_density(model, l, cfg);
        },
        0.0, std::min(u, 46.0), 3e-7, 14);
  };
  const double total = matgamma::adaptive_simpson(inner, 0.0, 52.0, 3e-6, 14);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("james reduction and the classical latent-roots density") {
  // Psi = I, k = 1: chi-square again
  for (int n : {3, 6})
    for (double s : {0.5, 2.0, 5.0})
      CHECK(matgamma::james_roots_density(n, SymMatrix(scalar_m(1.0)),
                                          Vector::Constant(1, s)) ==
            doctest::Approx(oracles::chi2_pdf(n, s)).epsilon(1e-12));

  // equals roots_density of the reduced model
  matgamma::RngStream rng(66);
  const int n = 6, k = 2;
  const SymMatrix psi(matgamma::random_spd(k, rng, 0.6, 1.5));
  Eigen::SelfAdjointEigenSolver<Matrix> es(psi.inverse());
  const QFModel model(
      matgamma::make_t1_isotropic(n, es.eigenvalues(), es.eigenvectors()));
  for (int rep = 0; rep < 4; ++rep) {
    const double l2 = 0.5 + 2.0 * rng.uniform();
    const double l1 = l2 + 0.5 + 6.0 * rng.uniform();
    Vector l(2);
    l << l1, l2;
    CHECK(matgamma::james_roots_density(n, psi, l) ==
          doctest::Approx(matgamma::roots_density(model, l)).epsilon(1e-8));
  }

  // repeated root: the Vandermonde factor kills the density
  Vector tied(2);
  tied << 1.5, 1.5;
  CHECK(matgamma::james_roots_density(n, psi, tied) == 0.0);
}

TEST_CASE("1928 three-variate display") {
  // B = I: minor ratios collapse to the identity pattern
  const SymMatrix B(Matrix::Identity(3, 3));
  const int n = 8;
  const double a = 1.2, b = 0.9, c = 1.4, f = 0.2, g = -0.1, h = 0.15;
  Matrix stat(3, 3);
  stat << a, f, g, f, b, h, g, h, c;
  const double want =
      std::exp(-1.5 * std::log(M_PI) - std::lgamma(0.5 * (n - 1)) -
               std::lgamma(0.5 * (n - 2)) - std::lgamma(0.5 * (n - 3)) +
               0.5 * (n - 5) * std::log(stat.determinant()) - a - b - c);
  CHECK(matgamma::wishart1928_density_k3(a, b, c, f, g, h, B, n) ==
        doctest::Approx(want).epsilon(1e-12));

  // diagonal statistics: the determinant factorizes into three kernels
  auto diag_value = [&](double aa, double bb, double cc) {
    return matgamma::wishart1928_density_k3(aa, bb, cc, 0.0, 0.0, 0.0, B, n);
  };
  const double ratio = diag_value(2.0, 1.0, 1.5) / diag_value(1.0, 1.0, 1.5);
  CHECK(ratio == doctest::Approx(std::pow(2.0, 0.5 * (n - 5)) * std::exp(-1.0))
                     .epsilon(1e-12));

  CHECK_THROWS_AS(
      matgamma::wishart1928_density_k3(1.0, 1.0, 1.0, 0.99, 0.0, 0.0, B, n),
      std::invalid_argument);
  CHECK_THROWS_AS(
      matgamma::wishart1928_density_k3(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, B, 4),
      std::domain_error);
}

TEST_CASE("density_S preconditions") {
  const QFModel model(matgamma::make_t1_coupled(2, 3, 0.1, 21));
  CHECK_THROWS_AS(
      matgamma::density_S(model, SymMatrix(Matrix::Identity(3, 3))),
      std::domain_error);  // n <= k - 1
  const QFModel ok(matgamma::make_t1_coupled(4, 2, 0.1, 22));
  Matrix notpd(2, 2);
  notpd << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(matgamma::density_S(ok, SymMatrix(notpd)),
                  std::invalid_argument);
}
