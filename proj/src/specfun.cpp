#include "matgamma/specfun.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "matgamma/manifolds.hpp"
#include "matgamma/zonal.hpp"

namespace matgamma {

SymMatrix::SymMatrix(const Matrix& m, double sym_tol) : mat_(m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument("SymMatrix: matrix must be square and nonempty");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale)
    throw std::invalid_argument("SymMatrix: matrix is not symmetric");
  mat_ = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_);
  eigs_ = es.eigenvalues();
  vecs_ = es.eigenvectors();
  const double top = eigs_.cwiseAbs().maxCoeff();
  pd_ = eigs_.minCoeff() > 1e-10 * top && top > 0.0;
}

double SymMatrix::spectral_radius() const { return eigs_.cwiseAbs().maxCoeff(); }

double SymMatrix::log_det() const {
  if (!pd_) throw std::domain_error("SymMatrix::log_det: matrix is not positive definite");
  return eigs_.array().log().sum();
}

Matrix SymMatrix::sqrt() const {
  if (eigs_.minCoeff() < -1e-10 * std::max(1.0, spectral_radius()))
    throw std::domain_error("SymMatrix::sqrt: matrix is not positive semidefinite");
  Vector r = eigs_.cwiseMax(0.0).cwiseSqrt();
  return vecs_ * r.asDiagonal() * vecs_.transpose();
}

Matrix SymMatrix::inverse() const {
  if (!pd_) throw std::domain_error("SymMatrix::inverse: matrix is not positive definite");
  return vecs_ * eigs_.cwiseInverse().asDiagonal() * vecs_.transpose();
}

double etr(const Matrix& X) { return std::exp(X.trace()); }

double mv_gamma_ln(int k, double a) {
  if (k < 1) throw std::invalid_argument("mv_gamma_ln: k must be >= 1");
  if (!(a > 0.5 * (k - 1)))
    throw std::domain_error(
        "mv_gamma_ln: a must exceed (k-1)/2, the continuous edge of the "
        "Gindikin set");
  double v = 0.25 * k * (k - 1) * std::log(M_PI);
  for (int i = 0; i < k; ++i) v += std::lgamma(a - 0.5 * i);
  return v;
}

void HypergeomConfig::validate_for_dim(int n) const {
  if (max_weight < 1) throw std::invalid_argument("HypergeomConfig: max_weight must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("HypergeomConfig: rel_tol must be > 0");
  for (double b : lower) {
    for (int i = 1; i <= n; ++i) {
      for (int t = 0; t < max_weight; ++t) {
        const double pole = 0.5 * (i - 1) - t;
        if (std::abs(b - pole) < 1e-12)
          throw std::domain_error(
              "HypergeomConfig: lower parameter " + std::to_string(b) +
              " lies on the pole lattice (i-1)/2 - t reachable by the series");
      }
    }
  }
}

double SeriesEval::log_value() const {
  if (!(mantissa > 0.0))
    throw std::domain_error("SeriesEval::log_value: sum is not positive");
  return std::log(mantissa) + log_scale;
}

namespace {

// Shared truncated-series driver.  For each weight m it accumulates
//   sum_kappa [prod (a_i)_kappa / prod (b_j)_kappa] * Z_kappa / m!
// where Z_kappa is C_kappa(x) for the one-argument series and
// C_kappa(x) C_kappa(y) / C_kappa(I_norm) for the two-argument one.
// Spectra are rescaled to unit max magnitude and the homogeneity factor is
// reapplied through the log scale, so large arguments cannot overflow the
// per-weight sums.
SeriesEval series_driver(const HypergeomConfig& cfg, const Vector& eigs_x,
                         const Vector* eigs_y, int norm_dim) {
  const int nx = static_cast<int>(eigs_x.size());
  if (nx < 1) throw std::invalid_argument("hypergeom: empty spectrum");
  const int parts_cap = eigs_y ? std::min<int>(nx, eigs_y->size()) : nx;
  cfg.validate_for_dim(parts_cap);

  const double sx = eigs_x.cwiseAbs().maxCoeff();
  const double sy = eigs_y ? eigs_y->cwiseAbs().maxCoeff() : 0.0;
  Vector x_scaled = sx > 0.0 ? Vector(eigs_x / sx) : eigs_x;
  Vector y_scaled;
  if (eigs_y && sy > 0.0) y_scaled = *eigs_y / sy;
  const bool zero_argument = (sx == 0.0) || (eigs_y && sy == 0.0);
  // log of the homogeneity factor restored per unit weight
  const double log_scale_per_weight =
      (sx > 0.0 ? std::log(sx) : 0.0) + (eigs_y && sy > 0.0 ? std::log(sy) : 0.0);

  ZonalTable& table = shared_zonal_table();
  SeriesEval ev;
  ev.mantissa = 0.0;
  ev.log_scale = 0.0;

  double acc = 1.0;       // mantissa of the running sum
  double acc_log = 0.0;   // scale of the running sum (weight 0 contributes 1)
  int consecutive_small = 0;
  double last_w = 1.0;
  int stop_weight = 0;
  bool converged = false;

  for (int m = 1; m <= cfg.max_weight && !zero_argument; ++m) {
    const ZonalWeightBlock& blk = table.block(m, nx);
    const Vector mono_x = monomial_values(blk, x_scaled);
    Vector mono_y, mono_ones;
    if (eigs_y) {
      mono_y = monomial_values(blk, y_scaled);
      mono_ones.resize(blk.parts.size());
      for (std::size_t c = 0; c < blk.parts.size(); ++c)
        mono_ones[c] = monomial_value_ones(blk.parts[c], norm_dim);
    }

    double inner = 0.0;
    for (std::size_t a = 0; a < blk.parts.size(); ++a) {
      const Partition& kappa = blk.parts[a];
      if (kappa.size() > parts_cap) continue;
      double cx = 0.0;
      for (const auto& [col, coef] : blk.rows[a]) cx += coef * mono_x[col];
      double z = cx;
      if (eigs_y) {
        double cy = 0.0, ci = 0.0;
        for (const auto& [col, coef] : blk.rows[a]) {
          cy += coef * mono_y[col];
          ci += coef * mono_ones[col];
        }
        if (ci == 0.0) continue;
        z = cx * cy / ci;
      }
      if (z == 0.0) continue;
      double ratio = 1.0;
      for (double p : cfg.upper) ratio *= gen_pochhammer(p, kappa);
      for (double p : cfg.lower) ratio /= gen_pochhammer(p, kappa);
      inner += ratio * z;
    }

    const double w_log = m * log_scale_per_weight - std::lgamma(m + 1.0);
    // weight contribution = inner * exp(w_log); fold into (acc, acc_log)
    double w_mag = 0.0;
    if (inner != 0.0) {
      const double term_log = std::log(std::abs(inner)) + w_log;
      const double common = std::max(acc_log, term_log);
      acc = acc * std::exp(acc_log - common) +
            (inner > 0 ? 1.0 : -1.0) * std::exp(term_log - common);
      acc_log = common;
      // renormalize so the mantissa stays near unit magnitude
      if (acc != 0.0) {
        const double adj = std::log(std::abs(acc));
        acc_log += adj;
        acc *= std::exp(-adj);
      }
      w_mag = std::exp(term_log - acc_log);
    }
    last_w = w_mag;
    stop_weight = m;
    const double acc_mag = std::abs(acc);
    if (w_mag <= cfg.rel_tol * acc_mag) {
      if (++consecutive_small >= 2) {
        converged = true;
        break;
      }
    } else {
      consecutive_small = 0;
    }
    if (!std::isfinite(acc) || !std::isfinite(acc_log)) {
      converged = false;
      break;
    }
  }
  if (zero_argument) {
    converged = true;
    last_w = 0.0;
    stop_weight = 0;
  }

  ev.mantissa = acc;
  ev.log_scale = acc_log;
  ev.result.value = acc * std::exp(acc_log);
  ev.result.last_weight_contribution = last_w * std::exp(acc_log);
  ev.result.truncated_at = stop_weight;
  ev.result.converged = converged;
  return ev;
}

}  // namespace

SeriesEval hypergeom_series(const HypergeomConfig& cfg, const Vector& eigs_x) {
  return series_driver(cfg, eigs_x, nullptr, 0);
}

SeriesEval hypergeom_two_series(const HypergeomConfig& cfg, const Vector& eigs_x,
                                const Vector& eigs_y, int norm_dim) {
  return series_driver(cfg, eigs_x, &eigs_y, norm_dim);
}

SeriesResult hypergeom_one(const HypergeomConfig& cfg, const SymMatrix& X) {
  const std::size_t p = cfg.upper.size(), q = cfg.lower.size();
  if (p == 1 && q == 0 && X.spectral_radius() >= 1.0)
    throw std::domain_error("hypergeom_one: 1F0 diverges for spectral radius >= 1");
  if (!cfg.force_series) {
    if (p == 0 && q == 0) {
      SeriesResult r;
      r.value = etr(X.matrix());
      r.converged = true;
      return r;
    }
    if (p == 1 && q == 0) {
      SeriesResult r;
      r.value = std::exp(-cfg.upper[0] *
                         (1.0 - X.eigenvalues().array()).log().sum());
      r.converged = true;
      return r;
    }
  }
  return hypergeom_series(cfg, X.eigenvalues()).result;
}

SeriesResult hypergeom_two(const HypergeomConfig& cfg, const SymMatrix& X,
                           const SymMatrix& Y) {
  if (Y.dim() > X.dim())
    throw std::invalid_argument(
        "hypergeom_two: dimension mismatch (second argument larger than first)");
  if (cfg.upper.size() == 1 && cfg.lower.empty() &&
      X.spectral_radius() * Y.spectral_radius() >= 1.0)
    throw std::domain_error("hypergeom_two: 1F0 diverges for this argument pair");
  return hypergeom_two_series(cfg, X.eigenvalues(), Y.eigenvalues(), X.dim()).result;
}

HaarAverage haar_average_oracle(const HypergeomConfig& cfg, const SymMatrix& X,
                                const SymMatrix& Y, long samples,
                                std::uint64_t seed, int block_count,
                                int threads) {
  const int n = X.dim(), k = Y.dim();
  if (n < k) throw std::invalid_argument("haar_average_oracle: requires n >= k");
  if (samples < 100) throw std::invalid_argument("haar_average_oracle: samples must be >= 100");
  if (block_count < 2) block_count = 2;
  if (block_count > samples) block_count = static_cast<int>(samples);

  // Real product spectrum needs one positive-semidefinite factor.
  const bool y_psd = Y.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, Y.spectral_radius());
  const bool x_psd = X.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, X.spectral_radius());
  if (!y_psd && !x_psd)
    throw std::invalid_argument(
        "haar_average_oracle: one argument must be positive semidefinite");

  const bool pure_etr = cfg.upper.empty() && cfg.lower.empty() && !cfg.force_series;
  const Matrix yhalf = y_psd ? Y.sqrt() : Matrix();
  const Matrix xhalf = y_psd ? Matrix() : X.sqrt();

  std::vector<MeanAccumulator> acc(block_count);
  auto run_block = [&](int b) {
    RngStream rng(seed, static_cast<std::uint64_t>(b));
    const long lo = samples * b / block_count;
    const long hi = samples * (b + 1) / block_count;
    for (long s = lo; s < hi; ++s) {
      const Matrix K = haar_orthogonal(n, rng);
      const Matrix H1 = K.leftCols(k);
      double v;
      if (pure_etr) {
        v = std::exp((X.matrix() * H1 * Y.matrix() * H1.transpose()).trace());
      } else {
        Vector eigs;
        if (y_psd) {
          const Matrix inner = yhalf * H1.transpose() * X.matrix() * H1 * yhalf;
          eigs = Eigen::SelfAdjointEigenSolver<Matrix>(inner).eigenvalues();
        } else {
          const Matrix inner = xhalf * H1 * Y.matrix() * H1.transpose() * xhalf;
          eigs = Eigen::SelfAdjointEigenSolver<Matrix>(inner).eigenvalues();
        }
        v = hypergeom_series(cfg, eigs).result.value;
      }
      acc[b].add(v);
    }
  };

  threads = std::max(1, std::min(threads, block_count));
  if (threads == 1) {
    for (int b = 0; b < block_count; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int b = next.fetch_add(1); b < block_count; b = next.fetch_add(1))
          run_block(b);
      });
    for (auto& t : pool) t.join();
  }

  MeanAccumulator total;
  for (const auto& a : acc) total.merge(a);
  return {total.mean(), total.std_error()};
}

}  // namespace matgamma
