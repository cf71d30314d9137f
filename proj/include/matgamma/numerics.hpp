#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <random>

namespace matgamma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Deterministic stream splitting: mixes (seed, stream) so that parallel
// blocks get decorrelated, reproducible generators.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Owned RNG stream.  A given (seed, stream) pair always reproduces the same
// sequence within one build.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : gen_(mix_seed(seed, stream)) {}
  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }
  std::mt19937_64& generator() { return gen_; }

  Matrix normal_matrix(int rows, int cols);

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Adaptive Simpson quadrature on [a, b] with absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth = 48);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Quantile of the chi-square distribution with dof degrees of freedom.
double chi2_quantile(double p, int dof);

// Two-sample Kolmogorov-Smirnov statistic (inputs need not be sorted).
double ks_two_sample(std::vector<double> x, std::vector<double> y);

// Kronecker product, row-major-block layout matching vec-of-transpose
// stacking: (A (x) B)[(i-1)k+j, (i'-1)k+j'] = A(i,i') B(j,j').
Matrix kron(const Matrix& A, const Matrix& B);

// vec(X'): stacks the rows of X into a single column.
Vector vec_rows(const Matrix& X);
Matrix unvec_rows(const Vector& v, int rows, int cols);

// Running mean / standard-error accumulator.
struct MeanAccumulator {
  long count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const MeanAccumulator& o) {
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return sum / count; }
  double variance() const {
    if (count < 2) return 0.0;
    double v = (sum_sq - sum * sum / count) / (count - 1);
    return v > 0.0 ? v : 0.0;
  }
  double std_error() const;
};

}  // namespace matgamma
