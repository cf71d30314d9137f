#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <utility>
#include <vector>

#include "matgamma/partitions.hpp"

namespace matgamma {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class SymMatrix;  // specfun.hpp

// Coefficients of the zonal polynomials of one weight in the monomial
// symmetric-function basis, restricted to partitions with at most max_parts
// parts (the recurrence is closed under that restriction).  Built by the
// Jack recurrence at Jack parameter 2, then rescaled so that the same-weight
// values sum to (tr X)^m.
struct ZonalWeightBlock {
  int weight = 0;
  int max_parts = 0;
  std::vector<Partition> parts;          // reverse-lexicographic order
  std::map<std::vector<int>, int> index; // partition -> position in `parts`
  // rows[i] holds (column index, coefficient) for C_{parts[i]}.
  std::vector<std::vector<std::pair<int, double>>> rows;
  // Exact rationals kept alongside the doubles for low weights.
  std::vector<std::vector<std::pair<int, mpq_class>>> exact_rows;
  bool exact() const { return !exact_rows.empty(); }
};

// Lazily extended cache of zonal coefficient tables.  Construction of a
// weight block is serialized; finished blocks are immutable and evaluation
// is safe for concurrent callers.
class ZonalTable {
 public:
  // Coefficients are built in exact rational arithmetic up to
  // exact_max_weight and in double beyond (the recurrence has no
  // cancellation, every contribution is nonnegative).
  explicit ZonalTable(int max_weight, int exact_max_weight = 20);

  int max_weight() const { return max_weight_; }

  // Throws std::domain_error("zonal table exhausted...") past max_weight.
  const ZonalWeightBlock& block(int weight, int max_parts) const;

  // C_kappa at a spectrum; exactly zero when kappa has more parts than eigs.
  double value(const Partition& kappa, const Vector& eigs) const;

  // C_kappa(I_n) via the all-ones spectrum.
  double value_identity(const Partition& kappa, int n) const;

  // CSV dump: weight,kappa,monomial,coefficient.
  void dump_csv(std::ostream& os, int up_to_weight, int max_parts) const;

 private:
  int max_weight_;
  int exact_max_weight_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, int>, std::unique_ptr<ZonalWeightBlock>> blocks_;
};

// Shared process-wide table used by the convenience entry points below and
// by the hypergeometric series.
ZonalTable& shared_zonal_table();

// Monomial symmetric function values m_lambda(eigs) for every lambda in the
// block, in block order.  Partitions with more parts than eigs has entries
// give exactly 0.
Vector monomial_values(const ZonalWeightBlock& block, const Vector& eigs);

// m_lambda at the all-ones spectrum of length n (a counting formula).
double monomial_value_ones(const Partition& lambda, int n);

// Zonal polynomial C_kappa evaluated at the eigenvalues `eigs`.
double zonal_C(const Partition& kappa, const Vector& eigs);
double zonal_C(const Partition& kappa, const Vector& eigs, const ZonalTable& table);

// Two-argument normalization C_kappa(X) C_kappa(Y) / C_kappa(I_n) for
// same-size symmetric X, Y.
double zonal_two_arg(const Partition& kappa, const SymMatrix& X, const SymMatrix& Y);

}  // namespace matgamma
