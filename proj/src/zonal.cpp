#include "matgamma/zonal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "matgamma/specfun.hpp"

namespace matgamma {

namespace {

// rho_kappa = sum_i k_i (k_i - i), 1-based i.  Strictly increasing along
// upward moves in dominance order, so the recurrence denominators below are
// positive.
long long rho(const std::vector<int>& p) {
  long long r = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    r += static_cast<long long>(p[i]) * (p[i] - static_cast<long long>(i) - 1);
  return r;
}

std::vector<int> sorted_nonzero(std::vector<int> v) {
  std::sort(v.begin(), v.end(), std::greater<int>());
  while (!v.empty() && v.back() == 0) v.pop_back();
  return v;
}

// Scale from the monic Jack polynomial (alpha = 2) to the C normalization:
// gamma = 2^m m! / prod_{cells} (2 a(s) + l(s) + 2).
mpq_class c_scale_exact(const Partition& kappa) {
  const int m = kappa.weight();
  mpz_class num = 1;
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), m);
  for (int j = 2; j <= m; ++j) num *= j;
  const Partition conj = kappa.conjugate();
  mpz_class den = 1;
  for (int i = 0; i < kappa.size(); ++i)
    for (int j = 0; j < kappa.part(i); ++j) {
      const int arm = kappa.part(i) - j - 1;
      const int leg = conj.part(j) - i - 1;
      den *= 2 * arm + leg + 2;
    }
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

double c_scale_log(const Partition& kappa) {
  const int m = kappa.weight();
  double lg = m * std::log(2.0) + std::lgamma(m + 1.0);
  const Partition conj = kappa.conjugate();
  for (int i = 0; i < kappa.size(); ++i)
    for (int j = 0; j < kappa.part(i); ++j) {
      const int arm = kappa.part(i) - j - 1;
      const int leg = conj.part(j) - i - 1;
      lg -= std::log(2.0 * arm + leg + 2.0);
    }
  return lg;
}

// Builds one weight block.  Coefficients of C_kappa on monomials m_lambda
// via the eigenfunction recurrence of the Laplace-Beltrami operator:
//   c_{kappa,lambda} = sum_{(i,j,t)} (lambda_i - lambda_j + 2t)
//                      c_{kappa,mu(i,j,t)} / (rho_kappa - rho_lambda),
// mu = lambda + t e_i - t e_j re-sorted, summed over i < j, 1 <= t <= lambda_j.
// Terms whose mu is not dominated by kappa vanish through the zero lookup.
template <typename Rat>
void build_rows(ZonalWeightBlock& blk, std::vector<std::vector<Rat>>& dense) {
  const int count = static_cast<int>(blk.parts.size());
  dense.assign(count, {});
  std::vector<long long> rho_of(count);
  for (int i = 0; i < count; ++i) rho_of[i] = rho(blk.parts[i].parts());

  for (int a = 0; a < count; ++a) {
    std::vector<Rat>& c = dense[a];
    c.assign(count, Rat(0));
    c[a] = Rat(1);
    for (int b = a + 1; b < count; ++b) {
      const std::vector<int>& lam = blk.parts[b].parts();
      const int len = static_cast<int>(lam.size());
      Rat num(0);
      for (int j = 1; j < len; ++j) {
        for (int i = 0; i < j; ++i) {
          std::vector<int> v = lam;
          for (int t = 1; t <= lam[j]; ++t) {
            v[i] += 1;
            v[j] -= 1;
            auto mu = sorted_nonzero(v);
            auto it = blk.index.find(mu);
            if (it == blk.index.end()) continue;  // parts cap exceeded upstream
            const Rat& cmu = dense[a][it->second];
            if (cmu == Rat(0)) continue;
            num += Rat(lam[i] - lam[j] + 2 * t) * cmu;
          }
        }
      }
      if (num != Rat(0)) c[b] = num / Rat(static_cast<double>(rho_of[a] - rho_of[b]));
    }
  }
}

// Rational instantiation needs exact integer construction.
template <>
void build_rows<mpq_class>(ZonalWeightBlock& blk,
                           std::vector<std::vector<mpq_class>>& dense) {
  const int count = static_cast<int>(blk.parts.size());
  dense.assign(count, {});
  std::vector<long long> rho_of(count);
  for (int i = 0; i < count; ++i) rho_of[i] = rho(blk.parts[i].parts());

  for (int a = 0; a < count; ++a) {
    std::vector<mpq_class>& c = dense[a];
    c.assign(count, mpq_class(0));
    c[a] = 1;
    for (int b = a + 1; b < count; ++b) {
      const std::vector<int>& lam = blk.parts[b].parts();
      const int len = static_cast<int>(lam.size());
      mpq_class num = 0;
      for (int j = 1; j < len; ++j) {
        for (int i = 0; i < j; ++i) {
          std::vector<int> v = lam;
          for (int t = 1; t <= lam[j]; ++t) {
            v[i] += 1;
            v[j] -= 1;
            auto mu = sorted_nonzero(v);
            auto it = blk.index.find(mu);
            if (it == blk.index.end()) continue;
            const mpq_class& cmu = dense[a][it->second];
            if (cmu == 0) continue;
            num += mpq_class(lam[i] - lam[j] + 2 * t) * cmu;
          }
        }
      }
      if (num != 0) {
        mpq_class d(static_cast<long>(rho_of[a] - rho_of[b]));
        c[b] = num / d;
      }
    }
  }
}

std::unique_ptr<ZonalWeightBlock> build_block(int weight, int max_parts,
                                              bool exact_tier) {
  auto blk = std::make_unique<ZonalWeightBlock>();
  blk->weight = weight;
  blk->max_parts = max_parts;
  blk->parts = partitions_of(weight, max_parts);
  for (std::size_t i = 0; i < blk->parts.size(); ++i)
    blk->index[blk->parts[i].parts()] = static_cast<int>(i);
  const int count = static_cast<int>(blk->parts.size());
  blk->rows.resize(count);
  // Exact rational construction is quadratic in the partition count; fall
  // back to the (cancellation-free) double recurrence for wide blocks.
  const bool exact =
      exact_tier &&
      static_cast<double>(count) * count * std::max(weight, 1) <= 2e6;

  if (exact) {
    std::vector<std::vector<mpq_class>> dense;
    build_rows<mpq_class>(*blk, dense);
    blk->exact_rows.resize(count);
    for (int a = 0; a < count; ++a) {
      mpq_class scale = c_scale_exact(blk->parts[a]);
      for (int b = a; b < count; ++b) {
        if (dense[a][b] == 0) continue;
        mpq_class v = dense[a][b] * scale;
        blk->exact_rows[a].emplace_back(b, v);
        blk->rows[a].emplace_back(b, v.get_d());
      }
    }
  } else {
    std::vector<std::vector<double>> dense;
    build_rows<double>(*blk, dense);
    for (int a = 0; a < count; ++a) {
      const double scale_log = c_scale_log(blk->parts[a]);
      for (int b = a; b < count; ++b) {
        if (dense[a][b] == 0.0) continue;
        // Every monic coefficient is nonnegative, so log rescaling is exact
        // up to rounding.
        const double v = std::exp(scale_log + std::log(dense[a][b]));
        blk->rows[a].emplace_back(b, v);
      }
    }
  }
  return blk;
}

}  // namespace

ZonalTable::ZonalTable(int max_weight, int exact_max_weight)
    : max_weight_(max_weight), exact_max_weight_(exact_max_weight) {
  if (max_weight < 0) throw std::invalid_argument("ZonalTable: max_weight < 0");
}

const ZonalWeightBlock& ZonalTable::block(int weight, int max_parts) const {
  if (weight < 0 || max_parts < 1)
    throw std::invalid_argument("ZonalTable::block: bad arguments");
  if (weight > max_weight_)
    throw std::domain_error("zonal table exhausted: weight " +
                            std::to_string(weight) + " exceeds max weight " +
                            std::to_string(max_weight_));
  max_parts = std::min(max_parts, std::max(weight, 1));
  std::lock_guard<std::mutex> lock(mutex_);
  auto key = std::make_pair(weight, max_parts);
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    it = blocks_
             .emplace(key, build_block(weight, max_parts,
                                       weight <= exact_max_weight_))
             .first;
  }
  return *it->second;
}

double ZonalTable::value(const Partition& kappa, const Vector& eigs) const {
  const int n = static_cast<int>(eigs.size());
  if (n < 1) throw std::invalid_argument("zonal_C: empty spectrum");
  if (kappa.size() > n) return 0.0;
  if (kappa.empty()) return 1.0;
  const ZonalWeightBlock& blk = block(kappa.weight(), n);
  auto it = blk.index.find(kappa.parts());
  if (it == blk.index.end()) return 0.0;
  const Vector mono = monomial_values(blk, eigs);
  double v = 0.0;
  for (const auto& [col, coef] : blk.rows[it->second]) v += coef * mono[col];
  return v;
}

double ZonalTable::value_identity(const Partition& kappa, int n) const {
  if (kappa.size() > n) return 0.0;
  if (kappa.empty()) return 1.0;
  const ZonalWeightBlock& blk = block(kappa.weight(), n);
  auto it = blk.index.find(kappa.parts());
  if (it == blk.index.end()) return 0.0;
  double v = 0.0;
  for (const auto& [col, coef] : blk.rows[it->second])
    v += coef * monomial_value_ones(blk.parts[col], n);
  return v;
}

void ZonalTable::dump_csv(std::ostream& os, int up_to_weight, int max_parts) const {
  os << "weight,kappa,monomial,coefficient\n";
  char buf[40];
  for (int m = 0; m <= up_to_weight; ++m) {
    const ZonalWeightBlock& blk = block(m, std::max(max_parts, 1));
    for (std::size_t a = 0; a < blk.parts.size(); ++a) {
      for (const auto& [col, coef] : blk.rows[a]) {
        std::snprintf(buf, sizeof(buf), "%.17g", coef);
        os << m << ',' << blk.parts[a].to_string() << ','
           << blk.parts[col].to_string() << ',' << buf << '\n';
      }
    }
  }
}

ZonalTable& shared_zonal_table() {
  static ZonalTable table(512);
  return table;
}

Vector monomial_values(const ZonalWeightBlock& block, const Vector& eigs) {
  const int n = static_cast<int>(eigs.size());
  const int m = block.weight;
  // Power table: pw(i, e) = eigs[i]^e.
  Eigen::MatrixXd pw(n, m + 1);
  for (int i = 0; i < n; ++i) {
    pw(i, 0) = 1.0;
    for (int e = 1; e <= m; ++e) pw(i, e) = pw(i, e - 1) * eigs[i];
  }
  Vector out(block.parts.size());
  std::vector<char> used(n, 0);
  for (std::size_t idx = 0; idx < block.parts.size(); ++idx) {
    const Partition& lam = block.parts[idx];
    if (lam.size() > n) {
      out[idx] = 0.0;
      continue;
    }
    if (lam.empty()) {
      out[idx] = 1.0;
      continue;
    }
    // Group equal parts; sum products over distinct variable assignments.
    std::vector<std::pair<int, int>> groups;  // (value, count)
    for (int p : lam.parts()) {
      if (!groups.empty() && groups.back().first == p)
        ++groups.back().second;
      else
        groups.emplace_back(p, 1);
    }
    double total = 0.0;
    std::fill(used.begin(), used.end(), 0);
    // Choose `count` unused indices for each group, smallest index first to
    // avoid revisiting permutations within a group.
    auto rec = [&](auto&& self, std::size_t g, double prod) -> void {
      if (g == groups.size()) {
        total += prod;
        return;
      }
      const auto [value, count] = groups[g];
      std::vector<int> chosen;
      auto pick = [&](auto&& pickself, int start, int left, double p) -> void {
        if (left == 0) {
          self(self, g + 1, p);
          return;
        }
        for (int i = start; i <= n - left; ++i) {
          if (used[i]) continue;
          used[i] = 1;
          pickself(pickself, i + 1, left - 1, p * pw(i, value));
          used[i] = 0;
        }
      };
      pick(pick, 0, count, prod);
    };
    rec(rec, 0, 1.0);
    out[idx] = total;
  }
  return out;
}

double monomial_value_ones(const Partition& lambda, int n) {
  const int l = lambda.size();
  if (l > n) return 0.0;
  if (l == 0) return 1.0;
  // Number of distinct rearrangements over n slots:
  // n! / ((n - l)! * prod_v mult_v!)
  double v = 1.0;
  for (int i = 0; i < l; ++i) v *= (n - i);
  int run = 1;
  for (int i = 1; i < l; ++i) {
    if (lambda.part(i) == lambda.part(i - 1)) {
      ++run;
      v /= run;
    } else {
      run = 1;
    }
  }
  return v;
}

double zonal_C(const Partition& kappa, const Vector& eigs) {
  return shared_zonal_table().value(kappa, eigs);
}

double zonal_C(const Partition& kappa, const Vector& eigs, const ZonalTable& table) {
  return table.value(kappa, eigs);
}

double zonal_two_arg(const Partition& kappa, const SymMatrix& X, const SymMatrix& Y) {
  if (X.dim() != Y.dim())
    throw std::invalid_argument("zonal_two_arg: dimension mismatch");
  const int n = X.dim();
  if (kappa.size() > n) return 0.0;
  if (kappa.empty()) return 1.0;
  const double ci = shared_zonal_table().value_identity(kappa, n);
  if (ci == 0.0)
    throw std::invalid_argument("zonal_two_arg: C_kappa(I_n) vanishes");
  return zonal_C(kappa, X.eigenvalues()) * zonal_C(kappa, Y.eigenvalues()) / ci;
}

}  // namespace matgamma
