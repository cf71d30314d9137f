#include "matgamma/partitions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace matgamma {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (parts_[i] < 1) throw std::invalid_argument("Partition: parts must be positive");
    if (i > 0 && parts_[i] > parts_[i - 1])
      throw std::invalid_argument("Partition: parts must be weakly decreasing");
  }
}

Partition::Partition(std::initializer_list<int> parts)
    : Partition(std::vector<int>(parts)) {}

int Partition::weight() const {
  return std::accumulate(parts_.begin(), parts_.end(), 0);
}

Partition Partition::conjugate() const {
  if (parts_.empty()) return Partition();
  std::vector<int> c(parts_[0], 0);
  for (int p : parts_)
    for (int j = 0; j < p; ++j) ++c[j];
  return Partition(std::move(c));
}

std::string Partition::to_string() const {
  if (parts_.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i > 0) s += '|';
    s += std::to_string(parts_[i]);
  }
  return s;
}

std::vector<Partition> partitions_of(int m, int max_parts) {
  if (m < 0) throw std::invalid_argument("partitions_of: m must be >= 0");
  if (max_parts < 1) throw std::invalid_argument("partitions_of: max_parts must be >= 1");
  std::vector<Partition> out;
  if (m == 0) {
    out.emplace_back();
    return out;
  }
  // Depth-first descent with decreasing part bound; emits reverse-lex order.
  std::vector<int> stack;
  auto rec = [&](auto&& self, int remaining, int bound) -> void {
    if (remaining == 0) {
      out.emplace_back(stack);
      return;
    }
    if (static_cast<int>(stack.size()) == max_parts) return;
    int slots = max_parts - static_cast<int>(stack.size());
    for (int p = std::min(bound, remaining); p >= 1; --p) {
      if (static_cast<long long>(p) * slots < remaining) break;  // cannot finish
      stack.push_back(p);
      self(self, remaining - p, p);
      stack.pop_back();
    }
  };
  rec(rec, m, m);
  return out;
}

double gen_pochhammer(double a, const Partition& kappa) {
  double v = 1.0;
  for (int i = 0; i < kappa.size(); ++i) {
    const double base = a - 0.5 * i;
    for (int j = 0; j < kappa.part(i); ++j) v *= base + j;
  }
  return v;
}

SignedLog gen_pochhammer_signed_log(double a, const Partition& kappa) {
  SignedLog r;
  for (int i = 0; i < kappa.size(); ++i) {
    const double base = a - 0.5 * i;
    for (int j = 0; j < kappa.part(i); ++j) {
      const double f = base + j;
      if (f == 0.0) return {0, -std::numeric_limits<double>::infinity()};
      if (f < 0.0) r.sign = -r.sign;
      r.log_abs += std::log(std::abs(f));
    }
  }
  return r;
}

}  // namespace matgamma
