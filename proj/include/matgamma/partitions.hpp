#pragma once

#include <string>
#include <vector>

namespace matgamma {

// An integer partition: weakly decreasing positive parts.  Used as the
// series index of zonal-polynomial expansions.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> parts);
  Partition(std::initializer_list<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int part(int i) const { return parts_[i]; }           // 0-based
  int size() const { return static_cast<int>(parts_.size()); }
  int weight() const;
  bool empty() const { return parts_.empty(); }

  // Conjugate partition (transpose of the Young diagram).
  Partition conjugate() const;

  // "3|2|1"; empty partition prints "-".
  std::string to_string() const;

  bool operator==(const Partition& o) const { return parts_ == o.parts_; }
  bool operator!=(const Partition& o) const { return parts_ != o.parts_; }
  // Lexicographic; within a fixed weight this refines dominance order.
  bool operator<(const Partition& o) const { return parts_ < o.parts_; }

 private:
  std::vector<int> parts_;
};

// All partitions of m with at most max_parts parts, in reverse-lexicographic
// order: (m) first, then (m-1,1), ..., ending at the finest admissible
// partition.  m = 0 yields the single empty partition.
std::vector<Partition> partitions_of(int m, int max_parts);

// Generalized Pochhammer symbol in the real (zonal) convention:
//   (a)_kappa = prod_i prod_{j=1..kappa_i} (a - (i-1)/2 + j - 1).
// Empty partition gives 1; may legitimately return 0 at a pole of a factor.
double gen_pochhammer(double a, const Partition& kappa);

// Same product in sign/log-magnitude form, safe for large weights.
// Returns {sign, log|value|}; sign 0 encodes an exact zero.
struct SignedLog {
  int sign = 1;
  double log_abs = 0.0;
};
SignedLog gen_pochhammer_signed_log(double a, const Partition& kappa);

}  // namespace matgamma
