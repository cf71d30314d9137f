#include <doctest.h>

#include <cmath>

#include "matgamma/partitions.hpp"
#include "oracles.hpp"

using matgamma::Partition;
using matgamma::gen_pochhammer;
using matgamma::partitions_of;

TEST_CASE("enumeration order and contents") {
  auto p0 = partitions_of(0, 3);
  REQUIRE(p0.size() == 1);
  CHECK(p0[0].empty());

  auto p3 = partitions_of(3, 3);
  REQUIRE(p3.size() == 3);
  CHECK(p3[0] == Partition{3});
  CHECK(p3[1] == Partition{2, 1});
  CHECK(p3[2] == Partition{1, 1, 1});

  auto p42 = partitions_of(4, 2);
  REQUIRE(p42.size() == 3);
  CHECK(p42[0] == Partition{4});
  CHECK(p42[1] == Partition{3, 1});
  CHECK(p42[2] == Partition{2, 2});
}

TEST_CASE("counts match the recursive counter") {
  for (int m = 0; m <= 12; ++m)
    for (int parts = 1; parts <= 6; ++parts) {
      CAPTURE(m);
      CAPTURE(parts);
      CHECK(static_cast<long long>(partitions_of(m, parts).size()) ==
            oracles::count_partitions(m, parts));
    }
}

TEST_CASE("enumeration is strictly reverse-lexicographic") {
  for (int m : {5, 9, 12}) {
    auto parts = partitions_of(m, m);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      CHECK(parts[i + 1] < parts[i]);
      CHECK(parts[i].weight() == m);
    }
  }
}

TEST_CASE("generalized Pochhammer at pinned points") {
  CHECK(gen_pochhammer(5.0, Partition{}) == 1.0);
  CHECK(gen_pochhammer(3.0, Partition{2}) == doctest::Approx(12.0).epsilon(1e-14));
  CHECK(gen_pochhammer(3.0, Partition{1, 1}) == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("weight-one partition recovers the base") {
  for (double a : {-2.5, -0.5, 0.0, 0.3, 1.0, 7.25})
    CHECK(gen_pochhammer(a, Partition{1}) == a);
}

TEST_CASE("row multiplicativity with shifted bases") {
  for (double a : {0.7, 2.0, 4.5}) {
    for (const auto& kappa :
         {Partition{3, 2}, Partition{4, 2, 1}, Partition{2, 2, 2}}) {
      double rows = 1.0;
      for (int i = 0; i < kappa.size(); ++i)
        rows *= gen_pochhammer(a - 0.5 * i, Partition{kappa.part(i)});
      CHECK(gen_pochhammer(a, kappa) == doctest::Approx(rows).epsilon(1e-13));
    }
  }
}

TEST_CASE("signed log form agrees with the direct product") {
  for (double a : {-1.3, 0.4, 2.0})
    for (const auto& kappa : {Partition{3, 1}, Partition{2, 2, 1}}) {
      const double direct = gen_pochhammer(a, kappa);
      const auto sl = matgamma::gen_pochhammer_signed_log(a, kappa);
      CHECK(sl.sign * std::exp(sl.log_abs) ==
            doctest::Approx(direct).epsilon(1e-12));
    }
  const auto zero = matgamma::gen_pochhammer_signed_log(0.0, Partition{2});
  CHECK(zero.sign == 0);
}

TEST_CASE("conjugate partition") {
  CHECK(Partition{4, 2, 1}.conjugate() == Partition{3, 2, 1, 1});
  CHECK(Partition{}.conjugate() == Partition{});
}
