#include <cmath>
#include <vector>

#include "attnlab/rng.hpp"
#include "doctest.h"

using attnlab::RngStream;

namespace {

double chi2_stat(const std::vector<int>& counts, double expected) {
  double s = 0.0;
  for (int c : counts) {
    double d = c - expected;
    s += d * d / expected;
  }
  return s;
}

}  // namespace

TEST_CASE("same seed and stream id reproduce the sequence") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("different stream ids give different sequences") {
  RngStream a(42, 0), b(42, 1), c(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    uint64_t x = a.next_u64();
    if (x == b.next_u64()) ++same_ab;
    if (x == c.next_u64()) ++same_ac;
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform stays in [0,1) and uniform_open in (0,1)") {
  RngStream r(1, 0);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    double v = r.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("uniform_int respects bounds and is roughly uniform") {
  RngStream r(7, 3);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    int k = r.uniform_int(10);
    REQUIRE(k >= 0);
    REQUIRE(k < 10);
    ++counts[static_cast<size_t>(k)];
  }
  // chi-square, 9 degrees of freedom, p = 0.01
  CHECK(chi2_stat(counts, n / 10.0) < 21.666);
}

TEST_CASE("normal deviates have the right moments") {
  RngStream r(11, 2);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  int tail = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s += x;
    s2 += x * x;
    if (std::fabs(x) > 1.96) ++tail;
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(var - 1.0) < 0.02);
  CHECK(std::fabs(tail / static_cast<double>(n) - 0.05) < 0.005);
}

TEST_CASE("split depends on identity, not on draw position") {
  RngStream parent1(99, 5);
  for (int i = 0; i < 37; ++i) parent1.next_u64();
  RngStream parent2(99, 5);

  RngStream c1 = parent1.split(12);
  RngStream c2 = parent2.split(12);
  for (int i = 0; i < 50; ++i) CHECK(c1.next_u64() == c2.next_u64());
}

TEST_CASE("split children differ from each other and the parent") {
  RngStream parent(5, 0);
  RngStream a = parent.split(0);
  RngStream b = parent.split(1);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}
