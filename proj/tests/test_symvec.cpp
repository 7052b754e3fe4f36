#include <doctest.h>

#include <random>
#include <set>

#include "critfield/errors.hpp"
#include "critfield/symvec.hpp"

using namespace critfield;

TEST_CASE("tau index values") {
  CHECK(tau_index(1, 1) == 1);
  CHECK(tau_index(2, 3) == 5);
  CHECK(tau_index(3, 3) == 6);
  CHECK_THROWS_AS(tau_index(0, 2), DomainError);
  CHECK_THROWS_AS(tau_index(1, 6, 5), DomainError);
}

TEST_CASE("tau index is a symmetric bijection onto 1..15 for N=5") {
  std::set<int> seen;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) {
      CHECK(tau_index(i, j, 5) == tau_index(j, i, 5));
      if (i <= j) seen.insert(tau_index(i, j, 5));
      // column-major packing of the upper triangle, counted by hand
      int lo = std::min(i, j), hi = std::max(i, j), count = 0;
      for (int jj = 1; jj <= hi; ++jj)
        for (int ii = 1; ii <= jj; ++ii)
          if (jj < hi || ii <= lo) ++count;
      CHECK(tau_index(i, j) == count);
    }
  CHECK(seen.size() == 15);
  CHECK(*seen.begin() == 1);
  CHECK(*seen.rbegin() == 15);
}

TEST_CASE("matriculation") {
  Eigen::VectorXd a(3);
  a << 1.5, -2.0, 3.0;
  Eigen::MatrixXd M = matriculate(a, 2);
  CHECK(M(0, 0) == 1.5);
  CHECK(M(0, 1) == -2.0);
  CHECK(M(1, 0) == -2.0);
  CHECK(M(1, 1) == 3.0);
  CHECK(matriculate(Eigen::VectorXd::Zero(6), 3).isZero());
  CHECK_THROWS_AS(matriculate(Eigen::VectorXd::Zero(5), 3), DomainError);

  Eigen::VectorXd longer(8);
  longer << 1, 2, 3, 4, 5, 6, 99, 98;
  CHECK(matriculate(longer, 3) == matriculate(longer.head(6), 3));
}

TEST_CASE("round trips") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd a(12);
    for (auto& v : a) v = nd(gen);
    Eigen::VectorXd back = vectorize_sym(matriculate(a, 4));
    CHECK(back == a.head(10));

    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(5, 5, [&] { return nd(gen); });
    M = (M + M.transpose()).eval();
    CHECK(matriculate(vectorize_sym(M), 5) == M);
  }
}
