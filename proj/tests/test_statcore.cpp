#include <doctest.h>

#include <cmath>
#include <vector>

#include "kwtarget/error.hpp"
#include "kwtarget/statcore.hpp"

using namespace kwtarget;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("cholesky of identity is identity") {
  const Matrix i3 = Matrix::Identity(3, 3);
  CHECK((cholesky(i3) - i3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cholesky of a 2x2 hand example") {
  const Matrix l = cholesky(mat({{4, 2}, {2, 3}}));
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("cholesky rejects an indefinite matrix") {
  CHECK(code_of([] { cholesky(mat({{1, 2}, {2, 1}})); }) == ErrorCode::kNotPositiveDefinite);
}

TEST_CASE("cholesky roundtrip on random SPD matrices") {
  RngStream rng(11, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(rng.index(5));
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
    const Matrix a = b.transpose() * b + 1e-3 * Matrix::Identity(n, n);
    const Matrix l = cholesky(a);
    CHECK((l * l.transpose() - a).cwiseAbs().maxCoeff() <= 1e-10 * a.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("spd_inverse") {
  const Matrix a = mat({{4, 2}, {2, 3}});
  CHECK((spd_inverse(a) * a - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("standard normal sample mean") {
  RngStream rng(1, 0);
  const MvnParams p{Vector::Zero(3), Matrix::Identity(3, 3)};
  Vector sum = Vector::Zero(3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_mvn(p, rng);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(sum(k) / n) < 0.02);
}

TEST_CASE("near-degenerate covariance collapses on the mean") {
  RngStream rng(2, 0);
  const MvnParams p{vec({1, -2, 3}), 1e-18 * Matrix::Identity(3, 3)};
  for (int i = 0; i < 1000; ++i) {
    CHECK((sample_mvn(p, rng) - p.mean).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sample variances match a diagonal covariance") {
  RngStream rng(3, 0);
  const MvnParams p{vec({1, 2, 3}), vec({1, 4, 9}).asDiagonal()};
  const int n = 100000;
  Vector s = Vector::Zero(3), s2 = Vector::Zero(3);
  for (int i = 0; i < n; ++i) {
    const Vector x = sample_mvn(p, rng);
    s += x;
    s2 += x.cwiseProduct(x);
  }
  for (int k = 0; k < 3; ++k) {
    const double mean = s(k) / n;
    const double var = s2(k) / n - mean * mean;
    const double sd = std::sqrt(p.cov(k, k));
    CHECK(std::abs(mean - p.mean(k)) < 4.0 * sd / std::sqrt(n));
    CHECK(std::abs(var / p.cov(k, k) - 1.0) < 0.05);
  }
}

TEST_CASE("correlated draws reproduce the covariance") {
  RngStream rng(4, 0);
  const Matrix cov = mat({{1.0, 0.6, 0.2}, {0.6, 2.0, -0.4}, {0.2, -0.4, 0.5}});
  const Matrix l = cholesky(cov);
  const Vector mu = vec({0.5, -1, 2});
  const int n = 100000;
  Matrix acc = Matrix::Zero(3, 3);
  Vector s = Vector::Zero(3);
  for (int i = 0; i < n; ++i) {
    const Vector x = sample_mvn_chol(mu, l, rng);
    s += x;
    acc += (x - mu) * (x - mu).transpose();
  }
  CHECK(((s / n) - mu).cwiseAbs().maxCoeff() < 0.02);
  CHECK((acc / n - cov).cwiseAbs().maxCoeff() < 0.04);
}

TEST_CASE("inverse-Wishart mean") {
  RngStream rng(5, 0);
  const WishartSpec spec{10.0, Matrix::Identity(3, 3)};
  Matrix acc = Matrix::Zero(3, 3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_inverse_wishart(spec, rng);
  const Matrix expected = Matrix::Identity(3, 3) / 6.0;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(acc(i, i) / n / expected(i, i) - 1.0) < 0.02);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(std::abs(acc(i, j) / n) < 0.02 * expected(0, 0));
}

TEST_CASE("inverse-Wishart mean with a non-identity scale") {
  RngStream rng(6, 0);
  const Matrix s = mat({{2.0, 0.5, 0.0}, {0.5, 1.0, 0.3}, {0.0, 0.3, 3.0}});
  const WishartSpec spec{12.0, s};
  Matrix acc = Matrix::Zero(3, 3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_inverse_wishart(spec, rng);
  const Matrix expected = s / (12.0 - 3.0 - 1.0);
  CHECK((acc / n - expected).cwiseAbs().maxCoeff() < 0.02 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("inverse-Wishart rejects dof below dimension") {
  RngStream rng(7, 0);
  CHECK(code_of([&] { sample_inverse_wishart({2.0, Matrix::Identity(3, 3)}, rng); }) ==
        ErrorCode::kInvalidDof);
}

TEST_CASE("inverse-Wishart draws are SPD") {
  RngStream rng(8, 0);
  for (int i = 0; i < 2000; ++i) {
    const Matrix m = sample_inverse_wishart({4.0, 0.1 * Matrix::Identity(3, 3)}, rng);
    CHECK_NOTHROW(cholesky(m));
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("conditional MVN, 2-dim hand computation") {
  const MvnParams p{Vector::Zero(2), mat({{1, 0.5}, {0.5, 1}})};
  const int idx[] = {0};
  const double vals[] = {1.0};
  const auto c = conditional_mvn(p, idx, vals);
  REQUIRE(c.mean.size() == 1);
  CHECK(std::abs(c.mean(0) - 0.5) < 1e-10);
  CHECK(std::abs(c.cov(0, 0) - 0.75) < 1e-10);
}

TEST_CASE("conditional MVN, 3-dim hand computation") {
  // Sigma = [[4,2,1],[2,3,0.5],[1,0.5,2]], mu = (1,2,3), observe x3 = 5.
  // mean_b = (1,2) + (1,0.5)/2 * 2 = (2, 2.5)
  // cov_b = [[4,2],[2,3]] - [1,0.5][1,0.5]^T / 2 = [[3.5,1.75],[1.75,2.875]]
  const MvnParams p{vec({1, 2, 3}), mat({{4, 2, 1}, {2, 3, 0.5}, {1, 0.5, 2}})};
  const int idx[] = {2};
  const double vals[] = {5.0};
  const auto c = conditional_mvn(p, idx, vals);
  CHECK(std::abs(c.mean(0) - 2.0) < 1e-10);
  CHECK(std::abs(c.mean(1) - 2.5) < 1e-10);
  CHECK(std::abs(c.cov(0, 0) - 3.5) < 1e-10);
  CHECK(std::abs(c.cov(0, 1) - 1.75) < 1e-10);
  CHECK(std::abs(c.cov(1, 1) - 2.875) < 1e-10);

  // Observe x1 = 0, x3 = 5: the complement is x2 alone.
  // Saa = [[4,1],[1,2]], inverse = [[2,-1],[-1,4]]/7, Sba = [2,0.5]
  // Sba Saa^-1 = [2*2-0.5, -2+0.5*4]/7 = [3.5, 0]/7 = [0.5, 0]
  // mean = 2 + 0.5*(0-1) + 0*(5-3) = 1.5, var = 3 - (0.5*2 + 0*0.5) = 2
  const int idx2[] = {0, 2};
  const double vals2[] = {0.0, 5.0};
  const auto c2 = conditional_mvn(p, idx2, vals2);
  REQUIRE(c2.mean.size() == 1);
  CHECK(std::abs(c2.mean(0) - 1.5) < 1e-10);
  CHECK(std::abs(c2.cov(0, 0) - 2.0) < 1e-10);
}

TEST_CASE("conditioning on an independent block returns the marginal") {
  const MvnParams p{vec({1, 2, 3}), mat({{2, 0, 0}, {0, 3, 0.4}, {0, 0.4, 1}})};
  const int idx[] = {0};
  const double vals[] = {100.0};
  const auto c = conditional_mvn(p, idx, vals);
  CHECK(c.mean(0) == 2.0);
  CHECK(c.mean(1) == 3.0);
  CHECK(c.cov(0, 0) == 3.0);
  CHECK(c.cov(0, 1) == 0.4);
  CHECK(c.cov(1, 1) == 1.0);
}

TEST_CASE("conditional covariance ignores observed values and shrinks") {
  const MvnParams p{vec({0, 0, 0}), mat({{1, 0.9, 0.3}, {0.9, 1, 0.2}, {0.3, 0.2, 1}})};
  const int idx[] = {0};
  const double v1[] = {-3.0};
  const double v2[] = {7.0};
  const auto a = conditional_mvn(p, idx, v1);
  const auto b = conditional_mvn(p, idx, v2);
  CHECK((a.cov - b.cov).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.cov(0, 0) <= p.cov(1, 1));
  CHECK(a.cov(1, 1) <= p.cov(2, 2));
}

TEST_CASE("conditioning on everything has no complement") {
  const MvnParams p{Vector::Zero(3), Matrix::Identity(3, 3)};
  const int idx[] = {0, 1, 2};
  const double vals[] = {0, 0, 0};
  CHECK(code_of([&] { conditional_mvn(p, idx, vals); }) == ErrorCode::kEmptyComplement);
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(normal_quantile(0.95) - 1.64485) < 1e-4);
  CHECK(std::abs(normal_quantile(0.975) - 1.95996) < 1e-4);
  for (int k = 1; k <= 99; ++k) {
    const double a = k / 100.0;
    CHECK(std::abs(normal_cdf(normal_quantile(a)) - a) < 1e-9);
  }
  CHECK_THROWS_AS(normal_quantile(0.0), Error);
  CHECK_THROWS_AS(normal_quantile(1.0), Error);
}

TEST_CASE("identical streams give identical draws") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    differs = differs || x != c.normal();
  }
  CHECK(differs);
  RngStream d = a.derive(3), e = b.derive(3);
  CHECK(d.uniform() == e.uniform());
}
