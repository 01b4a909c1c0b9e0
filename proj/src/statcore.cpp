#include "kwtarget/statcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "kwtarget/error.hpp"

namespace kwtarget {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(mix64(mix64(seed) ^ (stream_id * 0xd1b54a32d192ed03ULL))) {}

double RngStream::normal() { return normal_(engine_); }

double RngStream::chi_square(double dof) {
  std::gamma_distribution<double> gamma(dof / 2.0, 2.0);
  return gamma(engine_);
}

double RngStream::uniform() {
  return std::generate_canonical<double, 53>(engine_);
}

std::size_t RngStream::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

RngStream RngStream::derive(std::uint64_t salt) const {
  return RngStream(mix64(seed_ ^ mix64(stream_id_)), mix64(salt));
}

void symmetrize(Matrix& m) {
  Matrix t = m.transpose();
  m = 0.5 * (m + t);
}

Matrix cholesky(const Matrix& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) {
    throw Error(ErrorCode::kInvalidArgument, "cholesky: matrix is not square");
  }
  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  "cholesky: non-positive pivot at row " + std::to_string(j));
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / d;
    }
  }
  return l;
}

namespace {

Matrix lower_inverse(const Matrix& l) {
  const Eigen::Index n = l.rows();
  return l.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
}

}  // namespace

Matrix spd_inverse(const Matrix& m) {
  const Matrix linv = lower_inverse(cholesky(m));
  Matrix inv = linv.transpose() * linv;
  symmetrize(inv);
  return inv;
}

Vector sample_mvn_chol(const Vector& mean, const Matrix& chol_lower,
                       RngStream& rng) {
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return mean + chol_lower.triangularView<Eigen::Lower>() * z;
}

Vector sample_mvn(const MvnParams& p, RngStream& rng) {
  if (p.mean.size() != p.cov.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample_mvn: mean and covariance dimensions differ");
  }
  return sample_mvn_chol(p.mean, cholesky(p.cov), rng);
}

Matrix sample_inverse_wishart(const WishartSpec& spec, RngStream& rng) {
  const Eigen::Index p = spec.scale.rows();
  if (!(spec.dof > static_cast<double>(p) - 1.0)) {
    throw Error(ErrorCode::kInvalidDof,
                "inverse-Wishart: dof must exceed dimension - 1");
  }
  // Sigma^-1 ~ Wishart(dof, scale^-1) = L A A^T L^T with L = chol(scale^-1).
  const Matrix l = cholesky(spd_inverse(spec.scale));
  Matrix a = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    a(i, i) = std::sqrt(rng.chi_square(spec.dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = rng.normal();
  }
  const Matrix la = l * a;  // lower triangular
  const Matrix la_inv = lower_inverse(la);
  Matrix sigma = la_inv.transpose() * la_inv;
  symmetrize(sigma);
  return sigma;
}

MvnParams conditional_mvn(const MvnParams& p,
                          std::span<const int> observed_idx,
                          std::span<const double> observed_vals) {
  const int n = static_cast<int>(p.mean.size());
  if (observed_idx.size() != observed_vals.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "conditional_mvn: index and value counts differ");
  }
  if (observed_idx.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "conditional_mvn: observed index set is empty");
  }
  std::vector<bool> is_obs(static_cast<std::size_t>(n), false);
  for (int idx : observed_idx) {
    if (idx < 0 || idx >= n || is_obs[static_cast<std::size_t>(idx)]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "conditional_mvn: bad observed index");
    }
    is_obs[static_cast<std::size_t>(idx)] = true;
  }
  std::vector<int> b;
  for (int i = 0; i < n; ++i) {
    if (!is_obs[static_cast<std::size_t>(i)]) b.push_back(i);
  }
  if (b.empty()) {
    throw Error(ErrorCode::kEmptyComplement,
                "conditional_mvn: every coordinate is observed");
  }
  const auto na = static_cast<Eigen::Index>(observed_idx.size());
  const auto nb = static_cast<Eigen::Index>(b.size());
  Matrix s_aa(na, na), s_ba(nb, na), s_bb(nb, nb);
  Vector resid(na), theta_b(nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    resid(i) = observed_vals[static_cast<std::size_t>(i)] -
               p.mean(observed_idx[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < na; ++j) {
      s_aa(i, j) = p.cov(observed_idx[static_cast<std::size_t>(i)],
                         observed_idx[static_cast<std::size_t>(j)]);
    }
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    theta_b(i) = p.mean(b[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < na; ++j) {
      s_ba(i, j) = p.cov(b[static_cast<std::size_t>(i)],
                         observed_idx[static_cast<std::size_t>(j)]);
    }
    for (Eigen::Index j = 0; j < nb; ++j) {
      s_bb(i, j) = p.cov(b[static_cast<std::size_t>(i)],
                         b[static_cast<std::size_t>(j)]);
    }
  }
  const Matrix s_aa_inv = spd_inverse(s_aa);
  const Matrix gain = s_ba * s_aa_inv;
  MvnParams out;
  out.mean = theta_b + gain * resid;
  out.cov = s_bb - gain * s_ba.transpose();
  symmetrize(out.cov);
  return out;
}

double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

namespace {

// Acklam's rational approximation; relative error about 1e-9.
double quantile_initial_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00, 2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kOutOfRange,
                "normal_quantile: alpha must lie in (0, 1)");
  }
  if (alpha == 0.5) return 0.0;
  double z = quantile_initial_guess(alpha);
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  for (int iter = 0; iter < 50; ++iter) {
    const double err = normal_cdf(z) - alpha;
    if (std::abs(err) <= 1e-12) break;
    const double density = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    if (density <= 0.0) break;
    z -= err / density;
  }
  return z;
}

}  // namespace kwtarget
