#pragma once

// Linear-algebra and distribution primitives shared by the estimator and the
// optimizer. Everything is dimension-generic; the model itself only ever uses
// dimension 3 (one coordinate per match type).

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kwtarget {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kMatchTypes = 3;

struct MvnParams {
  Vector mean;
  Matrix cov;
};

// Inverse-Wishart parameters. `scale` is the matrix S appearing in the density
// as exp(-tr(S * Sigma^-1) / 2), so that E[Sigma] = S / (dof - p - 1).
struct WishartSpec {
  double dof = 0.0;
  Matrix scale;
};

// Deterministic random stream keyed by (seed, stream id). Two streams with the
// same key produce bitwise-identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double normal();
  double chi_square(double dof);
  // Uniform on [0, 1).
  double uniform();
  // Uniform integer on [0, n).
  std::size_t index(std::size_t n);

  // A child stream whose key is derived from this stream's key and `salt`.
  RngStream derive(std::uint64_t salt) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// SplitMix64 finalizer; used to derive independent stream keys.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Averages m with its transpose in place.
void symmetrize(Matrix& m);

// Lower-triangular L with L * L^T = m. Throws NotPositiveDefinite when a pivot
// is not strictly positive.
Matrix cholesky(const Matrix& m);

// Inverse of a symmetric positive-definite matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& m);

Vector sample_mvn(const MvnParams& p, RngStream& rng);

// Draw with a precomputed Cholesky factor of the covariance.
Vector sample_mvn_chol(const Vector& mean, const Matrix& chol_lower,
                       RngStream& rng);

// Bartlett decomposition of the Wishart with the inverse scale, then inversion.
Matrix sample_inverse_wishart(const WishartSpec& spec, RngStream& rng);

// Distribution of the coordinates not in `observed_idx` given the observed
// ones, via the partitioned-matrix (Schur complement) formulas. Indices are
// 0-based; the complement is returned in ascending index order.
MvnParams conditional_mvn(const MvnParams& p,
                          std::span<const int> observed_idx,
                          std::span<const double> observed_vals);

double normal_cdf(double z);

// z with normal_cdf(z) == alpha, to 1e-12 in probability.
double normal_quantile(double alpha);

}  // namespace kwtarget
