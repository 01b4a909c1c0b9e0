#pragma once

// Conjugate Gibbs sampler for the per-ad-group MVN model of log impressions and
// logit click-through rates, with imputation of the match types a keyword was
// not run under.
//
// Covariance convention: the inverse-Wishart "scale" S is the matrix in the
// density exp(-tr(S Sigma^-1)/2) / |Sigma|^((nu+p+1)/2). The full conditional
// of Sigma is then IW(nu0 + n, S0 + S_theta) with mean
// (S0 + S_theta) / (nu0 + n - p - 1). Writing the same law as
// "inverseWishart(nu, S^-1)" names the inverse scale instead; both describe one
// distribution and this code always stores S itself.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kwtarget/records.hpp"
#include "kwtarget/statcore.hpp"

namespace kwtarget {

enum class IndexFamily { kImpressions, kCtr };

std::string_view family_name(IndexFamily f);

inline constexpr double kDefaultEpsilon = 1e-6;

// ln(max(d, epsilon)); throws NegativeInput for d < 0.
double log_transform(double impressions, double epsilon = kDefaultEpsilon);
// logit(clamp(c, epsilon, 1 - epsilon)); throws OutOfRange outside [0, 1].
double logit_transform(double ctr, double epsilon = kDefaultEpsilon);
double transform(double value, IndexFamily family, double epsilon = kDefaultEpsilon);
// exp for impressions, sigmoid for CTR.
double inverse_transform(double x, IndexFamily family);

// Rows of transformed indices with a 3-bit observation mask per row (bit i set
// when match type i is observed). Unobserved cells hold unspecified values.
struct TransformedMatrix {
  Matrix values;
  std::vector<std::uint8_t> mask;
  IndexFamily kind = IndexFamily::kImpressions;

  Eigen::Index rows() const { return values.rows(); }
  bool observed(Eigen::Index row, int col) const {
    return (mask[static_cast<std::size_t>(row)] >> col) & 1U;
  }
};

inline constexpr std::uint8_t kFullMask = 0b111;

struct PriorSpec {
  MvnParams mean_prior;     // mu0, Lambda0
  WishartSpec cov_prior;    // nu0, S0
};

struct GibbsConfig {
  int iterations = 50000;
  int burn_in = 10000;
  int thinning = 10;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double epsilon = kDefaultEpsilon;
  // Keep the completed data matrix of every retained sweep. Memory grows with
  // rows x retained draws; the CLI turns this off.
  bool store_imputed = true;

  void validate() const;
  std::size_t retained() const;
};

struct PosteriorDraws {
  std::vector<Vector> theta_draws;
  std::vector<Matrix> sigma_draws;
  std::vector<Matrix> imputed_draws;

  std::size_t size() const { return theta_draws.size(); }
  Vector theta_mean() const;
  Matrix sigma_mean() const;
};

// Observed history of one ad-group: one row per (keyword, day) in both
// families, plus per-keyword value and cost per click.
struct AdGroupData {
  std::string adgroup_id;
  std::vector<std::string> keyword_ids;
  std::vector<double> vpc;
  std::vector<double> cpc;
  // keyword index of every row, rows grouped by keyword and ordered by day
  std::vector<std::size_t> row_keyword;
  std::vector<Date> row_day;
  TransformedMatrix impressions;
  TransformedMatrix ctr;

  const TransformedMatrix& family(IndexFamily f) const {
    return f == IndexFamily::kImpressions ? impressions : ctr;
  }
};

struct AdGroupPosterior {
  AdGroupData data;
  PosteriorDraws impressions;
  PosteriorDraws ctr;

  const PosteriorDraws& family(IndexFamily f) const {
    return f == IndexFamily::kImpressions ? impressions : ctr;
  }
};

// Full conditional of the mean: MVN(mu_n, Lambda_n) with
// Lambda_n = (Lambda0^-1 + n Sigma^-1)^-1 and
// mu_n = Lambda_n (Lambda0^-1 mu0 + n Sigma^-1 dbar).
MvnParams theta_conditional(const Matrix& data, const Matrix& sigma,
                            const PriorSpec& prior);
Vector sample_theta(const Matrix& data, const Matrix& sigma,
                    const PriorSpec& prior, RngStream& rng);

// Full conditional of the covariance: IW(nu0 + n, S0 + S_theta).
WishartSpec sigma_conditional(const Matrix& data, const Vector& theta,
                              const PriorSpec& prior);
Matrix sample_sigma(const Matrix& data, const Vector& theta,
                    const PriorSpec& prior, RngStream& rng);

// Redraws the unobserved entries of `row` from their conditional given the
// observed ones; observed entries are returned untouched.
Vector impute_row(const Vector& row, std::uint8_t mask, const Vector& theta,
                  const Matrix& sigma, RngStream& rng);

// Empirical-Bayes defaults: mu0 = observed column means, Lambda0 =
// 100 diag(var floored at 1), nu0 = p + 2, S0 = diag(var) (nu0 - p - 1).
PriorSpec default_prior(const TransformedMatrix& data);

// Three-step sweep theta -> Sigma -> unobserved cells. Throws DivergentChain
// if a sweep produces non-finite values.
PosteriorDraws run_gibbs(const TransformedMatrix& data, const PriorSpec& prior,
                         const GibbsConfig& cfg);

// Groups records of a single ad-group into (keyword, day) rows and transforms
// them. Throws EmptyAdGroup when there are no records.
AdGroupData build_adgroup_data(const std::vector<PerformanceRecord>& records,
                               double epsilon = kDefaultEpsilon);

struct FamilyPriors {
  std::optional<PriorSpec> impressions;
  std::optional<PriorSpec> ctr;
};

// Runs one chain per family. The CTR chain uses a stream derived from
// cfg.stream so the two families are independent.
AdGroupPosterior estimate_adgroup(const std::vector<PerformanceRecord>& records,
                                  const FamilyPriors& priors,
                                  const GibbsConfig& cfg);

// Splits records by ad-group (sorted by id) and estimates each group with a
// stream derived from (cfg.seed, ad-group id). Results do not depend on
// `threads`.
std::vector<AdGroupPosterior> estimate_campaign(
    const std::vector<PerformanceRecord>& records, const GibbsConfig& cfg,
    unsigned threads = 1);

std::uint64_t stable_hash(std::string_view s) noexcept;

}  // namespace kwtarget
