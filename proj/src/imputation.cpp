#include "kwtarget/imputation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "kwtarget/error.hpp"

namespace kwtarget {

std::string_view family_name(IndexFamily f) {
  return f == IndexFamily::kImpressions ? "impressions" : "ctr";
}

double log_transform(double impressions, double epsilon) {
  if (impressions < 0.0) {
    throw Error(ErrorCode::kNegativeInput, "log_transform: negative impressions");
  }
  return std::log(std::max(impressions, epsilon));
}

double logit_transform(double ctr, double epsilon) {
  if (!(ctr >= 0.0 && ctr <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "logit_transform: ctr outside [0, 1]");
  }
  const double c = std::clamp(ctr, epsilon, 1.0 - epsilon);
  return std::log(c / (1.0 - c));
}

double transform(double value, IndexFamily family, double epsilon) {
  return family == IndexFamily::kImpressions ? log_transform(value, epsilon)
                                             : logit_transform(value, epsilon);
}

double inverse_transform(double x, IndexFamily family) {
  if (family == IndexFamily::kImpressions) return std::exp(x);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void GibbsConfig::validate() const {
  if (iterations <= 0 || burn_in < 0 || burn_in >= iterations) {
    throw Error(ErrorCode::kInvalidArgument,
                "gibbs: require 0 <= burn_in < iterations");
  }
  if (thinning < 1) throw Error(ErrorCode::kInvalidArgument, "gibbs: thinning must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1e-3)) {
    throw Error(ErrorCode::kInvalidArgument, "gibbs: epsilon must lie in (0, 1e-3]");
  }
}

std::size_t GibbsConfig::retained() const {
  return static_cast<std::size_t>((iterations - burn_in) / thinning);
}

Vector PosteriorDraws::theta_mean() const {
  if (theta_draws.empty()) return {};
  Vector m = Vector::Zero(theta_draws.front().size());
  for (const auto& t : theta_draws) m += t;
  return m / static_cast<double>(theta_draws.size());
}

Matrix PosteriorDraws::sigma_mean() const {
  if (sigma_draws.empty()) return {};
  Matrix m = Matrix::Zero(sigma_draws.front().rows(), sigma_draws.front().cols());
  for (const auto& s : sigma_draws) m += s;
  return m / static_cast<double>(sigma_draws.size());
}

namespace {

struct ThetaPrecision {
  Matrix prior_precision;          // Lambda0^-1
  Vector prior_precision_mean;     // Lambda0^-1 mu0
};

ThetaPrecision theta_precision(const PriorSpec& prior) {
  ThetaPrecision tp;
  tp.prior_precision = spd_inverse(prior.mean_prior.cov);
  tp.prior_precision_mean = tp.prior_precision * prior.mean_prior.mean;
  return tp;
}

MvnParams theta_conditional_impl(const Matrix& data, const Matrix& sigma,
                                 const PriorSpec& prior, const ThetaPrecision& tp) {
  const auto n = static_cast<double>(data.rows());
  if (data.rows() == 0) return prior.mean_prior;
  const Vector dbar = data.colwise().mean().transpose();
  const Matrix sigma_inv = spd_inverse(sigma);
  Matrix a_n = tp.prior_precision + n * sigma_inv;
  symmetrize(a_n);
  const Vector b_n = tp.prior_precision_mean + n * sigma_inv * dbar;
  MvnParams out;
  out.cov = spd_inverse(a_n);
  out.mean = out.cov * b_n;
  return out;
}

Matrix scatter_about(const Matrix& data, const Vector& theta) {
  const Matrix centered = data.rowwise() - theta.transpose();
  Matrix s = centered.transpose() * centered;
  symmetrize(s);
  return s;
}

// Regression of the unobserved block on the observed block for one mask
// pattern, refreshed whenever Sigma changes.
struct PatternSampler {
  std::vector<int> obs;
  std::vector<int> mis;
  Matrix gain;        // Sigma_ba Sigma_aa^-1
  Matrix cond_chol;   // chol(Sigma_bb - gain Sigma_ab)

  PatternSampler(std::uint8_t mask, const Matrix& sigma) {
    const int p = static_cast<int>(sigma.rows());
    for (int i = 0; i < p; ++i) ((mask >> i) & 1U ? obs : mis).push_back(i);
    const auto na = static_cast<Eigen::Index>(obs.size());
    const auto nb = static_cast<Eigen::Index>(mis.size());
    Matrix s_bb(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j) s_bb(i, j) = sigma(mis[i], mis[j]);
    if (na == 0) {
      gain = Matrix::Zero(nb, 0);
      cond_chol = cholesky(s_bb);
      return;
    }
    Matrix s_aa(na, na), s_ba(nb, na);
    for (Eigen::Index i = 0; i < na; ++i)
      for (Eigen::Index j = 0; j < na; ++j) s_aa(i, j) = sigma(obs[i], obs[j]);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < na; ++j) s_ba(i, j) = sigma(mis[i], obs[j]);
    gain = s_ba * spd_inverse(s_aa);
    Matrix cond = s_bb - gain * s_ba.transpose();
    symmetrize(cond);
    cond_chol = cholesky(cond);
  }

  template <typename Row>
  void draw(Row&& row, const Vector& theta, RngStream& rng) const {
    const auto na = static_cast<Eigen::Index>(obs.size());
    const auto nb = static_cast<Eigen::Index>(mis.size());
    Vector resid(na);
    for (Eigen::Index i = 0; i < na; ++i) resid(i) = row(obs[i]) - theta(obs[i]);
    Vector mean(nb);
    for (Eigen::Index i = 0; i < nb; ++i) mean(i) = theta(mis[i]);
    if (na > 0) mean += gain * resid;
    const Vector draw = sample_mvn_chol(mean, cond_chol, rng);
    for (Eigen::Index i = 0; i < nb; ++i) row(mis[i]) = draw(i);
  }
};

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

MvnParams theta_conditional(const Matrix& data, const Matrix& sigma,
                            const PriorSpec& prior) {
  return theta_conditional_impl(data, sigma, prior, theta_precision(prior));
}

Vector sample_theta(const Matrix& data, const Matrix& sigma,
                    const PriorSpec& prior, RngStream& rng) {
  return sample_mvn(theta_conditional(data, sigma, prior), rng);
}

WishartSpec sigma_conditional(const Matrix& data, const Vector& theta,
                              const PriorSpec& prior) {
  WishartSpec post;
  post.dof = prior.cov_prior.dof + static_cast<double>(data.rows());
  post.scale = prior.cov_prior.scale;
  if (data.rows() > 0) post.scale += scatter_about(data, theta);
  return post;
}

Matrix sample_sigma(const Matrix& data, const Vector& theta,
                    const PriorSpec& prior, RngStream& rng) {
  return sample_inverse_wishart(sigma_conditional(data, theta, prior), rng);
}

Vector impute_row(const Vector& row, std::uint8_t mask, const Vector& theta,
                  const Matrix& sigma, RngStream& rng) {
  const int p = static_cast<int>(row.size());
  const std::uint8_t full = static_cast<std::uint8_t>((1U << p) - 1U);
  mask &= full;
  if (mask == full) return row;
  if (mask == 0) {
    throw Error(ErrorCode::kInvalidArgument, "impute_row: row has no observed entry");
  }
  Vector out = row;
  PatternSampler(mask, sigma).draw(out, theta, rng);
  return out;
}

PriorSpec default_prior(const TransformedMatrix& data) {
  const int p = static_cast<int>(data.values.cols());
  Vector mean(p), var(p);
  // pooled moments back-fill columns that are never observed
  double pooled_sum = 0.0, pooled_sq = 0.0;
  std::size_t pooled_n = 0;
  std::vector<std::size_t> counts(static_cast<std::size_t>(p), 0);
  for (int c = 0; c < p; ++c) {
    double s = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      if (!data.observed(r, c)) continue;
      const double v = data.values(r, c);
      s += v;
      sq += v * v;
      ++n;
    }
    pooled_sum += s;
    pooled_sq += sq;
    pooled_n += n;
    counts[static_cast<std::size_t>(c)] = n;
    mean(c) = n > 0 ? s / static_cast<double>(n) : 0.0;
    var(c) = n > 1 ? (sq - s * s / static_cast<double>(n)) / static_cast<double>(n - 1) : -1.0;
  }
  const double pooled_mean = pooled_n > 0 ? pooled_sum / static_cast<double>(pooled_n) : 0.0;
  const double pooled_var =
      pooled_n > 1 ? (pooled_sq - pooled_sum * pooled_sum / static_cast<double>(pooled_n)) /
                         static_cast<double>(pooled_n - 1)
                   : 1.0;
  for (int c = 0; c < p; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) mean(c) = pooled_mean;
    if (var(c) < 0.0) var(c) = pooled_var > 0.0 ? pooled_var : 1.0;
    var(c) = std::max(var(c), 1e-6);
  }
  PriorSpec prior;
  prior.mean_prior.mean = mean;
  prior.mean_prior.cov = 100.0 * var.cwiseMax(1.0).asDiagonal().toDenseMatrix();
  prior.cov_prior.dof = static_cast<double>(p) + 2.0;
  prior.cov_prior.scale =
      var.asDiagonal().toDenseMatrix() * (prior.cov_prior.dof - static_cast<double>(p) - 1.0);
  return prior;
}

PosteriorDraws run_gibbs(const TransformedMatrix& data, const PriorSpec& prior,
                         const GibbsConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = data.rows();
  const int p = static_cast<int>(data.values.cols());
  if (static_cast<Eigen::Index>(data.mask.size()) != n) {
    throw Error(ErrorCode::kInvalidArgument, "run_gibbs: mask size differs from row count");
  }
  const std::uint8_t full = static_cast<std::uint8_t>((1U << p) - 1U);
  for (std::uint8_t m : data.mask) {
    if ((m & full) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "run_gibbs: row with no observed cell");
    }
  }

  // Starting values: unobserved cells at observed column means,
  // Sigma at the prior mean.
  const PriorSpec start = default_prior(data);
  Matrix completed = data.values;
  for (Eigen::Index r = 0; r < n; ++r)
    for (int c = 0; c < p; ++c)
      if (!data.observed(r, c)) completed(r, c) = start.mean_prior.mean(c);
  const double shrink = prior.cov_prior.dof - static_cast<double>(p) - 1.0;
  Matrix sigma = shrink > 0.0 ? Matrix(prior.cov_prior.scale / shrink) : prior.cov_prior.scale;

  const ThetaPrecision tp = theta_precision(prior);
  RngStream rng(cfg.seed, cfg.stream);
  std::vector<bool> pattern_used(static_cast<std::size_t>(full) + 1, false);
  for (std::uint8_t m : data.mask) pattern_used[m & full] = (m & full) != full;

  PosteriorDraws out;
  const std::size_t keep = cfg.retained();
  out.theta_draws.reserve(keep);
  out.sigma_draws.reserve(keep);
  if (cfg.store_imputed) out.imputed_draws.reserve(keep);

  for (int sweep = 1; sweep <= cfg.iterations; ++sweep) {
    const Vector theta = sample_mvn(theta_conditional_impl(completed, sigma, prior, tp), rng);
    if (!theta.allFinite()) {
      throw Error(ErrorCode::kDivergentChain, "gibbs: non-finite mean at sweep " + std::to_string(sweep));
    }
    sigma = sample_sigma(completed, theta, prior, rng);
    if (!all_finite(sigma)) {
      throw Error(ErrorCode::kDivergentChain, "gibbs: non-finite covariance at sweep " + std::to_string(sweep));
    }
    std::vector<std::optional<PatternSampler>> samplers(pattern_used.size());
    for (std::size_t m = 0; m < pattern_used.size(); ++m) {
      if (pattern_used[m]) samplers[m].emplace(static_cast<std::uint8_t>(m), sigma);
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const std::uint8_t m = data.mask[static_cast<std::size_t>(r)] & full;
      if (m == full) continue;
      samplers[m]->draw(completed.row(r), theta, rng);
    }
    if (!all_finite(completed)) {
      throw Error(ErrorCode::kDivergentChain, "gibbs: non-finite imputation at sweep " + std::to_string(sweep));
    }
    if (sweep > cfg.burn_in && (sweep - cfg.burn_in) % cfg.thinning == 0) {
      out.theta_draws.push_back(theta);
      out.sigma_draws.push_back(sigma);
      if (cfg.store_imputed) out.imputed_draws.push_back(completed);
    }
  }
  return out;
}

AdGroupData build_adgroup_data(const std::vector<PerformanceRecord>& records,
                               double epsilon) {
  if (records.empty()) throw Error(ErrorCode::kEmptyAdGroup, "ad-group has no records");
  AdGroupData g;
  g.adgroup_id = records.front().adgroup_id;

  struct Cell {
    bool seen = false;
    double d = 0.0, c = 0.0;
  };
  // keyword -> day -> cells
  std::map<std::string, std::map<Date, std::array<Cell, 3>>> rows;
  std::map<std::string, std::pair<double, double>> value_sums;  // vpc, cpc
  std::map<std::string, std::size_t> value_counts;
  for (const auto& r : records) {
    if (r.adgroup_id != g.adgroup_id) {
      throw Error(ErrorCode::kInvalidArgument, "build_adgroup_data: mixed ad-groups");
    }
    validate_record(r);
    auto& cell = rows[r.keyword_id][r.day][static_cast<std::size_t>(match_index(r.match))];
    if (cell.seen) {
      throw Error(ErrorCode::kValidationError,
                  "duplicate record for " + r.keyword_id + " on " + r.day.slashed());
    }
    cell = Cell{true, transform(r.impressions, IndexFamily::kImpressions, epsilon),
                transform(r.ctr, IndexFamily::kCtr, epsilon)};
    auto& vs = value_sums[r.keyword_id];
    vs.first += r.vpc;
    vs.second += r.cpc;
    ++value_counts[r.keyword_id];
  }

  std::size_t n_rows = 0;
  for (const auto& [kw, days] : rows) n_rows += days.size();
  g.impressions.kind = IndexFamily::kImpressions;
  g.ctr.kind = IndexFamily::kCtr;
  g.impressions.values = Matrix::Zero(static_cast<Eigen::Index>(n_rows), kMatchTypes);
  g.ctr.values = Matrix::Zero(static_cast<Eigen::Index>(n_rows), kMatchTypes);
  g.impressions.mask.reserve(n_rows);
  g.ctr.mask.reserve(n_rows);

  Eigen::Index row = 0;
  for (const auto& [kw, days] : rows) {
    const std::size_t k = g.keyword_ids.size();
    g.keyword_ids.push_back(kw);
    const auto cnt = static_cast<double>(value_counts[kw]);
    g.vpc.push_back(value_sums[kw].first / cnt);
    g.cpc.push_back(value_sums[kw].second / cnt);
    for (const auto& [day, cells] : days) {
      std::uint8_t mask = 0;
      for (int i = 0; i < kMatchTypes; ++i) {
        if (!cells[static_cast<std::size_t>(i)].seen) continue;
        mask |= static_cast<std::uint8_t>(1U << i);
        g.impressions.values(row, i) = cells[static_cast<std::size_t>(i)].d;
        g.ctr.values(row, i) = cells[static_cast<std::size_t>(i)].c;
      }
      g.impressions.mask.push_back(mask);
      g.ctr.mask.push_back(mask);
      g.row_keyword.push_back(k);
      g.row_day.push_back(day);
      ++row;
    }
  }
  return g;
}

AdGroupPosterior estimate_adgroup(const std::vector<PerformanceRecord>& records,
                                  const FamilyPriors& priors,
                                  const GibbsConfig& cfg) {
  cfg.validate();
  AdGroupPosterior post;
  post.data = build_adgroup_data(records, cfg.epsilon);
  GibbsConfig imp_cfg = cfg;
  imp_cfg.stream = mix64(cfg.stream ^ 0x1);
  GibbsConfig ctr_cfg = cfg;
  ctr_cfg.stream = mix64(cfg.stream ^ 0x2);
  post.impressions = run_gibbs(post.data.impressions,
                               priors.impressions.value_or(default_prior(post.data.impressions)),
                               imp_cfg);
  post.ctr = run_gibbs(post.data.ctr, priors.ctr.value_or(default_prior(post.data.ctr)), ctr_cfg);
  return post;
}

std::uint64_t stable_hash(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<AdGroupPosterior> estimate_campaign(
    const std::vector<PerformanceRecord>& records, const GibbsConfig& cfg,
    unsigned threads) {
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "no records to estimate");
  std::map<std::string, std::vector<PerformanceRecord>> groups;
  for (const auto& r : records) groups[r.adgroup_id].push_back(r);
  std::vector<const std::vector<PerformanceRecord>*> jobs;
  std::vector<std::string> ids;
  for (const auto& [id, recs] : groups) {
    ids.push_back(id);
    jobs.push_back(&recs);
  }
  std::vector<AdGroupPosterior> out(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        GibbsConfig g = cfg;
        g.stream = stable_hash(ids[i]);
        out[i] = estimate_adgroup(*jobs[i], {}, g);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace kwtarget
