#include "kwtarget/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kwtarget/error.hpp"
#include "kwtarget/imputation.hpp"

namespace kwtarget {

namespace {

void check_range(const std::array<double, 2>& r, double lo, double hi, const char* what) {
  if (!(r[0] >= lo && r[1] <= hi && r[0] <= r[1])) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " range is invalid");
  }
}

double uniform_in(RngStream& rng, const std::array<double, 2>& r) {
  return r[0] + (r[1] - r[0]) * rng.uniform();
}

double round_to(double v, double scale) { return std::round(v * scale) / scale; }

Matrix draw_covariance(RngStream& rng, const SyntheticSpec& spec) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector sd(kMatchTypes);
    for (int i = 0; i < kMatchTypes; ++i) sd(i) = std::sqrt(uniform_in(rng, spec.variance_range));
    Matrix cov(kMatchTypes, kMatchTypes);
    for (int i = 0; i < kMatchTypes; ++i) {
      cov(i, i) = sd(i) * sd(i);
      for (int j = 0; j < i; ++j) {
        cov(i, j) = cov(j, i) = uniform_in(rng, spec.correlation_range) * sd(i) * sd(j);
      }
    }
    try {
      cholesky(cov);
      return cov;
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "correlation range yields no positive definite matrix");
}

std::vector<GroupTruth> draw_truth(const SyntheticSpec& spec, RngStream& rng) {
  std::vector<GroupTruth> out;
  const std::size_t rotate = rng.index(3);
  const double base_d = std::log(spec.mean_impressions);
  const double base_c = std::log(spec.mean_ctr / (1.0 - spec.mean_ctr));
  for (int g = 0; g < spec.adgroups; ++g) {
    GroupTruth t;
    t.adgroup_id = "ad-group-" + std::to_string(g + 1);
    const int fav = static_cast<int>((static_cast<std::size_t>(g) + rotate) % 3);
    t.favored = match_from_index(fav);
    const double shift = spec.group_spread * rng.normal();
    t.impressions.mean = Vector(kMatchTypes);
    t.ctr.mean = Vector(kMatchTypes);
    for (int i = 0; i < kMatchTypes; ++i) {
      const double lift = i == fav ? spec.favored_lift * 2.0 / 3.0 : -spec.favored_lift / 3.0;
      t.impressions.mean(i) = base_d + shift + lift + 0.1 * rng.normal();
      t.ctr.mean(i) = base_c + 0.15 * rng.normal();
    }
    t.impressions.cov = draw_covariance(rng, spec);
    t.ctr.cov = draw_covariance(rng, spec);
    out.push_back(std::move(t));
  }
  return out;
}

// Largest-remainder split of n slots over the type probabilities; ties in the
// remainder go to a random type.
std::vector<int> type_slots(int n, const std::array<double, 3>& probs, RngStream& rng) {
  const double total = probs[0] + probs[1] + probs[2];
  std::array<int, 3> count{};
  std::array<double, 3> rem{};
  int used = 0;
  for (int i = 0; i < 3; ++i) {
    const double q = n * probs[static_cast<std::size_t>(i)] / total;
    count[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(q));
    rem[static_cast<std::size_t>(i)] = q - std::floor(q);
    used += count[static_cast<std::size_t>(i)];
  }
  std::array<int, 3> order{0, 1, 2};
  for (std::size_t i = 2; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rem[static_cast<std::size_t>(a)] > rem[static_cast<std::size_t>(b)];
  });
  for (int i = 0; used < n; ++i, ++used) ++count[static_cast<std::size_t>(order[static_cast<std::size_t>(i % 3)])];
  std::vector<int> slots;
  for (int i = 0; i < 3; ++i) slots.insert(slots.end(), static_cast<std::size_t>(count[static_cast<std::size_t>(i)]), i);
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.index(i)]);
  return slots;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (adgroups < 1 || keywords_per_group < 1 || days < 1) {
    throw Error(ErrorCode::kInvalidArgument, "adgroups, keywords_per_group and days must be >= 1");
  }
  if (!start.valid()) throw Error(ErrorCode::kInvalidArgument, "start date is invalid");
  if (!(mean_impressions > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mean_impressions must be positive");
  if (!(mean_ctr > 0.0 && mean_ctr < 1.0)) throw Error(ErrorCode::kInvalidArgument, "mean_ctr must lie in (0, 1)");
  if (!(group_spread >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "group_spread must be >= 0");
  check_range(variance_range, 1e-8, 1e3, "variance");
  check_range(correlation_range, -0.49, 0.99, "correlation");
  check_range(vpc_range, 0.0, 1e9, "vpc");
  check_range(cpc_range, 0.0, 1e9, "cpc");
  double total = 0.0;
  for (double p : type_probs) {
    if (!(p >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "type probabilities must be >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "type probabilities sum to zero");
  if (!truth.empty() && truth.size() != static_cast<std::size_t>(adgroups)) {
    throw Error(ErrorCode::kInvalidArgument, "truth must list one entry per ad-group");
  }
}

SyntheticCampaign generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed, 0x5e7);
  SyntheticCampaign out;
  out.truth = spec.truth.empty() ? draw_truth(spec, rng) : spec.truth;
  const long day0 = spec.start.serial();
  int next_keyword = 1;
  for (int g = 0; g < spec.adgroups; ++g) {
    const auto& t = out.truth[static_cast<std::size_t>(g)];
    const Matrix ld = cholesky(t.impressions.cov);
    const Matrix lc = cholesky(t.ctr.cov);
    const auto slots = type_slots(spec.keywords_per_group, spec.type_probs, rng);
    for (int k = 0; k < spec.keywords_per_group; ++k) {
      const std::string kw = "keyword-" + std::to_string(next_keyword++);
      const int type = slots[static_cast<std::size_t>(k)];
      const double vpc = round_to(uniform_in(rng, spec.vpc_range), 100.0);
      const double cpc = std::max(0.01, round_to(uniform_in(rng, spec.cpc_range), 100.0));
      out.keywords.emplace_back(t.adgroup_id, kw);
      out.observed.push_back(match_from_index(type));
      for (int d = 0; d < spec.days; ++d) {
        const Vector dv = sample_mvn_chol(t.impressions.mean, ld, rng);
        const Vector cv = sample_mvn_chol(t.ctr.mean, lc, rng);
        PerformanceRecord r;
        r.day = Date::from_serial(day0 + d);
        r.keyword_id = kw;
        r.adgroup_id = t.adgroup_id;
        r.match = match_from_index(type);
        r.impressions = std::round(inverse_transform(dv(type), IndexFamily::kImpressions));
        r.ctr = round_to(inverse_transform(cv(type), IndexFamily::kCtr), 1e4);
        r.vpc = vpc;
        r.cpc = cpc;
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace kwtarget
