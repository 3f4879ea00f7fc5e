#include "mcpr/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcpr::model {

void SimulationConfig::validate() const {
  std::ostringstream err;
  if (m < 2) err << "m: must be >= 2 (got " << m << "); ";
  if (r < 1) err << "r: must be >= 1 (got " << r << "); ";
  if (K < 1) err << "K: must be >= 1 (got " << K << "); ";
  if (!(b >= 0.0) || !std::isfinite(b)) err << "b: must be a finite value >= 0 (got " << b << "); ";
  if (!(epsilon >= 0.0 && epsilon < 1.0)) err << "epsilon: must be in [0, 1) (got " << epsilon << "); ";
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("SimulationConfig: " + msg);
}

std::string SimulationConfig::theory_range_warning() const {
  if (b == 0.0) return "b = 0: clusters are unidentifiable (all score vectors are zero)";
  if (b > 5.0) return "b > 5: outside the range covered by the clustering guarantees";
  return {};
}

ClusterModel generate_scores(const SimulationConfig& config, const SplitRng& rng) {
  config.validate();
  ClusterModel out;
  out.scores.reserve(config.r);
  for (int k = 0; k < config.r; ++k) {
    SplitRng stream = rng.fork(stream::kScores, static_cast<std::uint64_t>(k));
    ScoreVector theta(config.m);
    for (int i = 0; i < config.m; ++i) theta[i] = stream.uniform(0.0, config.b);
    theta.array() -= theta.mean();
    out.scores.push_back(std::move(theta));
  }
  out.labels.resize(config.n());
  for (int u = 0; u < config.n(); ++u) out.labels[u] = u / config.K;
  return out;
}

ComparisonDataset sample_comparisons(const ClusterModel& model, double epsilon,
                                     const SplitRng& rng) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("sample_comparisons: epsilon must be in [0, 1)");
  const int m = model.m();
  const double keep = 1.0 - epsilon;
  ComparisonDataset out;
  out.m = m;
  out.users.resize(model.n());
  for (int u = 0; u < model.n(); ++u) {
    const ScoreVector& theta = model.scores[model.labels[u]];
    SplitRng stream = rng.fork(stream::kComparisons, static_cast<std::uint64_t>(u));
    auto& records = out.users[u];
    for (std::int32_t i = 0; i < m; ++i) {
      for (std::int32_t j = i + 1; j < m; ++j) {
        if (stream.uniform() >= keep) continue;
        const double p = win_probability(theta[i], theta[j]);
        const std::int8_t outcome = stream.uniform() < p ? std::int8_t{1} : std::int8_t{-1};
        records.push_back({i, j, outcome});
      }
    }
  }
  return out;
}

SplitDataset split_sample(const ComparisonDataset& source, double epsilon,
                          const SplitRng& rng) {
  if (!(epsilon >= 0.0 && epsilon < 1.0))
    throw std::invalid_argument("split_sample: epsilon must be in [0, 1)");
  const double only_one = (1.0 + epsilon) / 4.0;   // mass for "first only"
  const double both = (1.0 - epsilon) / 4.0;       // mass for "both"
  SplitDataset out;
  out.first.m = out.second.m = source.m;
  out.first.users.resize(source.n());
  out.second.users.resize(source.n());
  for (int u = 0; u < source.n(); ++u) {
    SplitRng stream = rng.fork(stream::kSplit, static_cast<std::uint64_t>(u));
    for (const Comparison& rec : source.users[u]) {
      const double x = stream.uniform();
      if (x < only_one) {
        out.first.users[u].push_back(rec);
      } else if (x < 2.0 * only_one) {
        out.second.users[u].push_back(rec);
      } else if (x < 2.0 * only_one + both) {
        out.first.users[u].push_back(rec);
        out.second.users[u].push_back(rec);
      }
      // remaining (1-eps)/4 mass: dropped
    }
  }
  return out;
}

}  // namespace mcpr::model
