#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mcpr/io.hpp"
#include "mcpr/model.hpp"
#include "mcpr/rng.hpp"
#include "oracles.hpp"

using namespace mcpr;
using model::SimulationConfig;

namespace {
SimulationConfig config(int m, int r, int K, double b, double eps, std::uint64_t seed) {
  SimulationConfig c;
  c.m = m;
  c.r = r;
  c.K = K;
  c.b = b;
  c.epsilon = eps;
  c.seed = seed;
  return c;
}
}  // namespace

TEST_CASE("rng: forked streams are deterministic and independent of siblings") {
  SplitRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  SplitRng root(7);
  SplitRng c1 = root.fork(1);
  SplitRng c2 = root.fork(2);
  CHECK(c1.next_u64() != c2.next_u64());
  // forking does not consume parent state
  SplitRng root2(7);
  (void)root2.fork(1);
  SplitRng c1_again = root2.fork(1);
  SplitRng c1_ref = SplitRng(7).fork(1);
  CHECK(c1_again.next_u64() == c1_ref.next_u64());
}

TEST_CASE("rng: uniform stays in [0,1) and has a sane mean") {
  SplitRng rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("bt_margin: origin, symmetry, frozen tanh oracle value") {
  CHECK(model::bt_margin(0.0) == 0.0);
  for (double x : {0.5, 2.0, 10.0}) CHECK(model::bt_margin(x) == -model::bt_margin(-x));

  // f(2) = tanh(1); continued-fraction oracle agrees with the frozen digits
  const double frozen = 0.7615941559557649;
  CHECK(std::abs(double(oracle::bt_margin_cf(2.0L)) - frozen) < 1e-15);
  CHECK(model::bt_margin(2.0) == doctest::Approx(frozen).epsilon(1e-12));

  // saturation without overflow
  CHECK(model::bt_margin(1000.0) == 1.0);
  CHECK(model::bt_margin(-1000.0) == -1.0);
  CHECK(std::isfinite(model::bt_margin(700.0)));
}

TEST_CASE("win_probability: equal scores, shift invariance, closed form") {
  CHECK(model::win_probability(1.7, 1.7) == 0.5);
  CHECK(model::win_probability(101.0, 100.0) ==
        doctest::Approx(model::win_probability(1.0, 0.0)).epsilon(1e-12));
  CHECK(model::win_probability(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-12));
  // stable at extreme gaps
  CHECK(model::win_probability(1000.0, 0.0) == 1.0);
  CHECK(model::win_probability(0.0, 1000.0) == 0.0);
}

TEST_CASE("properties: margin and win probability are two routes to one quantity") {
  SplitRng rng(11);
  for (int t = 0; t < 200; ++t) {
    const double x = rng.uniform(-30.0, 30.0);
    CHECK(std::abs(model::bt_margin(x) - (2.0 * model::win_probability(x, 0.0) - 1.0)) < 1e-12);
    const double c = rng.uniform(-50.0, 50.0);
    const double ti = rng.uniform(-3.0, 3.0), tj = rng.uniform(-3.0, 3.0);
    CHECK(std::abs(model::win_probability(ti + c, tj + c) - model::win_probability(ti, tj)) <
          1e-12);
  }
}

TEST_CASE("generate_scores: centering, spread bound, block labels, determinism") {
  const auto cfg = config(50, 3, 4, 2.5, 0.0, 99);
  const auto m1 = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto m2 = model::generate_scores(cfg, SplitRng(cfg.seed));
  REQUIRE(m1.r() == 3);
  REQUIRE(m1.n() == 12);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(m1.scores[k].sum()) < 1e-10);
    CHECK(m1.scores[k].maxCoeff() - m1.scores[k].minCoeff() <= cfg.b);
    // bit-identical regeneration
    CHECK((m1.scores[k].array() == m2.scores[k].array()).all());
  }
  for (int u = 0; u < 12; ++u) CHECK(m1.labels[u] == u / 4);

  const auto zero = model::generate_scores(config(10, 2, 2, 0.0, 0.0, 1), SplitRng(1));
  for (const auto& s : zero.scores) CHECK(s.norm() == 0.0);
}

TEST_CASE("sample_comparisons: full observation at eps = 0, m = 2") {
  const auto cfg = config(2, 1, 5, 1.0, 0.0, 3);
  const auto truth = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto data = model::sample_comparisons(truth, 0.0, SplitRng(cfg.seed));
  for (const auto& recs : data.users) {
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].i == 0);
    CHECK(recs[0].j == 1);
  }
}

TEST_CASE("sample_comparisons: empirical win rate matches the model") {
  // b = 0: fair coin on every observed pair
  const auto cfg = config(20, 1, 60, 0.0, 0.0, 17);
  const auto truth = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto data = model::sample_comparisons(truth, 0.0, SplitRng(cfg.seed));
  double plus = 0.0, total = 0.0;
  for (const auto& recs : data.users)
    for (const auto& rec : recs) {
      total += 1.0;
      if (rec.outcome > 0) plus += 1.0;
    }
  CHECK(total == 60.0 * 190.0);
  CHECK(oracle::within_3sigma(plus, total, 0.5));

  // single pair with theta gap ln 3: +1 rate 0.75
  model::ClusterModel single;
  single.scores.push_back(Eigen::Vector2d(0.5 * std::log(3.0), -0.5 * std::log(3.0)));
  single.labels.assign(100000, 0);
  const auto pair_data = model::sample_comparisons(single, 0.0, SplitRng(5));
  double wins = 0.0;
  for (const auto& recs : pair_data.users) wins += recs[0].outcome > 0 ? 1.0 : 0.0;
  CHECK(oracle::within_3sigma(wins, 1e5, 0.75));
}

TEST_CASE("sample_comparisons: erasure thins the support at rate 1 - eps") {
  const auto cfg = config(40, 1, 50, 1.0, 0.8, 23);
  const auto truth = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto data = model::sample_comparisons(truth, cfg.epsilon, SplitRng(cfg.seed));
  const double total = double(data.total_records());
  const double pairs = 50.0 * data.pair_count();
  CHECK(oracle::within_3sigma(total, pairs, 0.2));
  // records are sorted, unique, and index-valid by construction
  for (const auto& recs : data.users) {
    std::set<std::pair<int, int>> seen;
    for (const auto& rec : recs) {
      REQUIRE(rec.i < rec.j);
      REQUIRE(rec.j < 40);
      REQUIRE(rec.i >= 0);
      CHECK(seen.insert({rec.i, rec.j}).second);
    }
  }
}

TEST_CASE("split_sample: empty source, bad epsilon, outcome fidelity") {
  model::ComparisonDataset empty;
  empty.m = 5;
  empty.users.resize(3);
  const auto split = model::split_sample(empty, 0.3, SplitRng(1));
  CHECK(split.first.total_records() == 0);
  CHECK(split.second.total_records() == 0);

  CHECK_THROWS_AS(model::split_sample(empty, 1.0, SplitRng(1)), std::invalid_argument);
  CHECK_THROWS_AS(model::split_sample(empty, -0.1, SplitRng(1)), std::invalid_argument);

  const auto cfg = config(15, 2, 20, 2.0, 0.4, 31);
  const auto truth = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto data = model::sample_comparisons(truth, cfg.epsilon, SplitRng(cfg.seed));
  const auto sp = model::split_sample(data, cfg.epsilon, SplitRng(cfg.seed));
  // supports are subsets and outcomes are copied verbatim
  for (int u = 0; u < data.n(); ++u) {
    std::map<std::pair<int, int>, int> source;
    for (const auto& rec : data.users[u]) source[{rec.i, rec.j}] = rec.outcome;
    for (const auto* half : {&sp.first, &sp.second})
      for (const auto& rec : half->users[u]) {
        auto it = source.find({rec.i, rec.j});
        REQUIRE(it != source.end());
        CHECK(it->second == rec.outcome);
      }
  }
}

TEST_CASE("split_sample: assignment frequencies match the three stated masses") {
  // one user with 10^6 support elements; epsilon only shapes the masses
  const double eps = 0.6;
  model::ComparisonDataset source;
  const int m = 1500;
  source.m = m;
  source.users.resize(1);
  auto& recs = source.users[0];
  for (int i = 0; i < m && recs.size() < 1000000; ++i)
    for (int j = i + 1; j < m && recs.size() < 1000000; ++j)
      recs.push_back({i, j, 1});
  const double total = double(recs.size());
  REQUIRE(total == 1000000.0);

  const auto sp = model::split_sample(source, eps, SplitRng(77));
  std::set<std::pair<int, int>> in_first;
  for (const auto& rec : sp.first.users[0]) in_first.insert({rec.i, rec.j});
  std::set<std::pair<int, int>> in_second;
  for (const auto& rec : sp.second.users[0]) in_second.insert({rec.i, rec.j});

  double only1 = 0, only2 = 0, both = 0;
  for (const auto& rec : recs) {
    const bool f = in_first.count({rec.i, rec.j});
    const bool s = in_second.count({rec.i, rec.j});
    if (f && s)
      ++both;
    else if (f)
      ++only1;
    else if (s)
      ++only2;
  }
  CHECK(oracle::within_3sigma(only1, total, (1 + eps) / 4));
  CHECK(oracle::within_3sigma(only2, total, (1 + eps) / 4));
  CHECK(oracle::within_3sigma(both, total, (1 - eps) / 4));
  // marginal presence in the first half-sample is 1/2 of the support
  CHECK(oracle::within_3sigma(only1 + both, total, 0.5));
}

TEST_CASE("config validation reports the offending field") {
  CHECK_THROWS_WITH_AS(config(1, 1, 1, 1.0, 0.0, 0).validate(),
                       doctest::Contains("m:"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config(5, 0, 1, 1.0, 0.0, 0).validate(),
                       doctest::Contains("r:"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config(5, 1, 1, -1.0, 0.0, 0).validate(),
                       doctest::Contains("b:"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(config(5, 1, 1, 1.0, 1.0, 0).validate(),
                       doctest::Contains("epsilon:"), std::invalid_argument);
  CHECK_NOTHROW(config(2, 1, 1, 0.0, 0.0, 0).validate());
}

TEST_CASE("io: golden bytes for a tiny model and dataset") {
  const auto cfg = config(3, 1, 2, 0.5, 0.25, 9);
  model::ClusterModel m;
  m.scores.push_back(Eigen::Vector3d(0.25, -0.5, 0.25));
  m.labels = {0, 0};
  std::ostringstream ms;
  io::write_model(ms, cfg, m);
  CHECK(ms.str() == "3 1 2 0.5 0.25 9\n0 0\n1 0\nscores\n0 0.25 -0.5 0.25\n");

  model::ComparisonDataset d;
  d.m = 3;
  d.users.resize(2);
  d.users[0] = {{0, 1, 1}, {1, 2, -1}};
  d.users[1] = {{0, 2, -1}};
  std::ostringstream ds;
  io::write_dataset(ds, cfg, d);
  CHECK(ds.str() == "3 1 2 0.5 0.25 9\n0 0 1 1\n0 1 2 -1\n1 0 2 -1\n");
}

TEST_CASE("io: round trip preserves every record and score") {
  const auto cfg = config(12, 3, 7, 1.75, 0.35, 1234);
  const auto truth = model::generate_scores(cfg, SplitRng(cfg.seed));
  const auto data = model::sample_comparisons(truth, cfg.epsilon, SplitRng(cfg.seed));

  std::stringstream ms;
  io::write_model(ms, cfg, truth);
  const auto lm = io::read_model(ms);
  CHECK(lm.config == cfg);
  CHECK(lm.model.labels == truth.labels);
  for (int k = 0; k < truth.r(); ++k)
    CHECK((lm.model.scores[k] - truth.scores[k]).norm() == 0.0);

  std::stringstream ds;
  io::write_dataset(ds, cfg, data);
  const auto ld = io::read_dataset(ds);
  CHECK(ld.config == cfg);
  REQUIRE(ld.dataset.n() == data.n());
  for (int u = 0; u < data.n(); ++u) {
    REQUIRE(ld.dataset.users[u].size() == data.users[u].size());
    for (std::size_t i = 0; i < data.users[u].size(); ++i) {
      CHECK(ld.dataset.users[u][i].i == data.users[u][i].i);
      CHECK(ld.dataset.users[u][i].j == data.users[u][i].j);
      CHECK(ld.dataset.users[u][i].outcome == data.users[u][i].outcome);
    }
  }
}

TEST_CASE("io: malformed inputs are rejected") {
  std::istringstream bad_header("3 1\n");
  CHECK_THROWS(io::read_model(bad_header));
  std::istringstream bad_record("3 1 2 0.5 0 9\n0 2 1 1\n");  // j <= i
  CHECK_THROWS(io::read_dataset(bad_record));
  std::istringstream bad_outcome("3 1 2 0.5 0 9\n0 0 1 2\n");
  CHECK_THROWS(io::read_dataset(bad_outcome));
}
