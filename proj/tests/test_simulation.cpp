#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "btrt/errors.hpp"
#include "btrt/simulation.hpp"
#include "test_support.hpp"

using namespace btrt;
using namespace btrt::testing;

TEST_CASE("scenario specs pin the published design factors") {
  const ScenarioSpec four = make_scenario_spec(1, 4, 100, EffectSize::low);
  CHECK(four.lambda(0) == 0.9);
  CHECK(four.lambda(1) == 0.4);
  CHECK(four.lambda(2) == 0.3);
  CHECK(four.lambda(3) == 0.0);
  CHECK(four.beta.rows() == 1);
  CHECK(four.beta(0, 0) == 0.3);

  const ScenarioSpec five = make_scenario_spec(2, 5, 100, EffectSize::high);
  CHECK(five.lambda(0) == 0.8);
  CHECK(five.lambda(4) == 0.1);
  CHECK(five.beta.rows() == 4);
  CHECK(five.beta(1, 1) == 0.9);  // x2 on object B, high effect
  CHECK(five.beta(3, 0) == 0.9);  // x4 on object A, high effect

  const ScenarioSpec inter = make_scenario_spec(3, 4, 100, EffectSize::low);
  CHECK(inter.beta_interaction(2) == 0.35);
}

TEST_CASE("equal worths give coin-flip pair probabilities") {
  ScenarioSpec spec = make_scenario_spec(1, 4, 10, EffectSize::low);
  spec.lambda.setZero();
  spec.beta.setZero();
  Eigen::RowVectorXd x(1);
  x << 1.7;
  const Vector worths = scenario_worths(spec, x);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      CHECK(pair_probability(worths(i), worths(j)) == doctest::Approx(0.5));
}

TEST_CASE("judge at x1 = 0 reproduces the base worths and the A-over-D probability") {
  const ScenarioSpec spec = make_scenario_spec(1, 4, 10, EffectSize::low);
  Eigen::RowVectorXd x(1);
  x << 0.0;
  const Vector worths = scenario_worths(spec, x);
  CHECK(worths(0) == doctest::Approx(0.9));
  CHECK(worths(3) == doctest::Approx(0.0));
  CHECK(pair_probability(worths(0), worths(3)) == doctest::Approx(0.8581).epsilon(1e-4));
}

TEST_CASE("pair probabilities are symmetric and monotone in the worth gap") {
  for (double a : {-0.5, 0.0, 0.9})
    for (double b : {-1.0, 0.2, 0.8})
      CHECK(pair_probability(a, b) + pair_probability(b, a) == doctest::Approx(1.0));
  double previous = 0.0;
  for (double gap : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    const double p = pair_probability(gap, 0.0);
    CHECK(p >= previous);
    previous = p;
  }
}

TEST_CASE("sampled vectors are often intransitive, repaired ones never") {
  const ScenarioSpec spec = make_scenario_spec(2, 5, 300, EffectSize::low);
  Rng rng = make_engine(19);
  const GeneratedPairs sampled = generate_pair_vectors(spec, rng);
  int intransitive = 0;
  for (const PairVector& pv : sampled.pairs)
    if (!is_transitive(pv, 5)) ++intransitive;
  CHECK(intransitive > 0);

  Rng rng2 = make_engine(19);
  const RankingDataset data = generate_dataset(spec, rng2);
  for (const Ranking& r : data.rankings) CHECK(is_strict_ranking(r));
  CHECK(data.judge_count() == 300);
  CHECK(data.covariate_count() == 4);
}

TEST_CASE("scenario 3 with a zero interaction matches scenario 2 draw for draw") {
  ScenarioSpec three = make_scenario_spec(3, 4, 50, EffectSize::high);
  three.beta_interaction.setZero();
  const ScenarioSpec two = make_scenario_spec(2, 4, 50, EffectSize::high);
  Rng rng_three = make_engine(123);
  Rng rng_two = make_engine(123);
  const GeneratedPairs a = generate_pair_vectors(three, rng_three);
  const GeneratedPairs b = generate_pair_vectors(two, rng_two);
  CHECK(a.covariates == b.covariates);
  for (std::size_t h = 0; h < a.pairs.size(); ++h) CHECK(a.pairs[h].bits == b.pairs[h].bits);
}

TEST_CASE("spec grid expands to the full 12-cell cross") {
  const auto grid = expand_spec_grid(2);
  CHECK(grid.size() == 12);
  std::set<std::tuple<int, Index, int>> cells;
  for (const ScenarioSpec& spec : grid)
    cells.insert({spec.n_objects, spec.judges, spec.effect == EffectSize::high ? 1 : 0});
  CHECK(cells.size() == 12);

  int n4 = 0;
  for (const ScenarioSpec& spec : grid)
    if (spec.n_objects == 4) ++n4;
  CHECK(n4 == 6);
}

TEST_CASE("single-replication study runs end to end") {
  const ScenarioSpec spec = make_scenario_spec(1, 4, 40, EffectSize::low);
  StudyConfig config;
  config.replications = 1;
  config.c_grid = {0.0, 1.0};
  config.folds = 5;
  config.seed = 99;
  config.threads = 2;
  const StudyResult result = run_study(spec, config);
  REQUIRE(result.rates.size() == 2);
  for (double rate : result.rates) {
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
  CHECK(result.failures == 0);
}

TEST_CASE("pruning severity is monotone: c = 1 never flags more often than c = 0") {
  const ScenarioSpec spec = make_scenario_spec(1, 4, 60, EffectSize::low);
  StudyConfig config;
  config.replications = 6;
  config.c_grid = {0.0, 1.0};
  config.folds = 5;
  config.seed = 1234;
  config.threads = 2;
  const StudyResult result = run_study(spec, config);
  CHECK(result.rates[1] <= result.rates[0]);

  // per-replication: the same monotonicity holds for each seed
  for (const ReplicationRecord& record : result.replications) {
    if (record.failed) continue;
    CHECK(record.selected[1] <= record.selected[0]);
  }
}

TEST_CASE("study reruns are identical for a fixed master seed") {
  const ScenarioSpec spec = make_scenario_spec(1, 4, 40, EffectSize::high);
  StudyConfig config;
  config.replications = 4;
  config.c_grid = {0.0, 0.5};
  config.folds = 5;
  config.seed = 777;
  config.threads = 1;
  const StudyResult a = run_study(spec, config);
  config.threads = 2;
  const StudyResult b = run_study(spec, config);
  CHECK(a.rates == b.rates);
  for (std::size_t r = 0; r < a.replications.size(); ++r) {
    CHECK(a.replications[r].seed == b.replications[r].seed);
    CHECK(a.replications[r].selected == b.replications[r].selected);
  }
}

TEST_CASE("scenario validation rejects out-of-range specs") {
  CHECK_THROWS_AS(make_scenario_spec(4, 4, 100, EffectSize::low), validation_error);
  CHECK_THROWS_AS(make_scenario_spec(1, 6, 100, EffectSize::low), validation_error);
  ScenarioSpec broken = make_scenario_spec(3, 4, 100, EffectSize::low);
  broken.beta_interaction.resize(0);
  CHECK_THROWS_AS(broken.validate(), validation_error);
}
