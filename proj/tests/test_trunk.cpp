#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "btrt/errors.hpp"
#include "btrt/simulation.hpp"
#include "btrt/trunk.hpp"
#include "test_support.hpp"

using namespace btrt;
using namespace btrt::testing;

TEST_CASE("candidate_thresholds dedups and drops the maximum") {
  CHECK(candidate_thresholds({1, 2, 2, 3}) == std::vector<double>{1, 2});
  CHECK(candidate_thresholds({5, 5, 5}).empty());
  CHECK(candidate_thresholds({}).empty());

  Rng rng = make_engine(3);
  std::normal_distribution<double> normal;
  std::vector<double> sample(100);
  for (double& v : sample) v = normal(rng);
  const auto thresholds = candidate_thresholds(sample);
  CHECK(thresholds.size() <= 99);
  CHECK(std::is_sorted(thresholds.begin(), thresholds.end()));
}

TEST_CASE("stopping_rule boundary cases") {
  CHECK(stopping_rule(100, 10, 90));
  CHECK_FALSE(stopping_rule(100, 9, 91));
  CHECK_FALSE(stopping_rule(4, 2, 2));
  CHECK_FALSE(stopping_rule(3, 2, 1));
  CHECK(stopping_rule(5, 3, 2));  // ceil(sqrt(5)) = 3
  CHECK_FALSE(stopping_rule(5, 4, 1));
}

TEST_CASE("evaluate_split: any feasible split never beats nesting") {
  const RankingDataset data = random_fixture(4, 60, 2, 21);
  const RegionSet root = RegionSet::root_only();
  const double parent = fit(build_design(data, root)).deviance;
  for (double threshold : {-0.3, 0.1, 0.6}) {
    const auto child = evaluate_split(data, root, 0, 0, threshold);
    REQUIRE(child.has_value());
    CHECK(*child <= parent + 1e-8);
  }
}

TEST_CASE("redundant split leaves the deviance unchanged") {
  const RankingDataset data = random_fixture(4, 50, 1, 33);
  const RegionSet two = threshold_regions(0.0);
  const double base = fit(build_design(data, two), FitOptions{.strict = false}).deviance;

  // a split below every observed value separates no judge differently: one
  // child is empty, the other duplicates its parent region, and the refit
  // lands on the same optimum
  const auto dev = evaluate_split(data, two, 0, 0, -100.0);
  REQUIRE(dev.has_value());
  CHECK(*dev == doctest::Approx(base).epsilon(1e-7));

  // same span argument with an exactly duplicated region column group
  const DesignMatrix base_design = build_design(data, two);
  DesignMatrix padded = base_design;
  padded.regions += 1;
  padded.pair_rows.conservativeResize(Eigen::NoChange, base_design.column_count() + 3);
  padded.pair_rows.rightCols(3) = base_design.pair_rows.rightCols(3);
  for (int i = 0; i < 3; ++i) padded.column_names.push_back("region(dup" + std::to_string(i) + ")");
  const GlmFit padded_fit = fit(padded, FitOptions{.strict = false});
  CHECK(padded_fit.rank_deficient);
  CHECK(padded_fit.deviance == doctest::Approx(base).epsilon(1e-7));
}

TEST_CASE("high-effect interaction: first split beats the root model") {
  const ScenarioSpec spec = make_scenario_spec(3, 4, 150, EffectSize::high);
  Rng rng = make_engine(2024);
  const RankingDataset data = generate_dataset(spec, rng);
  const double root_dev = fit(build_design(data, RegionSet::root_only())).deviance;
  GrowConfig config;
  config.max_terminal = 2;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  REQUIRE(sequence.size() == 2);
  CHECK(sequence.entries[1].deviance < root_dev);
  CHECK(sequence.entries[0].deviance == doctest::Approx(root_dev));
}

TEST_CASE("grow respects OSO: no covariate splits twice") {
  const RankingDataset data = random_fixture(4, 80, 3, 404);
  GrowConfig config;
  config.approach = SplitApproach::one_split_only;
  config.max_terminal = 5;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  const auto covariates = sequence.split_covariates();
  std::set<Index> unique(covariates.begin(), covariates.end());
  CHECK(unique.size() == covariates.size());
  CHECK(covariates.size() <= 3);
}

TEST_CASE("OSO with P covariates stops after at most P splits") {
  const RankingDataset data = random_fixture(4, 60, 2, 505);
  GrowConfig config;
  config.approach = SplitApproach::one_split_only;
  config.max_terminal = 8;  // more than P+1 terminals requested
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  CHECK(sequence.split_covariates().size() <= 2);
}

TEST_CASE("MS may reuse a covariate") {
  // single covariate with two genuine thresholds: only MS can find both
  Rng rng = make_engine(909);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const Index H = 150;
  Matrix x(H, 1);
  RankingDataset data;
  data.n_objects = 4;
  data.object_names = {"A", "B", "C", "D"};
  data.covariate_names = {"x1"};
  for (Index h = 0; h < H; ++h) x(h, 0) = normal(rng);
  data.covariates = x;
  for (Index h = 0; h < H; ++h) {
    Vector worths(4);
    worths << 0.5, 0.2, 0.1, 0.0;
    if (x(h, 0) > 0.7) worths += (Vector(4) << 1.2, -0.8, 0.4, 0.0).finished();
    if (x(h, 0) <= -0.7) worths += (Vector(4) << -1.0, 0.9, -0.5, 0.0).finished();
    PairVector pv;
    pv.bits.resize(6);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        pv.bits[static_cast<std::size_t>(pair_index(i, j, 4))] =
            uniform(rng) < logistic(2.0 * (worths(i) - worths(j))) ? 1 : 0;
    data.rankings.push_back(repair_to_nearest_ranking(pv, 4, rng));
  }

  GrowConfig config;
  config.approach = SplitApproach::multiple_splitting;
  config.max_terminal = 3;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  const auto covariates = sequence.split_covariates();
  REQUIRE(covariates.size() == 2);
  CHECK(covariates[0] == 0);
  CHECK(covariates[1] == 0);
}

TEST_CASE("deviance is non-increasing along the sequence") {
  const RankingDataset data = random_fixture(5, 70, 2, 606);
  GrowConfig config;
  config.max_terminal = 4;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  for (std::size_t s = 1; s < sequence.entries.size(); ++s)
    CHECK(sequence.entries[s].deviance <= sequence.entries[s - 1].deviance + 1e-8);
}

TEST_CASE("grow is deterministic and thread-count independent") {
  const RankingDataset data = random_fixture(4, 60, 2, 707);
  GrowConfig one;
  one.max_terminal = 4;
  one.threads = 1;
  GrowConfig four = one;
  four.threads = 4;
  const TrunkSequence a = grow(data, one);
  const TrunkSequence b = grow(data, four);
  const TrunkSequence c = grow(data, one);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == c.size());
  for (Index s = 0; s < a.size(); ++s) {
    const auto& ea = a.entries[static_cast<std::size_t>(s)];
    const auto& eb = b.entries[static_cast<std::size_t>(s)];
    const auto& ec = c.entries[static_cast<std::size_t>(s)];
    CHECK(ea.deviance == eb.deviance);  // bitwise: same candidates, same fits
    CHECK(ea.deviance == ec.deviance);
    if (ea.split) {
      CHECK(ea.split->node_id == eb.split->node_id);
      CHECK(ea.split->covariate == eb.split->covariate);
      CHECK(ea.split->threshold == eb.split->threshold);
    }
  }
}

TEST_CASE("terminal regions reproduce the node judge sets") {
  const RankingDataset data = random_fixture(4, 80, 2, 808);
  GrowConfig config;
  config.max_terminal = 4;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  const Index last = sequence.size() - 1;
  const RegionSet rebuilt = regions_at_step(sequence, last);
  REQUIRE(rebuilt.size() == sequence.entries.back().regions.size());
  const std::vector<Index> assigned = assign_regions(data, rebuilt);
  for (Index t = 0; t < rebuilt.size(); ++t) {
    const Region& region = rebuilt.regions[static_cast<std::size_t>(t)];
    const TrunkNode* node = nullptr;
    for (const TrunkNode& n : sequence.nodes)
      if (n.id == region.node_id) node = &n;
    REQUIRE(node != nullptr);
    std::set<Index> from_tree(node->judges.begin(), node->judges.end());
    std::set<Index> from_regions;
    for (Index h = 0; h < data.judge_count(); ++h)
      if (assigned[static_cast<std::size_t>(h)] == t) from_regions.insert(h);
    CHECK(from_tree == from_regions);
  }
}

TEST_CASE("node ids follow heap numbering and regions sort by id") {
  const RankingDataset data = random_fixture(4, 80, 2, 111);
  GrowConfig config;
  config.max_terminal = 4;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  for (const TrunkNode& node : sequence.nodes) {
    if (node.parent != 0) CHECK((node.id == 2 * node.parent || node.id == 2 * node.parent + 1));
  }
  for (const TrunkEntry& entry : sequence.entries) {
    for (std::size_t t = 1; t < entry.regions.regions.size(); ++t)
      CHECK(entry.regions.regions[t - 1].node_id < entry.regions.regions[t].node_id);
  }
}

TEST_CASE("tiny node never splits") {
  const RankingDataset data = random_fixture(3, 4, 1, 3);  // 4 judges: parent > 4 fails
  GrowConfig config;
  config.max_terminal = 3;
  const TrunkSequence sequence = grow(data, config);
  CHECK(sequence.size() == 1);
}

TEST_CASE("interaction recovery: both split covariates are the true ones") {
  // high-effect scenario at generous H: the grown trunk's first two splits
  // should recover {x1, x2} in most replications
  int recovered = 0;
  const int replications = 10;
  for (int r = 0; r < replications; ++r) {
    const ScenarioSpec spec = make_scenario_spec(3, 4, 300, EffectSize::high);
    Rng rng = make_engine(4000 + static_cast<std::uint64_t>(r));
    const RankingDataset data = generate_dataset(spec, rng);
    GrowConfig config;
    config.max_terminal = 3;
    config.threads = 2;
    const TrunkSequence sequence = grow(data, config);
    const auto covariates = sequence.split_covariates();
    if (covariates.size() == 2 &&
        std::set<Index>(covariates.begin(), covariates.end()) == std::set<Index>{0, 1})
      ++recovered;
  }
  CHECK(recovered >= 8);
}

TEST_CASE("dot emission carries consensus labels, counts, and split edges") {
  const RankingDataset data = random_fixture(4, 60, 2, 222);
  GrowConfig config;
  config.max_terminal = 3;
  config.threads = 2;
  const TrunkSequence sequence = grow(data, config);
  std::ostringstream dot;
  write_dot(dot, sequence, sequence.size() - 1, data);
  const std::string text = dot.str();
  CHECK(text.find("digraph trunk") != std::string::npos);
  CHECK(text.find("n1 ->") != std::string::npos);
  CHECK(text.find("tau_x") != std::string::npos);
  CHECK(text.find("(R1)") != std::string::npos);
  CHECK(text.find("h = ") != std::string::npos);

  std::ostringstream root_only;
  write_dot(root_only, sequence, 0, data);
  CHECK(root_only.str().find("->") == std::string::npos);  // single node, no edges
}
