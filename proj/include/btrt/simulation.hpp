#pragma once

#include <cstdint>
#include <vector>

#include "btrt/pruning.hpp"

namespace btrt {

enum class EffectSize { low, high };

/// One data-generating configuration of the pruning calibration study.
/// Scenario 1 has a single active covariate, scenario 2 four linear main
/// effects, scenario 3 adds a threshold interaction active on judges with
/// x1 > 0 and x2 > 0.5.
struct ScenarioSpec {
  int scenario = 1;          // 1, 2 or 3
  int n_objects = 4;         // 4 or 5
  Index judges = 100;
  EffectSize effect = EffectSize::low;
  Vector lambda;             // object worths, one per object (last is 0)
  Matrix beta;               // P x n_objects covariate effects
  Vector beta_interaction;   // per-object shift inside the interaction region (scenario 3)

  Index covariate_count() const { return beta.rows(); }
  void validate() const;
};

ScenarioSpec make_scenario_spec(int scenario, int n_objects, Index judges, EffectSize effect);

/// The full judges x objects x effect-size cross for one scenario
/// (3 x 2 x 2 = 12 specifications).
std::vector<ScenarioSpec> expand_spec_grid(int scenario);

/// Raw sampled preferences before transitivity repair.
struct GeneratedPairs {
  Matrix covariates;              // H x P standard normal draws
  std::vector<PairVector> pairs;  // one per judge, possibly intransitive
};

/// Per-judge worth of each object under the scenario equation.
Vector scenario_worths(const ScenarioSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Pairwise preference probability P(i preferred to j) implied by worths:
/// logistic(2 (lambda_i - lambda_j)).
double pair_probability(double worth_i, double worth_j);

GeneratedPairs generate_pair_vectors(const ScenarioSpec& spec, Rng& rng);

/// Full pipeline: sample covariates and Bernoulli pair outcomes, repair each
/// judge's vector to the nearest permutation, return strict rankings plus
/// covariates.
RankingDataset generate_dataset(const ScenarioSpec& spec, Rng& rng);

struct StudyConfig {
  Index replications = 100;
  std::vector<double> c_grid = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  Index max_terminal = 5;
  int folds = 10;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ReplicationRecord {
  std::uint64_t seed = 0;
  bool failed = false;
  std::vector<Index> selected;          // one per c value
  std::vector<Index> split_covariates;  // grown sequence splits, in order
};

/// Per-c outcome rates. For scenarios 1-2 the rate is the Type I error: the
/// fraction of replications whose selected trunk has at least one split.
/// For scenario 3 it is the power: the fraction whose selected trunk has
/// exactly two splits and their covariates are exactly {x1, x2}.
struct StudyResult {
  ScenarioSpec spec;
  StudyConfig config;
  std::vector<double> rates;            // aligned with config.c_grid
  std::vector<ReplicationRecord> replications;
  Index failures = 0;
};

StudyResult run_study(const ScenarioSpec& spec, const StudyConfig& config);

}  // namespace btrt
