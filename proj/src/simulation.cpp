#include "btrt/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <string>

#include "btrt/errors.hpp"
#include "btrt/parallel.hpp"

namespace btrt {

namespace {

Vector to_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Matrix beta_table(int scenario, int n_objects, EffectSize effect) {
  const bool high = effect == EffectSize::high;
  std::vector<Vector> rows;
  if (n_objects == 4) {
    rows.push_back(high ? to_vector({0.90, 0.80, 0.70, 0.00})
                        : to_vector({0.30, 0.20, 0.10, 0.00}));
    if (scenario >= 2) {
      rows.push_back(high ? to_vector({0.80, 0.70, 0.90, 0.00})
                          : to_vector({0.20, 0.30, 0.10, 0.00}));
      rows.push_back(high ? to_vector({0.70, 0.90, 0.80, 0.00})
                          : to_vector({0.10, 0.20, 0.30, 0.00}));
      rows.push_back(high ? to_vector({0.90, 0.70, 0.80, 0.00})
                          : to_vector({0.30, 0.10, 0.20, 0.00}));
    }
  } else {
    rows.push_back(high ? to_vector({0.90, 0.80, 0.70, 0.60, 0.00})
                        : to_vector({0.40, 0.30, 0.20, 0.10, 0.00}));
    if (scenario >= 2) {
      rows.push_back(high ? to_vector({0.80, 0.90, 0.60, 0.70, 0.00})
                          : to_vector({0.30, 0.20, 0.10, 0.40, 0.00}));
      rows.push_back(high ? to_vector({0.70, 0.60, 0.80, 0.90, 0.00})
                          : to_vector({0.20, 0.10, 0.30, 0.40, 0.00}));
      rows.push_back(high ? to_vector({0.90, 0.70, 0.60, 0.80, 0.00})
                          : to_vector({0.10, 0.20, 0.40, 0.30, 0.00}));
    }
  }
  Matrix beta(static_cast<Index>(rows.size()), n_objects);
  for (Index p = 0; p < beta.rows(); ++p) beta.row(p) = rows[static_cast<std::size_t>(p)];
  return beta;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (scenario < 1 || scenario > 3) throw validation_error("scenario must be 1, 2 or 3");
  if (n_objects != 4 && n_objects != 5)
    throw validation_error("scenario specs cover 4 or 5 objects");
  if (judges < 1) throw validation_error("scenario: judge count must be positive");
  if (lambda.size() != n_objects) throw validation_error("scenario: lambda size mismatch");
  if (beta.cols() != n_objects) throw validation_error("scenario: beta column mismatch");
  const Index expected_p = scenario == 1 ? 1 : 4;
  if (beta.rows() != expected_p) throw validation_error("scenario: beta row mismatch");
  if (scenario == 3 && beta_interaction.size() != n_objects)
    throw validation_error("scenario 3: interaction coefficients missing");
}

ScenarioSpec make_scenario_spec(int scenario, int n_objects, Index judges, EffectSize effect) {
  ScenarioSpec spec;
  spec.scenario = scenario;
  spec.n_objects = n_objects;
  spec.judges = judges;
  spec.effect = effect;
  spec.lambda = n_objects == 4 ? to_vector({0.9, 0.4, 0.3, 0.0})
                               : to_vector({0.8, 0.4, 0.2, 0.0, 0.1});
  spec.beta = beta_table(scenario, n_objects, effect);
  if (scenario == 3) {
    const bool high = effect == EffectSize::high;
    spec.beta_interaction = n_objects == 4
                                ? (high ? to_vector({0.55, 0.65, 0.45, 0.00})
                                        : to_vector({0.25, 0.15, 0.35, 0.00}))
                                : (high ? to_vector({0.55, 0.65, 0.45, 0.60, 0.00})
                                        : to_vector({0.25, 0.15, 0.35, 0.45, 0.00}));
  }
  spec.validate();
  return spec;
}

std::vector<ScenarioSpec> expand_spec_grid(int scenario) {
  std::vector<ScenarioSpec> grid;
  for (int n_o : {4, 5})
    for (Index judges : {Index{100}, Index{200}, Index{300}})
      for (EffectSize effect : {EffectSize::low, EffectSize::high})
        grid.push_back(make_scenario_spec(scenario, n_o, judges, effect));
  return grid;
}

Vector scenario_worths(const ScenarioSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  Vector worths = spec.lambda;
  for (Index p = 0; p < spec.beta.rows(); ++p) worths += x(p) * spec.beta.row(p).transpose();
  if (spec.scenario == 3 && x(0) > 0.0 && x(1) > 0.5) worths += spec.beta_interaction;
  return worths;
}

double pair_probability(double worth_i, double worth_j) {
  return logistic(2.0 * (worth_i - worth_j));
}

GeneratedPairs generate_pair_vectors(const ScenarioSpec& spec, Rng& rng) {
  spec.validate();
  const Index H = spec.judges;
  const Index P = spec.covariate_count();
  const int n_o = spec.n_objects;

  GeneratedPairs out;
  out.covariates.resize(H, P);
  out.pairs.reserve(static_cast<std::size_t>(H));

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Index h = 0; h < H; ++h) {
    for (Index p = 0; p < P; ++p) out.covariates(h, p) = normal(rng);
    const Vector worths = scenario_worths(spec, out.covariates.row(h));
    PairVector pv;
    pv.bits.resize(static_cast<std::size_t>(pair_count(n_o)));
    for (int i = 0; i < n_o; ++i)
      for (int j = i + 1; j < n_o; ++j) {
        const double pi = pair_probability(worths(i), worths(j));
        pv.bits[static_cast<std::size_t>(pair_index(i, j, n_o))] = uniform(rng) < pi ? 1 : 0;
      }
    out.pairs.push_back(std::move(pv));
  }
  return out;
}

RankingDataset generate_dataset(const ScenarioSpec& spec, Rng& rng) {
  GeneratedPairs sampled = generate_pair_vectors(spec, rng);

  RankingDataset data;
  data.n_objects = spec.n_objects;
  for (int i = 0; i < spec.n_objects; ++i)
    data.object_names.push_back(std::string(1, static_cast<char>('A' + i)));
  for (Index p = 0; p < spec.covariate_count(); ++p)
    data.covariate_names.push_back("x" + std::to_string(p + 1));
  data.covariates = std::move(sampled.covariates);
  data.rankings.reserve(sampled.pairs.size());
  for (const PairVector& pv : sampled.pairs)
    data.rankings.push_back(repair_to_nearest_ranking(pv, spec.n_objects, rng));
  return data;
}

StudyResult run_study(const ScenarioSpec& spec, const StudyConfig& config) {
  spec.validate();
  if (config.replications < 1) throw validation_error("run_study: need at least one replication");
  if (config.c_grid.empty()) throw validation_error("run_study: empty c grid");

  StudyResult result;
  result.spec = spec;
  result.config = config;
  result.replications.resize(static_cast<std::size_t>(config.replications));

  SeedStream master(config.seed);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(config.replications));
  for (auto& s : seeds) s = master.next();

  parallel_for(static_cast<std::size_t>(config.replications), config.threads, [&](std::size_t r) {
    ReplicationRecord& record = result.replications[r];
    record.seed = seeds[r];
    Rng rng = make_engine(seeds[r]);
    try {
      const RankingDataset data = generate_dataset(spec, rng);
      GrowConfig grow_config;
      grow_config.approach = SplitApproach::multiple_splitting;
      grow_config.max_terminal = config.max_terminal;
      grow_config.threads = 1;  // replications already run in parallel
      const TrunkSequence sequence = grow(data, grow_config);
      const PruningTable table = cv_table(data, sequence, config.folds, rng, 1);
      record.split_covariates = sequence.split_covariates();
      record.selected.reserve(config.c_grid.size());
      for (double c : config.c_grid) record.selected.push_back(select_size(table, c));
    } catch (const std::exception&) {
      record.failed = true;
    }
  });

  Index valid = 0;
  std::vector<Index> hits(config.c_grid.size(), 0);
  for (const ReplicationRecord& record : result.replications) {
    if (record.failed) {
      ++result.failures;
      continue;
    }
    ++valid;
    for (std::size_t ci = 0; ci < config.c_grid.size(); ++ci) {
      const Index selected = record.selected[ci];
      bool hit = false;
      if (spec.scenario == 3) {
        // power: the pruned trunk has exactly the two true interacting
        // covariates as its first and only splits
        if (selected == 2 && record.split_covariates.size() >= 2) {
          const std::set<Index> first_two{record.split_covariates[0],
                                          record.split_covariates[1]};
          hit = first_two == std::set<Index>{0, 1};
        }
      } else {
        hit = selected > 0;  // Type I error: any interaction term selected
      }
      if (hit) ++hits[ci];
    }
  }
  result.rates.resize(config.c_grid.size(), 0.0);
  for (std::size_t ci = 0; ci < config.c_grid.size(); ++ci)
    result.rates[ci] = valid == 0 ? 0.0 : static_cast<double>(hits[ci]) / static_cast<double>(valid);
  return result;
}

}  // namespace btrt
