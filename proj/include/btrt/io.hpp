#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "btrt/pruning.hpp"
#include "btrt/simulation.hpp"
#include "btrt/trunk.hpp"

namespace btrt {

/// Shortest round-trip decimal rendering; parsing the result recovers the
/// exact double, which keeps artifacts byte-stable and lossless.
std::string format_double(double value);

/// Reads a rankings CSV: one row per judge. Rank columns are either the
/// columns whose header carries a "rank:" prefix (the object name follows
/// the prefix) or, when `rank_columns` is given, exactly those headers.
/// Every remaining column is a numeric covariate. Errors name the offending
/// row and column.
RankingDataset read_rankings_csv(std::istream& in,
                                 const std::vector<std::string>& rank_columns = {});

/// Covariate-only CSV for prediction. Columns are matched to
/// `covariate_names` by header (any order, exact set); returns rows in
/// model column order.
Matrix read_covariates_csv(std::istream& in, const std::vector<std::string>& covariate_names);

void write_dataset_csv(std::ostream& os, const RankingDataset& data);

/// Full Poisson layout dump: response, 1-based block id, then the signed
/// design columns, two rows per judge-pair block (observed row first).
void write_design_csv(std::ostream& os, const DesignMatrix& design);

/// Table layout: model,D,Dcv,SEcv with one row per sequence entry.
void write_pruning_csv(std::ostream& os, const PruningTable& table);

/// Study export: commented header carrying the master seed and
/// configuration, then one row per c value.
void write_study_csv(std::ostream& os, const StudyResult& result);

/// Everything needed to reload and apply a fitted model, plus the fitting
/// provenance (pruning table, split log, configuration echo).
struct ModelArtifact {
  BtrtModel model;
  std::string approach;  // "oso" or "ms"
  double c = 0.0;
  int folds = 10;
  std::uint64_t seed = 0;
  Index max_terminal = 5;
  Index selected_index = 0;
  PruningTable pruning;
  std::vector<SplitRecord> splits;      // grown sequence splits, in order
  std::vector<double> split_deviances;  // deviance per sequence entry
  std::vector<Index> region_judge_counts;
};

void write_model_json(std::ostream& os, const ModelArtifact& artifact);
ModelArtifact read_model_json(std::istream& in);

/// Synthetic teaching-survey demo dataset: 100-judge scale rankings of five
/// course attributes with seven subject covariates (year, credits, grade
/// average, attendance, study hours, gender, age). Deterministic in the
/// seed; preferences follow a planted main-effects + threshold-interaction
/// structure so the fitting walkthrough has something to find.
RankingDataset make_survey_fixture(Index judges, std::uint64_t seed);

}  // namespace btrt
