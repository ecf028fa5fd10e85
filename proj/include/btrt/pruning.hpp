#pragma once

#include <optional>
#include <vector>

#include "btrt/rng.hpp"
#include "btrt/trunk.hpp"

namespace btrt {

struct PruningRow {
  Index model_index = 0;               // position in the trunk sequence
  double deviance = 0.0;               // full-data model deviance
  std::optional<double> cv_deviance;   // case-wise CV deviance, missing if a fold failed
  std::optional<double> cv_std_error;
};

struct PruningTable {
  std::vector<PruningRow> rows;
};

/// Judge-blocked fold labels: judges are shuffled with the supplied engine
/// and dealt round-robin into `folds` groups, so all of a judge's design
/// rows travel together.
std::vector<int> make_folds(Index judges, int folds, Rng& rng);

/// V-fold cross-validation of every sequence entry. Each entry keeps the
/// region structure discovered on the full data; its coefficients are refit
/// per training fold and the held-out rows are scored with clamped fitted
/// probabilities. D_cv is the per-row average case-wise deviance; its
/// standard error is the per-row standard deviation of the case-wise terms
/// divided by the row count, which reproduces the magnitudes reported for
/// paired-comparison trunks (the per-row deviation spread is several orders
/// larger than the fold-to-fold noise of the mean).
PruningTable cv_table(const RankingDataset& data, const TrunkSequence& sequence, int folds,
                      Rng& rng, int threads = 1);

/// c * SE rule: with t* the index of the smallest valid cv deviance, returns
/// the smallest index whose cv deviance is within c * SE(t*) of it. Throws
/// selection_error when no entry has a valid cv deviance.
Index select_size(const PruningTable& table, double c);

}  // namespace btrt
