#include "btrt/pruning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "btrt/errors.hpp"
#include "btrt/parallel.hpp"

namespace btrt {

namespace {

constexpr double kProbabilityClamp = 1e-12;

FitOptions tolerant_options() {
  FitOptions opt;
  opt.strict = false;
  return opt;
}

}  // namespace

std::vector<int> make_folds(Index judges, int folds, Rng& rng) {
  if (folds < 2) throw validation_error("cross-validation needs at least 2 folds");
  if (static_cast<Index>(folds) > judges)
    throw validation_error("more folds than judges (" + std::to_string(folds) + " > " +
                           std::to_string(judges) + ")");
  std::vector<Index> order(static_cast<std::size_t>(judges));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(static_cast<std::size_t>(judges));
  for (Index i = 0; i < judges; ++i)
    fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % folds);
  return fold_of;
}

PruningTable cv_table(const RankingDataset& data, const TrunkSequence& sequence, int folds,
                      Rng& rng, int threads) {
  data.validate();
  if (sequence.entries.empty()) throw validation_error("cv_table: empty trunk sequence");
  const Index H = data.judge_count();
  const std::vector<int> fold_of = make_folds(H, folds, rng);

  const std::size_t entry_count = sequence.entries.size();
  const Index blocks_per_judge = static_cast<Index>(pair_count(data.n_objects));
  const Index n_rows = 2 * H * blocks_per_judge;

  // held_out(e, b): fitted probability of block b under the fit that held
  // out b's judge, for sequence entry e. NaN marks a failed fold.
  std::vector<Vector> held_out(entry_count,
                               Vector::Constant(H * blocks_per_judge,
                                                std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::atomic<bool>> entry_failed(entry_count);

  struct Task {
    std::size_t entry;
    int fold;
  };
  std::vector<Task> tasks;
  tasks.reserve(entry_count * static_cast<std::size_t>(folds));
  for (std::size_t e = 0; e < entry_count; ++e)
    for (int v = 0; v < folds; ++v) tasks.push_back(Task{e, v});

  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task task = tasks[i];
    const RegionSet& regions = sequence.entries[task.entry].regions;

    std::vector<Index> train_judges;
    std::vector<Index> test_judges;
    for (Index h = 0; h < H; ++h) {
      if (fold_of[static_cast<std::size_t>(h)] == task.fold)
        test_judges.push_back(h);
      else
        train_judges.push_back(h);
    }
    if (test_judges.empty()) return;

    const RankingDataset train = data.subset(train_judges);
    GlmFit trained;
    try {
      trained = fit(build_design(train, regions), tolerant_options());
    } catch (const validation_error&) {
      entry_failed[task.entry].store(true);  // e.g. a region left empty by the fold
      return;
    }
    if (trained.separated || !trained.converged) {
      entry_failed[task.entry].store(true);
      return;
    }

    const RankingDataset test = data.subset(test_judges);
    const DesignMatrix test_design = build_design(test, regions);
    const Vector eta = 2.0 * (test_design.pair_rows * trained.coefficients);
    for (std::size_t j = 0; j < test_judges.size(); ++j) {
      for (Index q = 0; q < blocks_per_judge; ++q) {
        const Index local = static_cast<Index>(j) * blocks_per_judge + q;
        const Index global = test_judges[j] * blocks_per_judge + q;
        held_out[task.entry](global) = logistic(eta(local));
      }
    }
  });

  // full-data outcomes in the same block order
  const DesignMatrix base = build_design(data, sequence.entries.front().regions);

  PruningTable table;
  table.rows.reserve(entry_count);
  for (std::size_t e = 0; e < entry_count; ++e) {
    PruningRow row;
    row.model_index = static_cast<Index>(e);
    row.deviance = sequence.entries[e].deviance;
    if (!entry_failed[e].load() && !held_out[e].hasNaN()) {
      // case-wise deviance over the full 2-rows-per-block layout: the
      // observed row of block b contributes 2 log(1 / pi_hat), the y = 0
      // row contributes 0.
      double sum = 0.0;
      for (Index b = 0; b < held_out[e].size(); ++b) {
        double pi = held_out[e](b);
        if (base.outcomes(b) < 0.5) pi = 1.0 - pi;
        pi = std::clamp(pi, kProbabilityClamp, 1.0 - kProbabilityClamp);
        sum += -2.0 * std::log(pi);
      }
      const double n = static_cast<double>(n_rows);
      const double d_cv = sum / n;
      double sq = 0.0;
      for (Index b = 0; b < held_out[e].size(); ++b) {
        double pi = held_out[e](b);
        if (base.outcomes(b) < 0.5) pi = 1.0 - pi;
        pi = std::clamp(pi, kProbabilityClamp, 1.0 - kProbabilityClamp);
        const double observed_term = -2.0 * std::log(pi) - d_cv;
        const double complement_term = 0.0 - d_cv;
        sq += observed_term * observed_term + complement_term * complement_term;
      }
      row.cv_deviance = d_cv;
      row.cv_std_error = std::sqrt(sq / n) / n;
    }
    table.rows.push_back(row);
  }
  return table;
}

Index select_size(const PruningTable& table, double c) {
  std::optional<std::size_t> minimizer;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (!table.rows[i].cv_deviance) continue;
    if (!minimizer || *table.rows[i].cv_deviance < *table.rows[*minimizer].cv_deviance)
      minimizer = i;
  }
  if (!minimizer)
    throw selection_error("select_size: no sequence entry has a valid cross-validated deviance");
  const double threshold =
      *table.rows[*minimizer].cv_deviance + c * *table.rows[*minimizer].cv_std_error;
  for (std::size_t i = 0; i <= *minimizer; ++i) {
    if (!table.rows[i].cv_deviance) continue;
    if (*table.rows[i].cv_deviance <= threshold) return table.rows[i].model_index;
  }
  return table.rows[*minimizer].model_index;
}

}  // namespace btrt
