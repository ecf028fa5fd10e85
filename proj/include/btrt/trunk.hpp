#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "btrt/glm.hpp"

namespace btrt {

enum class SplitApproach {
  one_split_only,     // each covariate may split at most once in the trunk
  multiple_splitting  // covariates may be reused
};

struct TrunkNode {
  int id = 1;          // heap numbering: root 1, children of k are 2k, 2k+1
  int parent = 0;      // 0 for the root
  int depth = 0;
  std::vector<Index> judges;
  std::optional<SplitCondition> split;  // condition sending a judge LEFT
  int left = 0;
  int right = 0;
  int created_at_step = 0;  // sequence entry index that created this node
  bool is_terminal() const { return left == 0; }
};

struct SplitRecord {
  int node_id = 0;
  Index covariate = 0;
  double threshold = 0.0;
};

/// One model of the grown sequence: entry 0 is the root (main effects only)
/// model, entry s adds the s-th split. Regions are the terminal nodes after
/// the entry's split, sorted by node id; the first is the reference.
struct TrunkEntry {
  std::optional<SplitRecord> split;
  RegionSet regions;
  BtrtModel model;
  double deviance = 0.0;
};

struct TrunkSequence {
  SplitApproach approach = SplitApproach::multiple_splitting;
  std::vector<TrunkEntry> entries;
  std::vector<TrunkNode> nodes;  // the full grown tree

  Index size() const { return static_cast<Index>(entries.size()); }
  /// Non-root entries' split covariates, in growth order.
  std::vector<Index> split_covariates() const;
};

struct GrowConfig {
  SplitApproach approach = SplitApproach::multiple_splitting;
  Index max_terminal = 5;  // T: stop once this many terminal nodes exist
  int threads = 1;
};

/// Sorted unique candidate split points of a covariate sample, excluding the
/// maximum (a split there would leave an empty right child).
std::vector<double> candidate_thresholds(const std::vector<double>& values);

/// Admissibility of a candidate split: both children must hold at least
/// ceil(sqrt(parent)) judges and the parent more than 4.
bool stopping_rule(Index parent_size, Index left_size, Index right_size);

/// Deviance of the full refit with `region_index` of `current` replaced by
/// its two children at (covariate, threshold). Returns nullopt when the
/// refit is infeasible (separation or non-convergence).
std::optional<double> evaluate_split(const RankingDataset& data, const RegionSet& current,
                                     Index region_index, Index covariate, double threshold);

/// Grows the trunk: at every step evaluates all admissible (node, covariate,
/// threshold) candidates over the current terminal nodes by full refit and
/// keeps the one with the smallest deviance (ties: lowest covariate, then
/// threshold, then node id). Stops at max_terminal terminals or when no
/// admissible candidate remains.
TrunkSequence grow(const RankingDataset& data, const GrowConfig& config);

/// Region set of a sequence entry rebuilt from the tree (terminal nodes at
/// that step, sorted by id).
RegionSet regions_at_step(const TrunkSequence& sequence, Index step);

/// Graphviz rendering of the trunk at one sequence entry. Node labels carry
/// the consensus ranking, judge count, and mean tau_x; edges carry the split
/// conditions; terminal nodes carry their region number.
void write_dot(std::ostream& os, const TrunkSequence& sequence, Index step,
               const RankingDataset& data);

}  // namespace btrt
