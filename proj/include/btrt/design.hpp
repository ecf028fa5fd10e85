#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "btrt/rankings.hpp"

namespace btrt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// H judges' strict rankings over the same objects plus an H x P matrix of
/// subject-specific covariates. Binary categoricals enter as numeric columns.
struct RankingDataset {
  int n_objects = 0;
  std::vector<std::string> object_names;
  std::vector<Ranking> rankings;          // length H
  Matrix covariates;                      // H x P
  std::vector<std::string> covariate_names;

  Index judge_count() const { return static_cast<Index>(rankings.size()); }
  Index covariate_count() const { return covariates.cols(); }

  /// Throws validation_error on the first malformed row/column, naming it.
  void validate() const;

  /// Copy of the rows selected by `judges` (used for CV fold refits).
  RankingDataset subset(const std::vector<Index>& judges) const;
};

/// One threshold condition on a covariate: x <= threshold (left side) or
/// x > threshold (right side).
struct SplitCondition {
  Index covariate = 0;
  bool upper = false;  // false: x <= threshold, true: x > threshold
  double threshold = 0.0;
};

/// A terminal region: the conjunction of the split conditions along its
/// path. node_id carries the heap-style trunk node number (root = 1,
/// children of k are 2k and 2k+1); 0 for hand-built sets.
struct Region {
  std::vector<SplitCondition> conditions;
  int node_id = 0;
};

bool region_contains(const Region& region, const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// Ordered terminal regions; regions[0] is the reference and generates no
/// design columns. Together the regions must partition the covariate space.
struct RegionSet {
  std::vector<Region> regions;

  RegionSet() = default;
  explicit RegionSet(std::vector<Region> r) : regions(std::move(r)) {}

  Index size() const { return static_cast<Index>(regions.size()); }

  /// A single match-all reference region (root-only trunk, T = 1).
  static RegionSet root_only();
};

/// Region index (0-based, 0 = reference) of every judge. Throws
/// validation_error if some judge matches zero or more than one region.
std::vector<Index> assign_regions(const RankingDataset& data, const RegionSet& regions);

/// Log-linear Bradley-Terry design over H judges. The full Poisson layout
/// has n = n_o (n_o - 1) H rows: per judge and pair, the observed-preference
/// row first (response 1, +1 on the preferred object, -1 on the other) and
/// its exact negation second (response 0). Column groups: n_o - 1 object
/// contrasts (last object is the reference and is dropped), (n_o - 1) P
/// covariate-object products, and (n_o - 1)(T - 1) region-object products.
///
/// Internally only one compact row per block is stored, oriented "i
/// preferred to j" for i < j, together with the 0/1 outcome; the two Poisson
/// rows of a block are +/- that vector.
struct DesignMatrix {
  int n_objects = 0;
  Index judges = 0;
  Index covariates = 0;
  Index regions = 1;  // T (including the reference)

  Matrix pair_rows;   // B x k, B = H * C(n_o, 2)
  Vector outcomes;    // B entries in {0,1}: 1 iff lexicographic i preferred
  std::vector<std::string> column_names;
  std::vector<Index> region_of_judge;  // length H

  Index block_count() const { return pair_rows.rows(); }
  Index row_count() const { return 2 * pair_rows.rows(); }
  Index column_count() const { return pair_rows.cols(); }
  Index pairs_per_judge() const { return static_cast<Index>(pair_count(n_objects)); }

  // column layout: [lambda | beta by covariate | region by region index]
  Index lambda_col(Index object) const { return object; }
  Index beta_col(Index covariate, Index object) const {
    return (n_objects - 1) * (1 + covariate) + object;
  }
  Index region_col(Index region, Index object) const {
    return (n_objects - 1) * (1 + covariates + (region - 1)) + object;
  }

  Index judge_of_block(Index block) const { return block / pairs_per_judge(); }
  /// Lexicographic pair (i, j) of a block.
  std::pair<int, int> pair_of_block(Index block) const;

  /// Full Poisson layout: response, 1-based block id, and the signed design
  /// columns, two rows per block in Table-style order (observed row first).
  struct FullRow {
    double response;
    Index block_id;  // 1-based
    Eigen::RowVectorXd columns;
  };
  std::vector<FullRow> full_rows() const;
};

/// Builds the design for the given dataset and region set; pass
/// RegionSet::root_only() (or an empty set) for the main-effects layout.
DesignMatrix build_design(const RankingDataset& data, const RegionSet& regions);

}  // namespace btrt
