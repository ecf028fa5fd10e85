#include "btrt/design.hpp"

#include <cmath>
#include <string>

#include "btrt/errors.hpp"

namespace btrt {

void RankingDataset::validate() const {
  if (n_objects < 2) throw validation_error("dataset: need at least 2 objects");
  if (rankings.empty()) throw validation_error("dataset: no judges");
  if (static_cast<int>(object_names.size()) != n_objects)
    throw validation_error("dataset: object name count does not match n_objects");
  if (covariates.rows() != judge_count())
    throw validation_error("dataset: covariate row count " + std::to_string(covariates.rows()) +
                           " does not match judge count " + std::to_string(judge_count()));
  if (static_cast<Index>(covariate_names.size()) != covariates.cols())
    throw validation_error("dataset: covariate name count does not match covariate columns");
  for (std::size_t h = 0; h < rankings.size(); ++h) {
    if (rankings[h].object_count() != n_objects)
      throw validation_error("judge " + std::to_string(h + 1) + ": ranking has " +
                             std::to_string(rankings[h].object_count()) + " entries, expected " +
                             std::to_string(n_objects));
    if (!is_strict_ranking(rankings[h]))
      throw validation_error("judge " + std::to_string(h + 1) +
                             ": ranks are not a permutation of 1.." + std::to_string(n_objects));
  }
  for (Index h = 0; h < covariates.rows(); ++h)
    for (Index p = 0; p < covariates.cols(); ++p)
      if (!std::isfinite(covariates(h, p)))
        throw validation_error("judge " + std::to_string(h + 1) + ": covariate '" +
                               covariate_names[static_cast<std::size_t>(p)] +
                               "' is missing or not finite");
}

RankingDataset RankingDataset::subset(const std::vector<Index>& judges) const {
  RankingDataset out;
  out.n_objects = n_objects;
  out.object_names = object_names;
  out.covariate_names = covariate_names;
  out.rankings.reserve(judges.size());
  out.covariates.resize(static_cast<Index>(judges.size()), covariates.cols());
  Index row = 0;
  for (Index h : judges) {
    out.rankings.push_back(rankings[static_cast<std::size_t>(h)]);
    out.covariates.row(row++) = covariates.row(h);
  }
  return out;
}

bool region_contains(const Region& region, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  for (const SplitCondition& c : region.conditions) {
    const double v = x(c.covariate);
    if (c.upper ? !(v > c.threshold) : !(v <= c.threshold)) return false;
  }
  return true;
}

RegionSet RegionSet::root_only() {
  RegionSet set;
  set.regions.push_back(Region{{}, 1});
  return set;
}

std::vector<Index> assign_regions(const RankingDataset& data, const RegionSet& regions) {
  if (regions.regions.empty()) throw validation_error("region set: empty");
  std::vector<Index> out(static_cast<std::size_t>(data.judge_count()), -1);
  for (Index h = 0; h < data.judge_count(); ++h) {
    Index match = -1;
    for (Index t = 0; t < regions.size(); ++t) {
      if (region_contains(regions.regions[static_cast<std::size_t>(t)], data.covariates.row(h))) {
        if (match >= 0)
          throw validation_error("region set is not a partition: judge " + std::to_string(h + 1) +
                                 " matches regions " + std::to_string(match + 1) + " and " +
                                 std::to_string(t + 1));
        match = t;
      }
    }
    if (match < 0)
      throw validation_error("region set is not a partition: judge " + std::to_string(h + 1) +
                             " matches no region");
    out[static_cast<std::size_t>(h)] = match;
  }
  return out;
}

std::pair<int, int> DesignMatrix::pair_of_block(Index block) const {
  Index q = block % pairs_per_judge();
  for (int i = 0; i < n_objects; ++i) {
    const Index row_pairs = n_objects - 1 - i;
    if (q < row_pairs) return {i, i + 1 + static_cast<int>(q)};
    q -= row_pairs;
  }
  return {0, 0};  // unreachable
}

std::vector<DesignMatrix::FullRow> DesignMatrix::full_rows() const {
  std::vector<FullRow> rows;
  rows.reserve(static_cast<std::size_t>(row_count()));
  for (Index b = 0; b < block_count(); ++b) {
    const double sign = outcomes(b) > 0.5 ? 1.0 : -1.0;
    FullRow observed{1.0, b + 1, sign * pair_rows.row(b)};
    FullRow complement{0.0, b + 1, -sign * pair_rows.row(b)};
    rows.push_back(std::move(observed));
    rows.push_back(std::move(complement));
  }
  return rows;
}

DesignMatrix build_design(const RankingDataset& data, const RegionSet& regions) {
  data.validate();
  const RegionSet& set = regions.regions.empty() ? RegionSet::root_only() : regions;

  DesignMatrix design;
  design.n_objects = data.n_objects;
  design.judges = data.judge_count();
  design.covariates = data.covariate_count();
  design.regions = set.size();
  design.region_of_judge = assign_regions(data, set);

  const int n_o = data.n_objects;
  const Index contrasts = n_o - 1;
  const Index P = design.covariates;
  const Index T = design.regions;
  const Index k = contrasts * (1 + P + (T - 1));
  const Index B = design.judges * pair_count(n_o);

  design.pair_rows = Matrix::Zero(B, k);
  design.outcomes = Vector::Zero(B);

  design.column_names.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < contrasts; ++i)
    design.column_names.push_back("lambda(" + data.object_names[static_cast<std::size_t>(i)] + ")");
  for (Index p = 0; p < P; ++p)
    for (Index i = 0; i < contrasts; ++i)
      design.column_names.push_back("beta(" + data.object_names[static_cast<std::size_t>(i)] + "," +
                                    data.covariate_names[static_cast<std::size_t>(p)] + ")");
  for (Index t = 1; t < T; ++t)
    for (Index i = 0; i < contrasts; ++i)
      design.column_names.push_back("region(" + data.object_names[static_cast<std::size_t>(i)] +
                                    ",R" + std::to_string(t + 1) + ")");

  // Adds the signed contribution of one object to a compact row: the object
  // contrast, its covariate products, and its region indicator products.
  auto add_object = [&](Index b, int object, double sign, Index judge) {
    if (object == n_o - 1) return;  // reference object, structurally zero
    design.pair_rows(b, design.lambda_col(object)) += sign;
    for (Index p = 0; p < P; ++p)
      design.pair_rows(b, design.beta_col(p, object)) += sign * data.covariates(judge, p);
    const Index t = design.region_of_judge[static_cast<std::size_t>(judge)];
    if (t >= 1) design.pair_rows(b, design.region_col(t, object)) += sign;
  };

  Index b = 0;
  for (Index h = 0; h < design.judges; ++h) {
    const Ranking& r = data.rankings[static_cast<std::size_t>(h)];
    for (int i = 0; i < n_o; ++i) {
      for (int j = i + 1; j < n_o; ++j, ++b) {
        add_object(b, i, +1.0, h);
        add_object(b, j, -1.0, h);
        design.outcomes(b) = r.ranks[i] < r.ranks[j] ? 1.0 : 0.0;
      }
    }
  }
  return design;
}

}  // namespace btrt
