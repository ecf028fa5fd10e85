#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btrt/design.hpp"

namespace btrt {

struct FitOptions {
  /// Strict fits throw on separation and rank deficiency (user-facing
  /// models); tolerant fits flag them instead so split search and CV can
  /// skip infeasible candidates.
  bool strict = true;
  double tolerance = 1e-8;   // relative deviance change
  int max_iterations = 100;
  double coefficient_cap = 15.0;  // log-odds scale separation guard
};

/// Result of fitting the Poisson log-linear model on a DesignMatrix. The
/// per-block nuisance intercepts are profiled out: with two rows per block
/// whose responses sum to one, the Poisson likelihood with free block
/// intercepts reduces to a Bernoulli likelihood with linear predictor
/// 2 (lambda_i,h - lambda_j,h), and both routes give identical coefficient
/// estimates, deviance, and standard errors.
struct GlmFit {
  Vector coefficients;       // one per design column
  Vector block_intercepts;   // profiled mu per block
  Vector fitted_pairs;       // per block: P(lexicographic i preferred)
  double deviance = 0.0;
  Vector std_errors;
  bool converged = false;
  int iterations = 0;
  bool rank_deficient = false;
  bool separated = false;    // tolerant mode only; strict mode throws

  /// Fitted Poisson means for the full 2-rows-per-block layout, observed
  /// row first; the two entries of every block sum to one.
  Vector full_fitted(const DesignMatrix& design) const;
};

GlmFit fit(const DesignMatrix& design, const FitOptions& options = {});

/// Poisson deviance D = 2 sum y log(y / yhat), with 0 log 0 = 0.
/// Throws on non-positive fitted values.
double poisson_deviance(const Vector& observed, const Vector& fitted);

/// Profiled log-likelihood at arbitrary coefficients (block intercepts at
/// their conditional optimum).
double log_likelihood(const DesignMatrix& design, const Vector& coefficients);

/// Analytic score at arbitrary coefficients; equals the full-layout
/// column-wise sum of column * (y - yhat).
Vector score(const DesignMatrix& design, const Vector& coefficients);

struct WaldRow {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double p_value = 1.0;
  std::string stars;  // "***" < 0.001, "**" < 0.01, "*" < 0.05
};

/// Normal-approximation two-sided tests for every design column. Refuses
/// non-converged fits.
std::vector<WaldRow> wald_table(const GlmFit& fit, const DesignMatrix& design);

/// A fitted Bradley-Terry regression trunk model: object worths in the
/// reference region, covariate main effects, and per-region interaction
/// shifts. The reference object's coefficients are structural zeros; the
/// estimated intercept of terminal region t for object i is
/// lambda(i) + beta_region(i, t).
struct BtrtModel {
  std::vector<std::string> object_names;
  std::vector<std::string> covariate_names;
  Vector lambda;        // n_o - 1
  Matrix beta_main;     // (n_o - 1) x P
  Matrix beta_region;   // (n_o - 1) x (T - 1)
  RegionSet regions;
  double deviance = 0.0;
  Vector std_errors;    // aligned with the design columns
  bool converged = false;
  std::vector<ConsensusResult> node_consensus;  // per region; filled on demand

  int n_objects() const { return static_cast<int>(object_names.size()); }
  Index region_count() const { return regions.size(); }

  /// lambda_i,h for a judge with covariate row x in the given region
  /// (0 = reference). The reference object returns 0.
  double worth(Index object, const Eigen::Ref<const Eigen::RowVectorXd>& x, Index region) const;

  /// All C(n_o, 2) pairwise preference probabilities, lexicographic order:
  /// entry (i, j) is P(i preferred to j) = logistic(2 (worth_i - worth_j)).
  Vector pair_probabilities(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index region) const;

  /// Modal ranking: objects ordered by decreasing worth (object index
  /// breaks exact ties).
  Ranking modal_ranking(const Eigen::Ref<const Eigen::RowVectorXd>& x, Index region) const;
};

/// Assembles a BtrtModel from a fitted design. Consensus labels are not
/// computed here; use label_node_consensus.
BtrtModel make_btrt_model(const RankingDataset& data, const RegionSet& regions,
                          const DesignMatrix& design, const GlmFit& fit);

/// Computes the exact consensus ranking and mean tau_x of each region's
/// judges and stores them on the model.
void label_node_consensus(BtrtModel& model, const RankingDataset& data);

double logistic(double x);

}  // namespace btrt
