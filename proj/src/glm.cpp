#include "btrt/glm.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "btrt/errors.hpp"

namespace btrt {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

/// Binary deviance of the profiled model: 2 sum over blocks of
/// softplus(-eta_observed). Equals the full-layout Poisson deviance because
/// the complement rows have y = 0.
double block_deviance(const Vector& eta, const Vector& outcomes) {
  double dev = 0.0;
  for (Index b = 0; b < eta.size(); ++b) {
    const double sign = outcomes(b) > 0.5 ? 1.0 : -1.0;
    dev += 2.0 * softplus(-sign * eta(b));
  }
  return dev;
}

}  // namespace

double log_likelihood(const DesignMatrix& design, const Vector& coefficients) {
  // Up to the block-intercept constant the profiled log-likelihood is the
  // Bernoulli one; the profiled Poisson constant is -B log 2... kept exact:
  // l = sum_b [mu_b + |eta|... ] -- we report the Poisson log-likelihood with
  // mu at its conditional optimum, dropping log(y!) = 0 terms.
  const Vector eta = 2.0 * (design.pair_rows * coefficients);
  double ll = 0.0;
  for (Index b = 0; b < eta.size(); ++b) {
    const double sign = design.outcomes(b) > 0.5 ? 1.0 : -1.0;
    // y_obs log(m_obs) + y_comp log(m_comp) - (m_obs + m_comp)
    // with m_obs = pi, m_comp = 1 - pi at the profiled intercept.
    ll += -softplus(-sign * eta(b)) - 1.0;
  }
  return ll;
}

Vector score(const DesignMatrix& design, const Vector& coefficients) {
  const Vector eta = 2.0 * (design.pair_rows * coefficients);
  Vector g = Vector::Zero(coefficients.size());
  for (Index b = 0; b < eta.size(); ++b) {
    const double pi = logistic(eta(b));
    g += 2.0 * (design.outcomes(b) - pi) * design.pair_rows.row(b).transpose();
  }
  return g;
}

Vector GlmFit::full_fitted(const DesignMatrix& design) const {
  Vector out(design.row_count());
  for (Index b = 0; b < design.block_count(); ++b) {
    const double pi = fitted_pairs(b);
    const double observed = design.outcomes(b) > 0.5 ? pi : 1.0 - pi;
    out(2 * b) = observed;
    out(2 * b + 1) = 1.0 - observed;
  }
  return out;
}

GlmFit fit(const DesignMatrix& design, const FitOptions& options) {
  const Index B = design.block_count();
  const Index k = design.column_count();
  if (B == 0) throw validation_error("fit: empty design");

  for (Index c = 0; c < k; ++c) {
    if (design.pair_rows.col(c).isZero(0.0)) {
      if (options.strict)
        throw rank_deficiency_error(design.column_names[static_cast<std::size_t>(c)]);
      break;
    }
  }

  GlmFit result;
  result.coefficients = Vector::Zero(k);

  Vector eta = Vector::Zero(B);
  Vector pi = Vector::Constant(B, 0.5);
  double deviance = block_deviance(eta, design.outcomes);

  Matrix weighted(B, k);
  Vector rhs(B);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    // IRLS step on the predictor 2 x'theta: weighted least squares with
    // weights pi(1-pi) and working response eta + (y - pi) / (pi(1-pi)).
    for (Index b = 0; b < B; ++b) {
      const double w = std::max(pi(b) * (1.0 - pi(b)), 1e-10);
      const double sw = std::sqrt(w);
      weighted.row(b) = (2.0 * sw) * design.pair_rows.row(b);
      rhs(b) = sw * (eta(b) + (design.outcomes(b) - pi(b)) / w);
    }

    Eigen::ColPivHouseholderQR<Matrix> qr(weighted);
    const Index rank = qr.rank();
    if (rank < k) {
      result.rank_deficient = true;
      if (options.strict) {
        const Index dependent = qr.colsPermutation().indices()(rank);
        throw rank_deficiency_error(design.column_names[static_cast<std::size_t>(dependent)]);
      }
    }
    Vector proposal = qr.solve(rhs);

    // step-halve if the proposal worsens the deviance
    Vector eta_new = 2.0 * (design.pair_rows * proposal);
    double dev_new = block_deviance(eta_new, design.outcomes);
    for (int halving = 0; halving < 20 && dev_new > deviance + 1e-9; ++halving) {
      proposal = 0.5 * (proposal + result.coefficients);
      eta_new = 2.0 * (design.pair_rows * proposal);
      dev_new = block_deviance(eta_new, design.outcomes);
    }

    result.coefficients = proposal;
    eta = eta_new;
    for (Index b = 0; b < B; ++b) pi(b) = logistic(eta(b));

    Index worst = 0;
    const double max_abs = result.coefficients.cwiseAbs().maxCoeff(&worst);
    if (max_abs > options.coefficient_cap) {
      result.separated = true;
      result.deviance = dev_new;
      result.fitted_pairs = pi;
      if (options.strict)
        throw separation_error(design.column_names[static_cast<std::size_t>(worst)],
                               result.coefficients(worst));
      return result;
    }

    const bool done = std::abs(deviance - dev_new) < options.tolerance * (0.1 + std::abs(dev_new));
    deviance = dev_new;
    if (done) {
      result.converged = true;
      break;
    }
  }

  result.deviance = deviance;
  result.fitted_pairs = pi;

  // profiled block intercepts: exp(mu) (exp(eta/...)+...) — the two block
  // means are pi and 1-pi, so mu = log(pi) - eta_obs/2 ... kept in the
  // symmetric form mu_b = -log(exp(s) + exp(-s)) with s = eta_b / 2.
  result.block_intercepts.resize(B);
  for (Index b = 0; b < B; ++b) {
    const double s = eta(b) / 2.0;
    const double a = std::abs(s);
    result.block_intercepts(b) = -(a + std::log1p(std::exp(-2.0 * a)));
  }

  // observed information of the profiled likelihood: 4 X' W X
  Matrix info = Matrix::Zero(k, k);
  for (Index b = 0; b < B; ++b) {
    const double w = 4.0 * pi(b) * (1.0 - pi(b));
    info.selfadjointView<Eigen::Lower>().rankUpdate(design.pair_rows.row(b).transpose(), w);
  }
  info = info.selfadjointView<Eigen::Lower>();
  result.std_errors = Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() == Eigen::Success) {
    const Matrix cov = ldlt.solve(Matrix::Identity(k, k));
    for (Index c = 0; c < k; ++c) {
      const double v = cov(c, c);
      if (v > 0.0 && std::isfinite(v)) result.std_errors(c) = std::sqrt(v);
    }
  }
  return result;
}

double poisson_deviance(const Vector& observed, const Vector& fitted) {
  if (observed.size() != fitted.size())
    throw validation_error("deviance: observed and fitted vectors differ in length");
  double dev = 0.0;
  for (Index r = 0; r < observed.size(); ++r) {
    if (!(fitted(r) > 0.0))
      throw numerical_error("deviance: non-positive fitted value at row " + std::to_string(r + 1));
    const double y = observed(r);
    if (y != 0.0) dev += 2.0 * y * std::log(y / fitted(r));
  }
  return dev;
}

std::vector<WaldRow> wald_table(const GlmFit& fit, const DesignMatrix& design) {
  if (!fit.converged)
    throw numerical_error("wald table: fit did not converge; refusing to report tests");
  std::vector<WaldRow> rows;
  rows.reserve(static_cast<std::size_t>(design.column_count()));
  for (Index c = 0; c < design.column_count(); ++c) {
    WaldRow row;
    row.name = design.column_names[static_cast<std::size_t>(c)];
    row.estimate = fit.coefficients(c);
    row.std_error = fit.std_errors(c);
    if (std::isfinite(row.std_error) && row.std_error > 0.0) {
      const double z = std::abs(row.estimate) / row.std_error;
      row.p_value = std::erfc(z / std::sqrt(2.0));
    } else {
      row.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    if (row.p_value < 0.001)
      row.stars = "***";
    else if (row.p_value < 0.01)
      row.stars = "**";
    else if (row.p_value < 0.05)
      row.stars = "*";
    rows.push_back(std::move(row));
  }
  return rows;
}

double BtrtModel::worth(Index object, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        Index region) const {
  const Index contrasts = static_cast<Index>(n_objects()) - 1;
  if (object >= contrasts) return 0.0;  // reference object
  double value = lambda(object);
  for (Index p = 0; p < beta_main.cols(); ++p) value += beta_main(object, p) * x(p);
  if (region >= 1) value += beta_region(object, region - 1);
  return value;
}

Vector BtrtModel::pair_probabilities(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                     Index region) const {
  const int n_o = n_objects();
  Vector probs(pair_count(n_o));
  for (int i = 0; i < n_o; ++i)
    for (int j = i + 1; j < n_o; ++j)
      probs(pair_index(i, j, n_o)) = logistic(2.0 * (worth(i, x, region) - worth(j, x, region)));
  return probs;
}

Ranking BtrtModel::modal_ranking(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 Index region) const {
  const int n_o = n_objects();
  std::vector<int> order(static_cast<std::size_t>(n_o));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> worths(static_cast<std::size_t>(n_o));
  for (int i = 0; i < n_o; ++i) worths[static_cast<std::size_t>(i)] = worth(i, x, region);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return worths[static_cast<std::size_t>(a)] > worths[static_cast<std::size_t>(b)];
  });
  Ranking out;
  out.ranks.resize(static_cast<std::size_t>(n_o));
  for (int r = 0; r < n_o; ++r) out.ranks[static_cast<std::size_t>(order[r])] = r + 1;
  return out;
}

BtrtModel make_btrt_model(const RankingDataset& data, const RegionSet& regions,
                          const DesignMatrix& design, const GlmFit& fit) {
  BtrtModel model;
  model.object_names = data.object_names;
  model.covariate_names = data.covariate_names;
  model.regions = regions.regions.empty() ? RegionSet::root_only() : regions;
  model.deviance = fit.deviance;
  model.std_errors = fit.std_errors;
  model.converged = fit.converged;

  const Index contrasts = design.n_objects - 1;
  const Index P = design.covariates;
  const Index T = design.regions;
  model.lambda.resize(contrasts);
  model.beta_main.resize(contrasts, P);
  model.beta_region.resize(contrasts, T - 1);
  for (Index i = 0; i < contrasts; ++i) {
    model.lambda(i) = fit.coefficients(design.lambda_col(i));
    for (Index p = 0; p < P; ++p) model.beta_main(i, p) = fit.coefficients(design.beta_col(p, i));
    for (Index t = 1; t < T; ++t)
      model.beta_region(i, t - 1) = fit.coefficients(design.region_col(t, i));
  }
  return model;
}

void label_node_consensus(BtrtModel& model, const RankingDataset& data) {
  const std::vector<Index> region = assign_regions(data, model.regions);
  model.node_consensus.clear();
  for (Index t = 0; t < model.region_count(); ++t) {
    std::vector<Ranking> members;
    for (Index h = 0; h < data.judge_count(); ++h)
      if (region[static_cast<std::size_t>(h)] == t)
        members.push_back(data.rankings[static_cast<std::size_t>(h)]);
    if (members.empty()) {
      model.node_consensus.push_back(ConsensusResult{Ranking(std::vector<int>(
                                         static_cast<std::size_t>(data.n_objects), 1)),
                                     0.0});
    } else {
      model.node_consensus.push_back(kemeny_consensus(members));
    }
  }
}

}  // namespace btrt
