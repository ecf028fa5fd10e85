#include <algorithm>
#include <cmath>

#include "btrt/io.hpp"

namespace btrt {

namespace {

double clamp_round(double v, double lo, double hi, double step) {
  v = std::clamp(v, lo, hi);
  return std::round(v / step) * step;
}

}  // namespace

RankingDataset make_survey_fixture(Index judges, std::uint64_t seed) {
  const int n_o = 5;
  RankingDataset data;
  data.n_objects = n_o;
  data.object_names = {"clarity", "materials", "midterms", "slides", "helpfulness"};
  data.covariate_names = {"year", "credits", "grade_avg", "attendance",
                          "study_hours", "gender", "age"};
  const Index P = static_cast<Index>(data.covariate_names.size());
  data.covariates.resize(judges, P);

  Rng rng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  // planted structure: moderate main effects plus one threshold interaction
  // on (grade_avg <= 27.5, age <= 25)
  const Vector lambda = (Vector(n_o) << 0.9, 0.5, 0.3, 0.1, 0.0).finished();
  Matrix beta(P, n_o);
  beta << -0.50, -0.30, -0.20, -0.35, 0.0,   // year
      0.012, 0.008, 0.005, 0.009, 0.0,       // credits
      -0.020, -0.015, 0.000, 0.020, 0.0,     // grade_avg
      -0.004, -0.008, -0.006, -0.004, 0.0,   // attendance
      -0.010, -0.030, -0.060, -0.040, 0.0,   // study_hours
      0.200, 0.170, 0.180, 0.190, 0.0,       // gender
      0.060, 0.010, 0.005, 0.050, 0.0;       // age
  const Vector interaction = (Vector(n_o) << -0.45, -0.20, -0.10, 0.25, 0.0).finished();

  for (Index h = 0; h < judges; ++h) {
    data.covariates(h, 0) = uniform(rng) < 0.18 ? 2.0 : 1.0;
    data.covariates(h, 1) = clamp_round(std::exp(3.1 + 1.0 * normal(rng)), 0.0, 163.0, 1.0);
    data.covariates(h, 2) = clamp_round(30.0 - std::exp(1.4 + 0.8 * normal(rng)), 0.0, 30.0, 0.1);
    data.covariates(h, 3) = clamp_round(90.0 + 13.0 * normal(rng), 40.0, 100.0, 1.0);
    data.covariates(h, 4) = clamp_round(3.7 + 1.6 * normal(rng), 0.25, 8.0, 0.25);
    data.covariates(h, 5) = uniform(rng) < 0.44 ? 2.0 : 1.0;
    data.covariates(h, 6) = clamp_round(19.0 + std::exp(0.5 + 0.9 * normal(rng)), 19.0, 41.0, 1.0);
  }

  for (Index h = 0; h < judges; ++h) {
    Vector worths = lambda;
    for (Index p = 0; p < P; ++p) worths += data.covariates(h, p) * beta.row(p).transpose();
    if (data.covariates(h, 2) <= 27.5 && data.covariates(h, 6) <= 25.0) worths += interaction;

    PairVector pv;
    pv.bits.resize(static_cast<std::size_t>(pair_count(n_o)));
    for (int i = 0; i < n_o; ++i)
      for (int j = i + 1; j < n_o; ++j) {
        const double pi = logistic(2.0 * (worths(i) - worths(j)));
        pv.bits[static_cast<std::size_t>(pair_index(i, j, n_o))] = uniform(rng) < pi ? 1 : 0;
      }
    data.rankings.push_back(repair_to_nearest_ranking(pv, n_o, rng));
  }
  return data;
}

}  // namespace btrt
