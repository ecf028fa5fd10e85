#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "btrt/errors.hpp"
#include "btrt/glm.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

using namespace btrt;
using namespace btrt::testing;

TEST_CASE("balanced data fits all-zero worths at the null deviance") {
  // two judges with exactly opposite rankings: every pair is won once in
  // each direction
  const RankingDataset data = make_dataset(3, {{1, 2, 3}, {3, 2, 1}});
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const GlmFit result = fit(design);
  CHECK(result.converged);
  CHECK(result.coefficients.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
  const double null_deviance = 2.0 * 6.0 * std::log(2.0);  // 6 blocks at pi = 1/2
  CHECK(result.deviance == doctest::Approx(null_deviance));
  for (Index b = 0; b < design.block_count(); ++b)
    CHECK(result.fitted_pairs(b) == doctest::Approx(0.5));
}

TEST_CASE("a single deterministic judge separates") {
  const RankingDataset data = make_dataset(3, {{2, 1, 3}});  // B > A > C
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  CHECK_THROWS_AS(fit(design), separation_error);

  FitOptions tolerant;
  tolerant.strict = false;
  const GlmFit result = fit(design, tolerant);
  CHECK(result.separated);
}

TEST_CASE("separation error names the diverging column") {
  const RankingDataset data = make_dataset(3, {{2, 1, 3}});
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  try {
    fit(design);
    FAIL("expected separation");
  } catch (const separation_error& e) {
    CHECK(std::string(e.what()).find("lambda(") != std::string::npos);
  }
}

TEST_CASE("duplicated covariate raises a rank-deficiency error naming the column") {
  RankingDataset data = random_fixture(3, 40, 1, 31);
  Matrix doubled(data.covariates.rows(), 2);
  doubled.col(0) = data.covariates.col(0);
  doubled.col(1) = data.covariates.col(0);
  data.covariates = doubled;
  data.covariate_names = {"x1", "x1_copy"};
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  CHECK_THROWS_AS(fit(design), rank_deficiency_error);

  FitOptions tolerant;
  tolerant.strict = false;
  const GlmFit result = fit(design, tolerant);
  CHECK(result.rank_deficient);
  CHECK(result.converged);
}

TEST_CASE("fit matches the independent full-Poisson Newton oracle") {
  for (std::uint64_t seed : {101, 102}) {
    const RankingDataset data = random_fixture(4, 60, 2, seed);
    const DesignMatrix design = build_design(data, RegionSet::root_only());
    const GlmFit mine = fit(design);
    const OracleFit oracle = oracle_fit(design);
    REQUIRE(mine.converged);
    REQUIRE(oracle.converged);
    CHECK(close(mine.deviance, oracle.deviance, 1e-8));
    for (Index c = 0; c < design.column_count(); ++c) {
      CHECK(close(mine.coefficients(c), oracle.coefficients(c), 1e-6));
      CHECK(close(mine.std_errors(c), oracle.std_errors(c), 1e-6));
    }
  }
}

TEST_CASE("oracle agreement extends to region columns") {
  const RankingDataset data = random_fixture(4, 50, 2, 301);
  const DesignMatrix design = build_design(data, threshold_regions(0.0));
  const GlmFit mine = fit(design);
  const OracleFit oracle = oracle_fit(design);
  REQUIRE(mine.converged);
  CHECK(close(mine.deviance, oracle.deviance, 1e-8));
  for (Index c = 0; c < design.column_count(); ++c)
    CHECK(close(mine.coefficients(c), oracle.coefficients(c), 1e-6));
}

TEST_CASE("poisson_deviance basics") {
  Vector y(2), yhat(2);
  y << 1.0, 0.0;
  yhat << 0.5, 0.5;
  CHECK(poisson_deviance(y, yhat) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(poisson_deviance(y, y.cwiseMax(1e-300).eval()) == doctest::Approx(0.0).epsilon(1e-6));

  Vector equal(3), fitted(3);
  equal << 1, 1, 0;
  fitted << 1, 1, 1;
  CHECK(poisson_deviance(equal, fitted) == doctest::Approx(0.0));

  Vector bad(1);
  bad << 0.0;
  CHECK_THROWS_AS(poisson_deviance(equal.head(1), bad), numerical_error);
}

TEST_CASE("deviance equals the standalone evaluation of the fitted means") {
  const RankingDataset data = random_fixture(5, 40, 2, 55);
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const GlmFit result = fit(design);
  Vector observed(design.row_count());
  for (Index b = 0; b < design.block_count(); ++b) {
    observed(2 * b) = 1.0;
    observed(2 * b + 1) = 0.0;
  }
  CHECK(result.deviance ==
        doctest::Approx(poisson_deviance(observed, result.full_fitted(design))));
}

TEST_CASE("score is near zero at convergence and matches finite differences elsewhere") {
  const RankingDataset data = random_fixture(4, 50, 2, 71);
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const GlmFit result = fit(design);
  CHECK(score(design, result.coefficients).lpNorm<Eigen::Infinity>() < 1e-6);

  // finite differences at a non-optimal point
  Rng rng = make_engine(8);
  std::normal_distribution<double> normal(0.0, 0.3);
  Vector theta(design.column_count());
  for (Index c = 0; c < theta.size(); ++c) theta(c) = normal(rng);
  const Vector analytic = score(design, theta);
  const double h = 1e-6;
  for (Index c = 0; c < theta.size(); ++c) {
    Vector up = theta, down = theta;
    up(c) += h;
    down(c) -= h;
    const double fd = (log_likelihood(design, up) - log_likelihood(design, down)) / (2.0 * h);
    CHECK(close(analytic(c), fd, 1e-5));
  }
}

TEST_CASE("block fitted means sum to one") {
  const RankingDataset data = random_fixture(4, 30, 1, 19);
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const Vector fitted = fit(design).full_fitted(design);
  for (Index b = 0; b < design.block_count(); ++b)
    CHECK(std::abs(fitted(2 * b) + fitted(2 * b + 1) - 1.0) < 1e-10);
}

TEST_CASE("adding region columns never increases deviance") {
  const RankingDataset data = random_fixture(4, 60, 2, 88);
  const double base = fit(build_design(data, RegionSet::root_only())).deviance;
  for (double threshold : {-0.5, 0.0, 0.4}) {
    const double with_region = fit(build_design(data, threshold_regions(threshold))).deviance;
    CHECK(with_region <= base + 1e-8);
  }
}

TEST_CASE("fitted probabilities obey the 2(lambda_i - lambda_j) logit form") {
  const RankingDataset data = random_fixture(4, 45, 2, 64);
  const RegionSet regions = threshold_regions(0.1);
  const DesignMatrix design = build_design(data, regions);
  const GlmFit result = fit(design);
  const BtrtModel model = make_btrt_model(data, regions, design, result);
  const std::vector<Index> region_of = assign_regions(data, regions);

  for (Index b = 0; b < design.block_count(); ++b) {
    const Index judge = design.judge_of_block(b);
    const auto [i, j] = design.pair_of_block(b);
    const double wi = model.worth(i, data.covariates.row(judge),
                                  region_of[static_cast<std::size_t>(judge)]);
    const double wj = model.worth(j, data.covariates.row(judge),
                                  region_of[static_cast<std::size_t>(judge)]);
    CHECK(std::abs(result.fitted_pairs(b) - logistic(2.0 * (wi - wj))) < 1e-8);
  }
}

TEST_CASE("wald table basics") {
  const RankingDataset data = random_fixture(3, 80, 1, 5);
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const GlmFit result = fit(design);
  const auto rows = wald_table(result, design);
  REQUIRE(rows.size() == static_cast<std::size_t>(design.column_count()));
  for (const WaldRow& row : rows) {
    CHECK(row.p_value >= 0.0);
    CHECK(row.p_value <= 1.0);
  }

  // p-value arithmetic: estimate 0 -> p = 1; estimate 1.96, SE 1 -> p ~ 0.05
  GlmFit fake = result;
  fake.coefficients(0) = 0.0;
  fake.std_errors(0) = 1.0;
  fake.coefficients(1) = 1.96;
  fake.std_errors(1) = 1.0;
  const auto fake_rows = wald_table(fake, design);
  CHECK(fake_rows[0].p_value == doctest::Approx(1.0));
  CHECK(fake_rows[1].p_value == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(fake_rows[1].stars == "*");  // 0.049996 just clears the 0.05 line

  GlmFit unconverged = result;
  unconverged.converged = false;
  CHECK_THROWS_AS(wald_table(unconverged, design), numerical_error);
}

TEST_CASE("wald p-values match the oracle's standard errors") {
  const RankingDataset data = random_fixture(4, 70, 1, 555);
  const DesignMatrix design = build_design(data, RegionSet::root_only());
  const GlmFit mine = fit(design);
  const OracleFit oracle = oracle_fit(design);
  const auto rows = wald_table(mine, design);
  for (Index c = 0; c < design.column_count(); ++c) {
    const double z = std::abs(oracle.coefficients(c)) / oracle.std_errors(c);
    const double p = std::erfc(z / std::sqrt(2.0));
    CHECK(close(rows[static_cast<std::size_t>(c)].p_value, p, 1e-6));
  }
}

TEST_CASE("node intercept identity: region worth is lambda plus the region shift") {
  const RankingDataset data = random_fixture(4, 50, 1, 91);
  const RegionSet regions = threshold_regions(0.0);
  const DesignMatrix design = build_design(data, regions);
  const BtrtModel model = make_btrt_model(data, regions, design, fit(design));
  Eigen::RowVectorXd zero = Eigen::RowVectorXd::Zero(1);
  for (Index i = 0; i < 3; ++i) {
    CHECK(model.worth(i, zero, 0) == doctest::Approx(model.lambda(i)));
    CHECK(model.worth(i, zero, 1) ==
          doctest::Approx(model.lambda(i) + model.beta_region(i, 0)));
  }
}
