#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "test_support.hpp"

using namespace gmmshape;
using namespace gmmshape::testing;

namespace {

double univariate_density(double x, double mu, double var) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// Textbook formula with an explicit inverse and determinant.
double direct_density(const Vec& x, const Vec& mu, const Mat& cov) {
  const Vec d = x - mu;
  return std::exp(-0.5 * d.dot(cov.inverse() * d)) / std::sqrt(std::pow(2.0 * std::numbers::pi, 3) * cov.determinant());
}

Mat rotation(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Vec::UnitZ()) * Eigen::AngleAxisd(b, Vec::UnitY()) * Eigen::AngleAxisd(c, Vec::UnitX()))
      .toRotationMatrix();
}

}  // namespace

TEST_CASE("gaussian density at the mean and at unit displacement") {
  const Component c(1.0, Vec::Zero(), Mat::Identity());
  const double peak = std::pow(2.0 * std::numbers::pi, -1.5);
  CHECK(gaussian_density(Vec(0, 0, 0), c) == doctest::Approx(0.0634936).epsilon(1e-6));
  CHECK(gaussian_density(Vec(0, 0, 0), c) == doctest::Approx(peak).epsilon(1e-14));
  CHECK(gaussian_density(Vec(1, 0, 0), c) == doctest::Approx(0.0385108).epsilon(1e-6));
  CHECK(gaussian_density(Vec(1, 0, 0), c) == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("diagonal covariance density factorizes into univariate densities") {
  const Component c(1.0, Vec(0, 1, 1), Vec(1, 2, 4).asDiagonal().toDenseMatrix());
  const double oracle = univariate_density(1, 0, 1) * univariate_density(2, 1, 2) * univariate_density(3, 1, 4);
  CHECK(gaussian_density(Vec(1, 2, 3), c) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("gaussian density matches the direct formula on random full covariances") {
  RngStream rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat cov = random_spd(rng);
    const Vec mu = random_vec(rng);
    const Vec x = random_vec(rng, 2.0);
    const Component c(1.0, mu, cov);
    CHECK(gaussian_density(x, c) == doctest::Approx(direct_density(x, mu, cov)).epsilon(1e-10));
    CHECK(gaussian_density(x, c) > 0.0);
  }
}

TEST_CASE("mixture density") {
  SUBCASE("single component reduces to the gaussian") {
    const Component c(1.0, Vec(1, 2, 3), Vec(1, 2, 3).asDiagonal().toDenseMatrix());
    const Model m({c});
    const Vec x(0.3, 1.1, 2.0);
    CHECK(gmm_density(x, m) == gaussian_density(x, c));
  }
  SUBCASE("symmetric pair at the origin") {
    const Model m({Component(0.5, Vec(1, 0, 0), Mat::Identity()), Component(0.5, Vec(-1, 0, 0), Mat::Identity())});
    CHECK(gmm_density(Vec(0, 0, 0), m) == doctest::Approx(0.0385108).epsilon(1e-6));
  }
  SUBCASE("random mixtures match term-by-term summation") {
    RngStream rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const Model m = random_gmm(rng, 3);
      const Vec x = random_vec(rng, 3.0);
      double oracle = 0;
      for (const auto& c : m) oracle += c.weight() * direct_density(x, c.mean(), c.covariance());
      CHECK(std::abs(gmm_density(x, m) - oracle) <= 1e-12 * oracle + 1e-300);
      CHECK(std::exp(gmm_log_density(x, m)) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("log-likelihood") {
  const Model unit({Component(1.0, Vec::Zero(), Mat::Identity())});
  SUBCASE("single point at the mean") {
    const Cloud one(Points3<double>::Zero(3, 1));
    CHECK(gmm_log_likelihood(one, unit) == doctest::Approx(-2.7568).epsilon(1e-4));
    CHECK(gmm_log_likelihood(one, unit) == doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  }

  RngStream rng(99);
  const Model m = random_gmm(rng, 3);
  RngStream srng(100);
  const Cloud pts = generate_point_cloud(m, 100, srng);

  SUBCASE("duplicating every point doubles the log-likelihood") {
    Points3<double> twice(3, 200);
    twice << pts.points(), pts.points();
    CHECK(gmm_log_likelihood(Cloud(twice), m) == doctest::Approx(2.0 * gmm_log_likelihood(pts, m)).epsilon(1e-13));
  }
  SUBCASE("matches naive summation of log densities") {
    double naive = 0;
    for (Eigen::Index i = 0; i < pts.size(); ++i) {
      double d = 0;
      for (const auto& c : m) d += c.weight() * direct_density(pts.point(i), c.mean(), c.covariance());
      naive += std::log(d);
    }
    CHECK(std::abs(gmm_log_likelihood(pts, m) - naive) <= 1e-9);
  }
  SUBCASE("far outliers stay finite") {
    Points3<double> far(3, 1);
    far << 800.0, 0.0, 0.0;
    CHECK(gmm_density(Vec(800, 0, 0), unit) == 0.0);
    const double ll = gmm_log_likelihood(Cloud(far), unit);
    CHECK(std::isfinite(ll));
    CHECK(ll == doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi) - 0.5 * 800.0 * 800.0).epsilon(1e-14));
  }
}

TEST_CASE("mixture density integrates to one (Monte Carlo)") {
  RngStream rng(4242);
  const Model m = random_gmm(rng, 3, 2.0);
  Vec lo = Vec::Constant(1e300), hi = Vec::Constant(-1e300);
  for (const auto& c : m) {
    const Vec sd = c.covariance().diagonal().cwiseSqrt();
    lo = lo.cwiseMin(c.mean() - 6.0 * sd);
    hi = hi.cwiseMax(c.mean() + 6.0 * sd);
  }
  const double volume = (hi - lo).prod();
  const int n = 1'000'000;
  Points3<double> pts(3, n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) pts(d, i) = rng.uniform(lo(d), hi(d));
  }
  const double integral = gmm_log_density(pts, m).array().exp().mean() * volume;
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mixture density is invariant to component order") {
  RngStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Model m = random_gmm(rng, 5);
    auto comps = m.components();
    std::reverse(comps.begin(), comps.end());
    std::swap(comps[1], comps[3]);
    const Model permuted(comps);
    const Vec x = random_vec(rng, 3.0);
    const double a = gmm_density(x, m);
    CHECK(std::abs(a - gmm_density(x, permuted)) <= 1e-15 * a);
  }
}

TEST_CASE("gaussian density is rotation invariant") {
  RngStream rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat r = rotation(rng.uniform(0, 6.3), rng.uniform(0, 6.3), rng.uniform(0, 6.3));
    const Mat cov = random_spd(rng);
    const Vec mu = random_vec(rng);
    const Vec x = random_vec(rng, 2.0);
    const double a = gaussian_density(x, Component(1.0, mu, cov));
    const double b = gaussian_density(Vec(r * x), Component(1.0, r * mu, sym(r * cov * r.transpose())));
    CHECK(std::abs(a - b) <= 1e-10 * a);
  }
}

TEST_CASE("type invariants are enforced") {
  SUBCASE("non-SPD covariance reports its eigenvalue") {
    const Mat bad = Vec(1.0, 0.0, 2.0).asDiagonal();
    CHECK_THROWS_AS(Component(1.0, Vec::Zero(), bad), DegenerateCovariance);
    try {
      Component(1.0, Vec::Zero(), Vec(1.0, -2.0, 3.0).asDiagonal().toDenseMatrix());
    } catch (const DegenerateCovariance& e) {
      CHECK(e.eigenvalue() == doctest::Approx(-2.0));
    }
  }
  SUBCASE("asymmetry beyond 1e-12 is rejected, below it is symmetrized") {
    Mat m = Mat::Identity();
    m(0, 1) = 1e-10;
    CHECK_THROWS_AS(Component(1.0, Vec::Zero(), m), InvalidArgument);
    m(0, 1) = 5e-13;
    const Component ok(1.0, Vec::Zero(), m);
    CHECK(ok.covariance()(0, 1) == ok.covariance()(1, 0));
  }
  SUBCASE("weights") {
    CHECK_THROWS_AS(Component(-0.1, Vec::Zero(), Mat::Identity()), InvalidArgument);
    CHECK_THROWS_AS(Model({Component(0.5, Vec::Zero(), Mat::Identity())}), InvalidArgument);
    CHECK_THROWS_AS(Model(std::vector<Component>{}), InvalidArgument);
  }
  SUBCASE("ensembles") {
    const Model a({Component(1.0, Vec::Zero(), Mat::Identity())});
    CHECK_THROWS_AS(GmmEnsemble<double>({{0.5, a}, {0.5, a}}), InvalidArgument);
    CHECK_THROWS_AS(GmmEnsemble<double>({{0.9, a}}), InvalidArgument);
    CHECK_NOTHROW(GmmEnsemble<double>::single(a));
  }
  SUBCASE("point clouds") {
    CHECK_THROWS_AS(Cloud(Points3<double>(3, 0)), InvalidArgument);
    Points3<double> nan = Points3<double>::Zero(3, 2);
    nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Cloud{nan}, InvalidArgument);
    CHECK(Cloud(Points3<double>::Zero(3, 7)).size() == 7);
  }
}

TEST_CASE("mixture moments") {
  const Model m({Component(0.5, Vec(1, 0, 0), Mat::Identity()), Component(0.5, Vec(-1, 0, 0), Mat::Identity())});
  CHECK(mixture_mean(m).norm() == doctest::Approx(0.0));
  CHECK((mixture_covariance(m) - Vec(2, 1, 1).asDiagonal().toDenseMatrix()).norm() <= 1e-15);
}
