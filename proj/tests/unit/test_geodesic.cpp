#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "test_support.hpp"

using namespace gmmshape;
using namespace gmmshape::testing;

namespace {

SphereVector<double> random_unit(RngStream& rng, int k, bool nonnegative = true) {
  SphereVector<double> v(k);
  for (int j = 0; j < k; ++j) v(j) = nonnegative ? std::abs(rng.normal()) : rng.normal();
  return v / v.norm();
}

double brute_force_cost(const DynMatrix<double>& cost) {
  std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) c += cost(static_cast<Eigen::Index>(i), perm[i]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

double assignment_cost(const DynMatrix<double>& cost, const std::vector<int>& col) {
  double c = 0;
  for (std::size_t i = 0; i < col.size(); ++i) c += cost(static_cast<Eigen::Index>(i), col[i]);
  return c;
}

}  // namespace

TEST_CASE("square-root weight map") {
  SUBCASE("weights 0.25 / 0.75") {
    const Model m({Component(0.25, Vec::Zero(), Mat::Identity()), Component(0.75, Vec::Ones(), Mat::Identity())});
    const auto p = gmm_to_product_point(m);
    CHECK(p.sqrt_weights()(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.sqrt_weights()(1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
    CHECK(p.sqrt_weights().norm() == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("round trip preserves every slot") {
    RngStream rng(2);
    for (int trial = 0; trial < 20; ++trial) {
      const Model m = random_gmm(rng, 1 + static_cast<int>(rng.below(6)));
      const Model back = product_point_to_gmm(gmm_to_product_point(m));
      for (int j = 0; j < m.size(); ++j) {
        CHECK(std::abs(back[j].weight() - m[j].weight()) <= 1e-14);
        CHECK(back[j].mean() == m[j].mean());
        CHECK((back[j].covariance() - m[j].covariance()).norm() <= 1e-15);
      }
    }
  }
  SUBCASE("zero weights are retained") {
    const Model m({Component(0.0, Vec::Zero(), Mat::Identity()), Component(1.0, Vec::Ones(), Mat::Identity())});
    const auto p = gmm_to_product_point(m);
    CHECK(p.sqrt_weights()(0) == 0.0);
    const Model back = product_point_to_gmm(p);
    CHECK(back.size() == 2);
    CHECK(back[0].weight() == 0.0);
  }
  SUBCASE("invalid product points") {
    const std::vector<Mat> covs{Mat::Identity(), Mat::Identity()};
    CHECK_THROWS_AS(ProductPoint<double>(SphereVector<double>::Ones(2), Points3<double>::Zero(3, 2), covs),
                    InvalidArgument);
    SphereVector<double> neg(2);
    neg << -std::sqrt(0.5), std::sqrt(0.5);
    CHECK_THROWS_AS(ProductPoint<double>(neg, Points3<double>::Zero(3, 2), covs), InvalidArgument);
    CHECK_THROWS_AS(ProductPoint<double>(SphereVector<double>::Unit(2, 0), Points3<double>::Zero(3, 1), covs),
                    InvalidArgument);
  }
}

TEST_CASE("moment-preserving merge") {
  SUBCASE("worked example") {
    const Component a(0.5, Vec(1, 0, 0), Mat::Identity());
    const Component b(0.5, Vec(-1, 0, 0), Mat::Identity());
    const auto m = merge_components(a, b);
    CHECK(m.weight() == 1.0);
    CHECK(m.mean() == Vec::Zero());
    CHECK((m.covariance() - Vec(2, 1, 1).asDiagonal().toDenseMatrix()).norm() <= 1e-15);
    CHECK(merge_cost(a, b) == doctest::Approx(1.0));
  }
  SUBCASE("projection keeps total mass, mean and covariance") {
    RngStream rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(8));
      const Model m = random_gmm(rng, k);
      const int target = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
      const Model r = project_to_k(m, target);
      CHECK(r.size() == target);
      const auto w = r.weights();
      CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);
      CHECK((mixture_mean(r) - mixture_mean(m)).norm() <= 1e-10 * (1 + mixture_mean(m).norm()));
      CHECK((mixture_covariance(r) - mixture_covariance(m)).norm() <= 1e-10 * (1 + mixture_covariance(m).norm()));
    }
  }
  SUBCASE("closest pair merges first") {
    const Model m({Component(0.4, Vec(0, 0, 0), Mat::Identity()), Component(0.3, Vec(10, 0, 0), Mat::Identity()),
                   Component(0.3, Vec(0.5, 0, 0), Mat::Identity())});
    const Model r = project_to_k(m, 2);
    CHECK(r[0].weight() == doctest::Approx(0.7));
    CHECK(r[1].mean() == Vec(10, 0, 0));
  }
  SUBCASE("bad targets") {
    const Model m = two_component_truth();
    CHECK_THROWS_AS(project_to_k(m, 0), InvalidArgument);
    CHECK_THROWS_AS(project_to_k(m, 3), InvalidArgument);
  }
}

TEST_CASE("component matching") {
  RngStream rng(7);
  SUBCASE("identity and reversal") {
    const Model m = random_gmm(rng, 4, 10.0);
    CHECK(match_components(m, m) == std::vector<int>{0, 1, 2, 3});
    auto comps = m.components();
    std::reverse(comps.begin(), comps.end());
    CHECK(match_components(m, Model(comps)) == std::vector<int>{3, 2, 1, 0});
    const Model back = reorder_components(Model(comps), match_components(m, Model(comps)));
    for (int j = 0; j < 4; ++j) CHECK(back[j].mean() == m[j].mean());
  }
  SUBCASE("K = 3 agrees with brute force") {
    for (int trial = 0; trial < 30; ++trial) {
      const Model a = random_gmm(rng, 3), b = random_gmm(rng, 3);
      DynMatrix<double> cost(3, 3);
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) cost(i, j) = (a[i].mean() - b[j].mean()).squaredNorm();
      }
      CHECK(assignment_cost(cost, match_components(a, b)) == doctest::Approx(brute_force_cost(cost)).epsilon(1e-12));
    }
  }
  SUBCASE("Hungarian agrees with brute force") {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(8));
      DynMatrix<double> cost(n, n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) cost(i, j) = rng.uniform(0, 10);
      }
      const auto col = hungarian_assignment(cost);
      std::vector<int> sorted = col;
      std::sort(sorted.begin(), sorted.end());
      std::vector<int> expect(static_cast<std::size_t>(n));
      std::iota(expect.begin(), expect.end(), 0);
      CHECK(sorted == expect);
      CHECK(assignment_cost(cost, col) == doctest::Approx(brute_force_cost(cost)).epsilon(1e-12));
    }
  }
  SUBCASE("K = 9 uses the Hungarian path") {
    const Model a = random_gmm(rng, 9), b = random_gmm(rng, 9);
    DynMatrix<double> cost(9, 9);
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) cost(i, j) = (a[i].mean() - b[j].mean()).squaredNorm();
    }
    CHECK(assignment_cost(cost, match_components(a, b)) == doctest::Approx(brute_force_cost(cost)).epsilon(1e-12));
  }
  SUBCASE("unequal K") { CHECK_THROWS_AS(match_components(random_gmm(rng, 2), random_gmm(rng, 3)), InvalidArgument); }
}

TEST_CASE("sphere geodesic") {
  const SphereVector<double> e1 = SphereVector<double>::Unit(3, 0);
  const SphereVector<double> e2 = SphereVector<double>::Unit(3, 1);
  SUBCASE("endpoints are exact") {
    CHECK(sphere_geodesic(e1, e2, 0.0) == e1);
    CHECK(sphere_geodesic(e1, e2, 1.0) == e2);
  }
  SUBCASE("quarter-circle midpoint") {
    const auto mid = sphere_geodesic(e1, e2, 0.5);
    CHECK(mid(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(mid(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(sphere_distance(e1, e2) == doctest::Approx(std::numbers::pi / 2));
  }
  SUBCASE("identical endpoints") {
    const auto v = sphere_geodesic(e1, e1, 0.3);
    CHECK((v - e1).norm() <= 1e-15);
  }
  SUBCASE("arc length is additive and paths stay on the sphere") {
    RngStream rng(9);
    for (int trial = 0; trial < 50; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(6));
      const auto a = random_unit(rng, k), b = random_unit(rng, k);
      const double d = sphere_distance(a, b);
      for (double s : {0.25, 0.5, 0.75}) {
        const auto g = sphere_geodesic(a, b, s);
        CHECK(std::abs(g.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(sphere_distance(a, g) - s * d) <= 1e-8);
        CHECK(std::abs(sphere_distance(g, b) - (1 - s) * d) <= 1e-8);
      }
    }
  }
}

TEST_CASE("SPD geodesic") {
  RngStream rng(13);
  SUBCASE("endpoints") {
    for (int trial = 0; trial < 20; ++trial) {
      const Mat a = random_spd(rng), b = random_spd(rng);
      CHECK((spd_geodesic(a, b, 0.0) - a).norm() <= 1e-10 * a.norm());
      CHECK((spd_geodesic(a, b, 1.0) - b).norm() <= 1e-10 * b.norm());
    }
  }
  SUBCASE("identity to diag(2, 1, 1)") {
    const Mat g = spd_geodesic(Mat::Identity(), Vec(2, 1, 1).asDiagonal().toDenseMatrix(), 0.5);
    CHECK((g - Vec(std::sqrt(2.0), 1, 1).asDiagonal().toDenseMatrix()).norm() <= 1e-12);
  }
  SUBCASE("commuting matrices follow the power law") {
    for (int trial = 0; trial < 20; ++trial) {
      const Mat q = Eigen::HouseholderQR<Mat>(random_matrix(rng)).householderQ();
      const Vec da(rng.uniform(0.2, 5), rng.uniform(0.2, 5), rng.uniform(0.2, 5));
      const Vec db(rng.uniform(0.2, 5), rng.uniform(0.2, 5), rng.uniform(0.2, 5));
      const double t = rng.uniform();
      const Mat a = sym(q * da.asDiagonal() * q.transpose());
      const Mat b = sym(q * db.asDiagonal() * q.transpose());
      const Vec dt = (da.array().pow(1 - t) * db.array().pow(t)).matrix();
      const Mat expect = q * dt.asDiagonal() * q.transpose();
      CHECK((spd_geodesic(a, b, t) - expect).norm() <= 1e-10 * (1 + expect.norm()));
    }
  }
  SUBCASE("congruence invariance") {
    for (int trial = 0; trial < 20; ++trial) {
      Mat g = random_matrix(rng);
      while (std::abs(g.determinant()) < 0.1) g = random_matrix(rng);
      const Mat a = random_spd(rng, 0.5), b = random_spd(rng, 0.5);
      const double t = rng.uniform();
      const Mat lhs = spd_geodesic(sym(g * a * g.transpose()), sym(g * b * g.transpose()), t);
      const Mat rhs = g * spd_geodesic(a, b, t) * g.transpose();
      CHECK((lhs - rhs).norm() <= 1e-8 * (1 + rhs.norm()));
    }
  }
  SUBCASE("affine-invariant distance is additive along the path") {
    for (int trial = 0; trial < 20; ++trial) {
      const Mat a = random_spd(rng, 0.3), b = random_spd(rng, 0.3);
      const double d = spd_distance(a, b);
      for (double s : {0.25, 0.5, 0.75}) {
        const Mat g = spd_geodesic(a, b, s);
        CHECK(min_eigenvalue(g) > 0.0);
        CHECK(std::abs(spd_distance(a, g) - s * d) <= 1e-8 * (1 + d));
      }
    }
  }
  SUBCASE("non-SPD endpoints") {
    const Mat bad = Vec(1, -1, 1).asDiagonal();
    CHECK_THROWS_AS(spd_geodesic(bad, Mat::Identity(), 0.5), DegenerateCovariance);
    CHECK_NOTHROW(spd_geodesic(Vec(1, 0, 1).asDiagonal().toDenseMatrix(), Mat::Identity(), 0.5, 1e-6));
  }
}

TEST_CASE("product geodesic") {
  RngStream rng(17);
  const Model a = random_gmm(rng, 3), b = random_gmm(rng, 3);
  const auto pa = gmm_to_product_point(a), pb = gmm_to_product_point(b);
  SUBCASE("endpoints reproduce the mixtures") {
    const Model start = product_point_to_gmm(product_geodesic(pa, pb, 0.0));
    const Model end = product_point_to_gmm(product_geodesic(pa, pb, 1.0));
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(start[j].weight() - a[j].weight()) <= 1e-10);
      CHECK((start[j].mean() - a[j].mean()).norm() <= 1e-10);
      CHECK((start[j].covariance() - a[j].covariance()).norm() <= 1e-10);
      CHECK(std::abs(end[j].weight() - b[j].weight()) <= 1e-10);
      CHECK((end[j].mean() - b[j].mean()).norm() <= 1e-10);
      CHECK((end[j].covariance() - b[j].covariance()).norm() <= 1e-10);
    }
  }
  SUBCASE("midpoint means are averages") {
    const auto mid = product_geodesic(pa, pb, 0.5);
    CHECK((mid.means() - 0.5 * (pa.means() + pb.means())).norm() <= 1e-14);
    CHECK(std::abs(mid.sqrt_weights().norm() - 1.0) <= 1e-12);
  }
  SUBCASE("K mismatch") {
    CHECK_THROWS_AS(product_geodesic(pa, gmm_to_product_point(random_gmm(rng, 2)), 0.5), InvalidArgument);
  }
}

TEST_CASE("point cloud interpolation") {
  const Cloud x = make_bent_tube(nondemented_tube(600), 1);
  const Cloud y = make_bent_tube(demented_tube(600), 2);
  InterpolationConfig cfg;
  cfg.candidate_ks = {1, 2, 4, 8};

  SUBCASE("t = 0 reproduces the first cloud's moments") {
    const auto r = interpolate_point_clouds(x, y, std::vector<double>{0.0}, 5000, cfg);
    REQUIRE(r.clouds.size() == 1);
    const Vec mu = sample_mean(x.points());
    const Mat cov = sample_covariance(x.points());
    const Vec got = sample_mean(r.clouds[0].points());
    const Mat got_cov = sample_covariance(r.clouds[0].points());
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(got(a) - mu(a)) <= 0.05 * std::max(std::abs(mu(a)), std::sqrt(cov(a, a))));
      for (int b = 0; b < 3; ++b) CHECK(std::abs(got_cov(a, b) - cov(a, b)) <= 0.05 * std::sqrt(cov(a, a) * cov(b, b)));
    }
  }
  SUBCASE("interpolating a cloud with itself is stationary") {
    const auto r = interpolate_point_clouds(x, x, default_interpolation_times(), 100, cfg);
    REQUIRE(r.models.size() == 6);
    for (const auto& m : r.models) {
      for (int j = 0; j < m.size(); ++j) {
        CHECK(std::abs(m[j].weight() - r.start[j].weight()) <= 1e-10);
        CHECK((m[j].mean() - r.start[j].mean()).norm() <= 1e-10);
        CHECK((m[j].covariance() - r.start[j].covariance()).norm() <= 1e-8);
      }
    }
  }
  SUBCASE("repeat runs are identical") {
    const auto a = interpolate_point_clouds(x, y, default_interpolation_times(), 200, cfg);
    const auto b = interpolate_point_clouds(x, y, default_interpolation_times(), 200, cfg);
    for (std::size_t i = 0; i < a.clouds.size(); ++i) CHECK(a.clouds[i].points() == b.clouds[i].points());
  }
  SUBCASE("times outside [0, 1]") {
    CHECK_THROWS_AS(interpolate_point_clouds(x, y, std::vector<double>{1.5}, 10, cfg), InvalidArgument);
  }
}
