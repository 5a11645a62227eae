#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "sadiv/errors.hpp"
#include "sadiv/simplex.hpp"

using sadiv::CounterRng;
using sadiv::Distribution;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("validate accepts exact simplex points") {
  const auto d = Distribution::validated(vec({0.5, 0.5}), 1e-9);
  CHECK(d.probs()[0] == doctest::Approx(0.5));
  CHECK(d.size() == 2);
}

TEST_CASE("validate rejects bad inputs") {
  CHECK_THROWS_AS(Distribution::validated(vec({0.7, 0.4}), 1e-9),
                  sadiv::InvalidInput);
  CHECK_THROWS_AS(Distribution::validated(Eigen::VectorXd(0), 1e-9),
                  sadiv::InvalidInput);
  CHECK_THROWS_AS(Distribution::validated(vec({1.5, -0.5}), 1e-9),
                  sadiv::InvalidInput);
}

TEST_CASE("validate renormalizes within tolerance") {
  const auto d = Distribution::validated(vec({0.5, 0.5 + 1e-12}), 1e-9);
  CHECK(d.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
  // Entries just below zero are clipped.
  const auto e = Distribution::validated(vec({1.0 + 5e-10, -5e-10}), 1e-9);
  CHECK(e.probs()[1] == 0.0);
  CHECK(e.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("smoothing matches the 0.95p + 0.05u example") {
  const auto p = Distribution::validated(vec({1, 0, 0, 0}));
  const auto u = Distribution::uniform(4);
  const auto s = sadiv::smooth_to_interior(p, 0.05, u);
  CHECK(s.probs()[0] == doctest::Approx(0.9625).epsilon(1e-14));
  CHECK(s.probs()[1] == doctest::Approx(0.0125).epsilon(1e-14));
  CHECK(s.probs()[3] == doctest::Approx(0.0125).epsilon(1e-14));
}

TEST_CASE("smoothing edge cases") {
  const auto p = Distribution::validated(vec({0.3, 0.7}));
  const auto u = Distribution::uniform(2);
  const auto full = sadiv::smooth_to_interior(p, 1.0, u);
  CHECK(full.probs()[0] == doctest::Approx(0.5).epsilon(1e-15));
  const auto fixed = sadiv::smooth_to_interior(u, 0.3, u);
  CHECK((fixed.probs() - u.probs()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(
      sadiv::smooth_to_interior(p, 0.5, Distribution::uniform(3)),
      sadiv::InvalidInput);
  CHECK_THROWS_AS(sadiv::smooth_to_interior(p, 0.0, u), sadiv::InvalidInput);
}

TEST_CASE("smoothing stays interior and normalized") {
  CounterRng rng(7);
  const auto u = Distribution::uniform(6);
  for (int t = 0; t < 50; ++t) {
    auto p = sadiv::sample_group_distribution(std::array<int, 2>{0, 3}, 2, 6, rng);
    auto s = sadiv::smooth_to_interior(p, 0.05, u);
    CHECK(s.min_prob() > 0.0);
    CHECK(std::abs(s.probs().sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("floor raises zero entries and renormalizes") {
  const auto d = sadiv::floor_to_interior(
      Distribution::validated(vec({0.5, 0.5, 0})), 0.01);
  CHECK(d.probs()[0] == doctest::Approx(0.5 / 1.01).epsilon(1e-14));
  CHECK(d.probs()[2] == doctest::Approx(0.01 / 1.01).epsilon(1e-14));

  const auto tiny = sadiv::floor_to_interior(
      Distribution::validated(vec({1, 0})), 1e-10);
  CHECK(tiny.min_prob() > 0.0);
  CHECK(tiny.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("floor leaves interior points unchanged and is idempotent") {
  const auto p = Distribution::validated(vec({0.25, 0.25, 0.5}));
  const auto q = sadiv::floor_to_interior(p, 1e-10);
  CHECK((q.probs() - p.probs()).cwiseAbs().maxCoeff() == 0.0);

  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) {
    auto raw = sadiv::sample_group_distribution(std::array<int, 3>{0, 1, 2}, 3,
                                                8, rng);
    // Renormalization pulls floored entries a hair under epsilon again, so a
    // second pass moves them by O(n^2 eps^2) at most; at the default
    // eps = 1e-10 that is far below double noise.
    const double eps = 1e-4;
    auto once = sadiv::floor_to_interior(raw, eps);
    auto twice = sadiv::floor_to_interior(once, eps);
    CHECK((twice.probs() - once.probs()).cwiseAbs().maxCoeff() <=
          64.0 * eps * eps);
    auto d_once = sadiv::floor_to_interior(raw, 1e-10);
    auto d_twice = sadiv::floor_to_interior(d_once, 1e-10);
    CHECK((d_twice.probs() - d_once.probs()).cwiseAbs().maxCoeff() <= 1e-17);
  }
  CHECK_THROWS_AS(sadiv::floor_to_interior(p, 0.5), sadiv::InvalidInput);
}

TEST_CASE("uniform simplex sampling is seed-deterministic") {
  const auto a = sadiv::sample_uniform_simplex(50, 12345u);
  const auto b = sadiv::sample_uniform_simplex(50, 12345u);
  CHECK((a.probs() - b.probs()).cwiseAbs().maxCoeff() == 0.0);
  const auto c = sadiv::sample_uniform_simplex(50, 12346u);
  CHECK((a.probs() - c.probs()).cwiseAbs().maxCoeff() > 0.0);

  const auto single = sadiv::sample_uniform_simplex(1, 9u);
  CHECK(single.probs()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(sadiv::sample_uniform_simplex(0, 9u), sadiv::InvalidInput);
}

TEST_CASE("uniform simplex sampling has flat-Dirichlet moments") {
  CounterRng rng(99);
  const int draws = 100000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sumsq = Eigen::Vector3d::Zero();
  for (int t = 0; t < draws; ++t) {
    const auto p = sadiv::sample_uniform_simplex(3, rng);
    sum += p.probs();
    sumsq += p.probs().cwiseProduct(p.probs());
  }
  const Eigen::Vector3d mean = sum / draws;
  const Eigen::Vector3d var = sumsq / draws - mean.cwiseProduct(mean);
  for (int i = 0; i < 3; ++i) {
    CHECK(mean[i] == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(std::abs(mean[i] - 1.0 / 3.0) < 0.01);
    // Flat Dirichlet on the 3-simplex has coordinate variance 1/18.
    CHECK(std::abs(var[i] - 1.0 / 18.0) / (1.0 / 18.0) < 0.05);
  }
}

TEST_CASE("group sampling concentrates on the group") {
  CounterRng rng(5);
  const std::array<int, 1> singleton{0};
  const auto d = sadiv::sample_group_distribution(singleton, 4, 3, rng);
  CHECK(d.probs()[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.probs()[1] == 0.0);

  const std::array<int, 3> group{1, 3, 4};
  for (int t = 0; t < 30; ++t) {
    const auto g = sadiv::sample_group_distribution(group, 2, 6, rng);
    CHECK(g.probs()[0] == 0.0);
    CHECK(g.probs()[2] == 0.0);
    CHECK(g.probs()[5] == 0.0);
    CHECK(g.probs().sum() == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(
      sadiv::sample_group_distribution(std::span<const int>{}, 2, 6, rng),
      sadiv::InvalidInput);
}

TEST_CASE("group sampling has the multinomial mean") {
  CounterRng rng(11);
  std::array<int, 20> group{};
  for (int i = 0; i < 20; ++i) group[static_cast<std::size_t>(i)] = i + 5;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(30);
  const int reps = 10000;
  for (int t = 0; t < reps; ++t) {
    mean += sadiv::sample_group_distribution(group, 16, 30, rng).probs();
  }
  mean /= reps;
  for (int i = 5; i < 25; ++i) {
    CHECK(mean[i] == doctest::Approx(1.0 / 20.0).epsilon(0.15));
  }
}

TEST_CASE("weighted ensemble validation") {
  std::vector<Distribution> members{Distribution::uniform(3),
                                    Distribution::validated(vec({0.2, 0.3, 0.5}))};
  const auto e = sadiv::WeightedEnsemble::validated(members, vec({0.25, 0.75}));
  CHECK(e.size() == 2);
  CHECK(e.mean().probs()[2] == doctest::Approx(0.25 * (1.0 / 3.0) + 0.75 * 0.5));

  CHECK_THROWS_AS(sadiv::WeightedEnsemble::validated(members, vec({0.5, 0.6})),
                  sadiv::InvalidInput);
  members.push_back(Distribution::uniform(4));
  CHECK_THROWS_AS(
      sadiv::WeightedEnsemble::validated(members, vec({0.3, 0.3, 0.4})),
      sadiv::InvalidInput);
}
