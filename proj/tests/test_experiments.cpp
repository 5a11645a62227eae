#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/experiments.hpp"
#include "sadiv/io.hpp"
#include "sadiv/stats.hpp"

namespace fs = std::filesystem;

namespace {
const fs::path kDataDir(SADIV_DATA_DIR);
}

TEST_CASE("frozen lattice file has the planted geometry") {
  const auto lattice =
      sadiv::load_planted_lattice((kDataDir / "planted_lattice.csv").string());
  REQUIRE(lattice.size() == 60);
  std::array<int, 3> counts{};
  for (const auto& e : lattice) counts[static_cast<std::size_t>(e.group)]++;
  CHECK(counts == std::array<int, 3>{20, 20, 20});

  // Group centroids: triangle/square must be mutually closer than to circle.
  std::array<Eigen::Vector2d, 3> c{Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                   Eigen::Vector2d::Zero()};
  for (const auto& e : lattice) {
    c[static_cast<std::size_t>(e.group)] += Eigen::Vector2d(e.x, e.y);
  }
  for (auto& v : c) v /= 20.0;
  const double d01 = (c[0] - c[1]).lpNorm<1>();
  const double d02 = (c[0] - c[2]).lpNorm<1>();
  const double d12 = (c[1] - c[2]).lpNorm<1>();
  CHECK(d01 < d02);
  CHECK(d01 < d12);
}

TEST_CASE("planted experiment smoke run recovers k=3 with structure") {
  sadiv::PlantedConfig config;
  config.lattice =
      sadiv::load_planted_lattice((kDataDir / "planted_lattice.csv").string());
  config.runs = 3;
  config.m_samples = {16};
  config.restarts = 20;
  config.seed = 7;
  const auto report = sadiv::run_planted_experiment(config, true);
  REQUIRE(report.records.size() == 3);
  CHECK(report.median_ami_k3_by_m[0] == doctest::Approx(1.0));
  for (const auto& rec : report.records) {
    REQUIRE(rec.explained_by_k.size() == 5u);
    for (std::size_t ki = 1; ki < rec.explained_by_k.size(); ++ki) {
      CHECK(rec.explained_by_k[ki] >= rec.explained_by_k[ki - 1] - 1e-9);
    }
  }
}

TEST_CASE("planted experiment is reproducible for a fixed seed") {
  sadiv::PlantedConfig config;
  config.lattice =
      sadiv::load_planted_lattice((kDataDir / "planted_lattice.csv").string());
  config.runs = 2;
  config.m_samples = {4};
  config.restarts = 8;
  config.seed = 42;
  const auto a = sadiv::run_planted_experiment(config, true);
  const auto b = sadiv::run_planted_experiment(config, true);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].ami_k2 == b.records[i].ami_k2);
    CHECK(a.records[i].ami_k3 == b.records[i].ami_k3);
    CHECK(a.records[i].explained_by_k == b.records[i].explained_by_k);
  }
}

TEST_CASE("runtime experiment smoke run") {
  sadiv::RuntimeConfig config;
  config.sizes = {6, 10};
  config.runs_per_size = 2;
  config.seed = 11;
  const auto report = sadiv::run_runtime_experiment(config);
  REQUIRE(report.summaries.size() == 2);
  for (const auto& s : report.summaries) {
    CHECK(s.max_fast_naive_diff <= 1e-10);
    CHECK(s.median_ot_seconds > 0.0);
    CHECK(s.median_naive_seconds > 0.0);
    CHECK(s.median_fast_seconds > 0.0);
    CHECK(s.median_pearson_r >= -1.0);
    CHECK(s.median_pearson_r <= 1.0);
    CHECK(s.median_kendall_tau >= -1.0);
    CHECK(s.median_kendall_tau <= 1.0);
  }
}

TEST_CASE("trait similarity construction rules") {
  // The construction itself (standardize, Euclidean, rescale, 1 - d): species
  // with identical traits map to similarity 1 and the farthest pair to 0.
  Eigen::MatrixXd traits(4, 2);
  traits << 1.0, 2.0,
            1.0, 2.0,
            3.0, 5.0,
            0.0, 1.0;
  Eigen::MatrixXd std_traits = traits;
  for (Eigen::Index c = 0; c < traits.cols(); ++c) {
    const double mu = traits.col(c).mean();
    const double sd = std::sqrt((traits.col(c).array() - mu).square().sum() / 3.0);
    std_traits.col(c) = (traits.col(c).array() - mu) / sd;
  }
  const auto D = sadiv::DistanceMatrix::from_points(
      std_traits, sadiv::DistanceMatrix::Metric::kEuclidean);
  const auto Z = sadiv::similarity_linear_from_metric(D);
  CHECK(Z.matrix()(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Z.matrix()(2, 3) == doctest::Approx(0.0).epsilon(1e-12));

  // Duplicate species make 1 - d/max exactly singular, so the certified
  // constructor refuses them.
  CHECK_THROWS_AS(sadiv::rutor_similarity(traits), sadiv::NumericalError);

  Eigen::MatrixXd constant(3, 2);
  constant << 1.0, 2.0, 1.0, 3.0, 1.0, 4.0;
  CHECK_THROWS_AS(sadiv::rutor_similarity(constant), sadiv::InvalidInput);
}

TEST_CASE("bundled Rutor traits give a PD similarity") {
  const auto traits = sadiv::io::read_matrix_csv(kDataDir / "rutor_traits.csv",
                                                 sadiv::io::MatrixKind::kAbundance);
  const auto Z = sadiv::rutor_similarity(traits.values);
  REQUIRE(Z.pd_certificate().has_value());
  CHECK(Z.pd_certificate()->lambda_min > 0.0);
  CHECK(Z.matrix().minCoeff() >= 0.0);
  CHECK(Z.matrix().maxCoeff() <= 1.0);
}

TEST_CASE("beta diversity: single-plot stages have zero diversity") {
  sadiv::CounterRng rng(5);
  Eigen::MatrixXd ab(3, 4);
  ab << 1, 2, 3, 4,
        4, 3, 2, 1,
        1, 1, 1, 1;
  auto Z = sadiv::SimilarityMatrix::identity(4);
  const auto report = sadiv::run_beta_diversity(
      ab, {"solo", "duo", "duo"}, Z, 2.0, 50, 3, true);
  REQUIRE(report.stages.size() == 2);
  CHECK(report.stages[0].stage == "solo");
  CHECK(report.stages[0].empirical == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(report.stages[1].empirical > 0.0);
  CHECK(report.stages[0].n_plots == 1);
  CHECK(report.stages[1].n_plots == 2);
}

TEST_CASE("beta diversity percentiles are stable under plot reordering") {
  // Permuting plots (with their labels) leaves empirical values identical and
  // percentiles statistically unchanged; the null is resampled, so allow a
  // few points of drift.
  const auto ab = sadiv::io::read_matrix_csv(kDataDir / "rutor_abundance.csv",
                                             sadiv::io::MatrixKind::kAbundance);
  std::vector<std::string> labels;
  std::ifstream in(kDataDir / "rutor_stages.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    labels.push_back(line.substr(line.find(',') + 1));
  }
  REQUIRE(labels.size() == 59);

  auto Z = sadiv::SimilarityMatrix::identity(45);
  const auto base = sadiv::run_beta_diversity(ab.values, labels, Z, 2.0, 400, 17, true);

  // Reverse the plot order.
  Eigen::MatrixXd rev = ab.values.colwise().reverse();
  std::vector<std::string> rl(labels.rbegin(), labels.rend());
  const auto flipped = sadiv::run_beta_diversity(rev, rl, Z, 2.0, 400, 17, true);

  for (const auto& s : base.stages) {
    const auto it = std::find_if(flipped.stages.begin(), flipped.stages.end(),
                                 [&](const auto& f) { return f.stage == s.stage; });
    REQUIRE(it != flipped.stages.end());
    CHECK(it->empirical == doctest::Approx(s.empirical).epsilon(1e-12));
    CHECK(std::abs(it->percentile - s.percentile) < 6.0);
  }
}

TEST_CASE("beta diversity input validation") {
  Eigen::MatrixXd ab(2, 3);
  ab << 1, 2, 3, 0, 0, 0;
  auto Z = sadiv::SimilarityMatrix::identity(3);
  CHECK_THROWS_AS(sadiv::run_beta_diversity(ab, {"a", "a"}, Z, 2.0, 10, 1, true),
                  sadiv::InvalidInput);  // zero-abundance plot
  Eigen::MatrixXd ok(2, 3);
  ok << 1, 2, 3, 3, 2, 1;
  CHECK_THROWS_AS(sadiv::run_beta_diversity(ok, {"a"}, Z, 2.0, 10, 1, true),
                  sadiv::InvalidInput);  // labels do not cover plots
  auto Z4 = sadiv::SimilarityMatrix::identity(4);
  CHECK_THROWS_AS(sadiv::run_beta_diversity(ok, {"a", "b"}, Z4, 2.0, 10, 1, true),
                  sadiv::InvalidInput);  // species mismatch
}
