#include "sadiv/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "sadiv/clustering.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/info.hpp"
#include "sadiv/parallel.hpp"
#include "sadiv/rng.hpp"
#include "sadiv/stats.hpp"
#include "sadiv/wasserstein.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sadiv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<double> upper_triangle(const Eigen::MatrixXd& M) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M.rows() * (M.rows() - 1) / 2));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < M.cols(); ++j) out.push_back(M(i, j));
  }
  return out;
}

}  // namespace

std::vector<LatticeElement> load_planted_lattice(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidInput("cannot open lattice file " + csv_path);
  std::vector<LatticeElement> out;
  std::string line;
  std::getline(in, line);  // header: element,x,y,group
  std::vector<std::string> group_names;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) throw InvalidInput("lattice row is not element,x,y,group");
    LatticeElement e;
    e.x = std::stod(fields[1]);
    e.y = std::stod(fields[2]);
    auto it = std::find(group_names.begin(), group_names.end(), fields[3]);
    if (it == group_names.end()) {
      group_names.push_back(fields[3]);
      e.group = static_cast<int>(group_names.size()) - 1;
    } else {
      e.group = static_cast<int>(it - group_names.begin());
    }
    out.push_back(e);
  }
  if (out.empty()) throw InvalidInput("lattice file has no elements");
  return out;
}

PlantedReport run_planted_experiment(const PlantedConfig& config,
                                     bool use_structure) {
  if (config.lattice.empty()) throw InvalidInput("planted config has no lattice");
  const auto n = static_cast<Eigen::Index>(config.lattice.size());
  int n_groups = 0;
  for (const auto& e : config.lattice) n_groups = std::max(n_groups, e.group + 1);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_groups));
  Eigen::MatrixXd coords(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = config.lattice[static_cast<std::size_t>(i)];
    coords(i, 0) = e.x;
    coords(i, 1) = e.y;
    groups[static_cast<std::size_t>(e.group)].push_back(static_cast<int>(i));
  }
  if (n_groups != 3) throw InvalidInput("planted lattice must have 3 groups");

  SimilarityMatrix Z = SimilarityMatrix::identity(n);
  if (use_structure) {
    const auto D = DistanceMatrix::from_points(coords,
                                               DistanceMatrix::Metric::kManhattan);
    Z = similarity_from_metric(D, 1.0);
    if (!Z.certify_pd()) {
      throw NumericalError("lattice similarity failed PD certification");
    }
  }

  const Distribution uniform = Distribution::uniform(n);
  const int per_group = config.distributions_per_group;
  const int members = n_groups * per_group;
  std::vector<int> truth3, truth2;
  for (int g = 0; g < n_groups; ++g) {
    for (int a = 0; a < per_group; ++a) {
      truth3.push_back(g);
      truth2.push_back(g <= 1 ? 0 : 1);  // adjacent groups merge at k = 2
    }
  }

  PlantedReport report;
  report.use_structure = use_structure;
  report.records.resize(config.m_samples.size() *
                        static_cast<std::size_t>(config.runs));

  CounterRng master(config.seed);
  const int threads = parallel::effective_threads();
  for (std::size_t mi = 0; mi < config.m_samples.size(); ++mi) {
    const int m_draws = config.m_samples[mi];
    CounterRng m_stream = master.derive(mi);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int run = 0; run < config.runs; ++run) {
      CounterRng rng = m_stream.derive(static_cast<std::uint64_t>(run));
      std::vector<Distribution> sample;
      sample.reserve(static_cast<std::size_t>(members));
      for (int g = 0; g < n_groups; ++g) {
        for (int a = 0; a < per_group; ++a) {
          Distribution raw = sample_group_distribution(
              groups[static_cast<std::size_t>(g)], m_draws, n, rng);
          sample.push_back(
              smooth_to_interior(raw, config.smoothing_lambda, uniform));
        }
      }
      const auto ensemble = WeightedEnsemble::uniform_weights(std::move(sample));

      PlantedRunRecord rec;
      rec.m = m_draws;
      rec.run = run;
      for (int k = config.k_min; k <= config.k_max; ++k) {
        KMeansOptions opts;
        opts.n_restarts = config.restarts;
        opts.max_iters = config.max_iters;
        opts.seed = rng.derive(static_cast<std::uint64_t>(k)).next_u64();
        const auto res = bregman_kmeans(Z, config.alpha, ensemble, k, opts);
        rec.explained_by_k.push_back(res.best.explained_fraction);
        if (k == 2) rec.ami_k2 = adjusted_mutual_information(truth2, res.best.assignments);
        if (k == 3) rec.ami_k3 = adjusted_mutual_information(truth3, res.best.assignments);
      }
      report.records[mi * static_cast<std::size_t>(config.runs) +
                     static_cast<std::size_t>(run)] = std::move(rec);
    }
  }
  (void)threads;

  for (std::size_t mi = 0; mi < config.m_samples.size(); ++mi) {
    std::vector<double> a2, a3;
    for (int run = 0; run < config.runs; ++run) {
      const auto& rec = report.records[mi * static_cast<std::size_t>(config.runs) +
                                       static_cast<std::size_t>(run)];
      a2.push_back(rec.ami_k2);
      a3.push_back(rec.ami_k3);
    }
    report.median_ami_k2_by_m.push_back(median(a2));
    report.median_ami_k3_by_m.push_back(median(a3));
  }
  return report;
}

RuntimeReport run_runtime_experiment(const RuntimeConfig& config) {
  if (config.support < 2 || config.embed_dim < 1) {
    throw InvalidInput("runtime config needs support >= 2 and embed_dim >= 1");
  }
  RuntimeReport report;
  CounterRng master(config.seed);

  // Wall-clock comparisons need a quiet machine state: everything below runs
  // on one thread, including the kernels' internal pair loops.
  parallel::ScopedSerial serial;

  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const int m = config.sizes[si];
    if (m < 2) throw InvalidInput("runtime sizes must be >= 2");
    CounterRng size_stream = master.derive(si);
    std::vector<RuntimeRunRecord> size_records;

    for (int run = 0; run < config.runs_per_size; ++run) {
      CounterRng rng = size_stream.derive(static_cast<std::uint64_t>(run));

      Eigen::MatrixXd X(config.support, config.embed_dim);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.next_double();
      }
      const auto D =
          DistanceMatrix::from_points(X, DistanceMatrix::Metric::kEuclidean);
      auto Z = similarity_from_metric(D, 1.0);
      if (!Z.certify_pd()) {
        throw NumericalError("embedding similarity failed PD certification");
      }

      std::vector<Distribution> dists;
      dists.reserve(static_cast<std::size_t>(m));
      for (int a = 0; a < m; ++a) {
        dists.push_back(floor_to_interior(
            sample_uniform_simplex(config.support, rng), kInteriorFloor));
      }

      RuntimeRunRecord rec;
      rec.size = m;
      rec.run = run;

      auto t0 = std::chrono::steady_clock::now();
      const auto ot = all_pairs_wasserstein(D, dists);
      rec.ot_seconds = seconds_since(t0);

      t0 = std::chrono::steady_clock::now();
      const auto naive = all_pairs_jbd_naive(Z, config.alpha, dists);
      rec.naive_seconds = seconds_since(t0);

      t0 = std::chrono::steady_clock::now();
      const auto fast = all_pairs_jbd_fast(Z, config.alpha, dists);
      rec.fast_seconds = seconds_since(t0);

      rec.max_fast_naive_diff =
          (fast.values - naive.values).cwiseAbs().maxCoeff();
      if (rec.max_fast_naive_diff > 1e-10) {
        throw NumericalError("vectorized all-pairs diverged from the naive path");
      }

      const auto ot_ut = upper_triangle(ot.values);
      const auto jb_ut = upper_triangle(naive.values);
      rec.pearson_r = pearson_r(ot_ut, jb_ut);
      rec.kendall_tau = kendall_tau(ot_ut, jb_ut);

      size_records.push_back(rec);
      report.records.push_back(rec);
    }

    RuntimeSizeSummary s;
    s.size = m;
    std::vector<double> ot_t, nv_t, ft_t, rs, ts;
    double maxdiff = 0.0;
    for (const auto& r : size_records) {
      ot_t.push_back(r.ot_seconds);
      nv_t.push_back(r.naive_seconds);
      ft_t.push_back(r.fast_seconds);
      rs.push_back(r.pearson_r);
      ts.push_back(r.kendall_tau);
      maxdiff = std::max(maxdiff, r.max_fast_naive_diff);
    }
    s.median_ot_seconds = median(ot_t);
    s.median_naive_seconds = median(nv_t);
    s.median_fast_seconds = median(ft_t);
    s.median_pearson_r = median(rs);
    s.median_kendall_tau = median(ts);
    s.max_fast_naive_diff = maxdiff;
    report.summaries.push_back(s);
  }
  return report;
}

BetaDiversityReport run_beta_diversity(const Eigen::MatrixXd& abundances,
                                       const std::vector<std::string>& stage_labels,
                                       const SimilarityMatrix& Z, double alpha,
                                       int n_null, std::uint64_t seed,
                                       bool with_replacement) {
  const Eigen::Index plots = abundances.rows();
  if (static_cast<Eigen::Index>(stage_labels.size()) != plots) {
    throw InvalidInput("stage labels do not cover all plots");
  }
  if (abundances.cols() != Z.size()) {
    throw InvalidInput("abundance table and similarity matrix species differ");
  }
  if (n_null < 1) throw InvalidInput("null sample count must be >= 1");

  std::vector<Distribution> rows;
  rows.reserve(static_cast<std::size_t>(plots));
  for (Eigen::Index r = 0; r < plots; ++r) {
    const double total = abundances.row(r).sum();
    if (!(total > 0.0)) {
      throw InvalidInput("plot " + std::to_string(r) + " has zero abundance");
    }
    rows.push_back(floor_to_interior(
        Distribution::trusted(abundances.row(r) / total), kInteriorFloor));
  }

  auto info_of = [&](const std::vector<int>& idx) {
    std::vector<Distribution> members;
    members.reserve(idx.size());
    for (int i : idx) members.push_back(rows[static_cast<std::size_t>(i)]);
    return bregman_information(Z, alpha,
                               WeightedEnsemble::uniform_weights(std::move(members)))
        .value;
  };

  // Preserve first-appearance order of the stages.
  std::vector<std::string> stage_names;
  for (const auto& s : stage_labels) {
    if (std::find(stage_names.begin(), stage_names.end(), s) == stage_names.end()) {
      stage_names.push_back(s);
    }
  }

  BetaDiversityReport report;
  report.alpha = alpha;
  report.n_null = n_null;
  report.with_replacement = with_replacement;

  CounterRng master(seed);
  const int threads = parallel::effective_threads();
  for (std::size_t sidx = 0; sidx < stage_names.size(); ++sidx) {
    const auto& stage = stage_names[sidx];
    std::vector<int> members;
    for (Eigen::Index r = 0; r < plots; ++r) {
      if (stage_labels[static_cast<std::size_t>(r)] == stage) {
        members.push_back(static_cast<int>(r));
      }
    }
    StageBetaDiversity sr;
    sr.stage = stage;
    sr.n_plots = static_cast<int>(members.size());
    sr.empirical = info_of(members);

    sr.null_values.resize(static_cast<std::size_t>(n_null));
    CounterRng stage_stream = master.derive(sidx);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int t = 0; t < n_null; ++t) {
      CounterRng rng = stage_stream.derive(static_cast<std::uint64_t>(t));
      std::vector<int> idx;
      idx.reserve(members.size());
      if (with_replacement) {
        for (std::size_t a = 0; a < members.size(); ++a) {
          idx.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(plots))));
        }
      } else {
        std::vector<int> pool(static_cast<std::size_t>(plots));
        for (Eigen::Index i = 0; i < plots; ++i) pool[static_cast<std::size_t>(i)] = static_cast<int>(i);
        for (std::size_t a = 0; a < members.size(); ++a) {
          const auto pick = static_cast<std::size_t>(
              rng.next_below(static_cast<std::uint64_t>(plots) - a));
          idx.push_back(pool[pick]);
          std::swap(pool[pick], pool[static_cast<std::size_t>(plots) - 1 - a]);
        }
      }
      sr.null_values[static_cast<std::size_t>(t)] = info_of(idx);
    }
    sr.percentile = percentile_below(sr.null_values, sr.empirical);
    report.stages.push_back(std::move(sr));
  }
  (void)threads;
  return report;
}

SimilarityMatrix rutor_similarity(const Eigen::MatrixXd& traits) {
  if (traits.rows() < 2 || traits.cols() < 1) {
    throw InvalidInput("trait matrix needs at least two species and one trait");
  }
  Eigen::MatrixXd standardized = traits;
  const auto n = static_cast<double>(traits.rows());
  for (Eigen::Index c = 0; c < traits.cols(); ++c) {
    const double mu = traits.col(c).mean();
    const double sd = std::sqrt((traits.col(c).array() - mu).square().sum() /
                                (n - 1.0));
    if (!(sd > 0.0)) {
      throw InvalidInput("trait column " + std::to_string(c) +
                         " is constant; cannot standardize");
    }
    standardized.col(c) = (traits.col(c).array() - mu) / sd;
  }
  auto D = DistanceMatrix::from_points(standardized,
                                       DistanceMatrix::Metric::kEuclidean);
  auto Z = similarity_linear_from_metric(D);
  if (!Z.pd_certificate()) {
    throw NumericalError("trait similarity matrix is not positive definite");
  }
  return Z;
}

}  // namespace sadiv
