// Command-line front end: structure-aware entropies, divergences, clustering,
// similarity-matrix construction, exact W1, and the experiment harness.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sadiv/clustering.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/experiments.hpp"
#include "sadiv/info.hpp"
#include "sadiv/io.hpp"
#include "sadiv/parallel.hpp"
#include "sadiv/stats.hpp"
#include "sadiv/version.hpp"
#include "sadiv/wasserstein.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunContext {
  std::string subcommand;
  json parameters = json::object();
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

json make_manifest(const RunContext& ctx) {
  json inputs = json::array();
  for (const auto& p : ctx.inputs) {
    inputs.push_back({{"path", p.string()}, {"fnv1a64", sadiv::io::file_digest(p)}});
  }
  json outputs = json::array();
  for (const auto& p : ctx.outputs) outputs.push_back(p.string());
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                ctx.start)
          .count();
  return json{{"schema_version", sadiv::kManifestSchemaVersion},
              {"library_version", sadiv::kVersion},
              {"subcommand", ctx.subcommand},
              {"parameters", ctx.parameters},
              {"inputs", inputs},
              {"outputs", outputs},
              {"seed", ctx.seed},
              {"threads", sadiv::parallel::effective_threads()},
              {"wall_ms", wall_ms}};
}

void write_report(const fs::path& path, json report, RunContext& ctx) {
  ctx.outputs.push_back(path);
  report["manifest"] = make_manifest(ctx);
  std::ofstream out(path);
  if (!out) throw sadiv::InvalidInput("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

std::uint64_t resolve_seed(RunContext& ctx) {
  if (!ctx.seed_given) {
    std::random_device rd;
    ctx.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return ctx.seed;
}

sadiv::SimilarityMatrix load_similarity(const std::string& spec,
                                        Eigen::Index dimension,
                                        RunContext& ctx) {
  if (spec == "identity") {
    ctx.parameters["sim"] = "identity";
    return sadiv::SimilarityMatrix::identity(dimension);
  }
  ctx.inputs.push_back(spec);
  auto table = sadiv::io::read_matrix_csv(spec, sadiv::io::MatrixKind::kSimilarity);
  auto Z = sadiv::io::to_similarity(table);
  if (Z.size() != dimension) {
    throw sadiv::InvalidInput("similarity matrix is " + std::to_string(Z.size()) +
                              "-dimensional, distributions have " +
                              std::to_string(dimension) + " elements");
  }
  return Z;
}

sadiv::SimilarityMatrix certified(sadiv::SimilarityMatrix Z) {
  if (!Z.certify_pd()) {
    throw sadiv::NumericalError(
        "similarity matrix failed positive definite certification");
  }
  return Z;
}

std::vector<sadiv::Distribution> maybe_floor(std::vector<sadiv::Distribution> in,
                                             std::optional<double> eps) {
  if (!eps) return in;
  for (auto& d : in) d = sadiv::floor_to_interior(d, *eps);
  return in;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_square_csv(const fs::path& path, const Eigen::MatrixXd& M,
                      const std::vector<std::string>& ids) {
  sadiv::io::Table t;
  t.column_names = ids;
  t.row_ids = ids;
  t.values = M;
  sadiv::io::write_table_csv(path, t);
}

std::vector<std::string> default_ids(Eigen::Index n, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"structure-aware divergence toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  if (const char* env = std::getenv("SADIV_THREADS")) {
    threads = std::atoi(env);
  }
  app.add_option("--threads", threads,
                 "thread cap (0 = hardware default; overrides SADIV_THREADS)");

  RunContext ctx;
  std::function<void()> action;

  // ---- entropy ----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("entropy", "structure-aware entropy of distributions");
    auto alpha = std::make_shared<double>(2.0);
    auto dist = std::make_shared<std::string>();
    auto sim = std::make_shared<std::string>("identity");
    auto floor_eps = std::make_shared<double>(-1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--alpha", *alpha, "entropy order (>= 0)");
    cmd->add_option("--dist", *dist, "distribution CSV (one row per distribution)")->required();
    cmd->add_option("--sim", *sim, "similarity CSV or 'identity'");
    cmd->add_option("--floor", *floor_eps, "floor distributions to this interior epsilon");
    cmd->add_option("--out", *out, "write a JSON report here");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "entropy";
      ctx.parameters = {{"alpha", *alpha}, {"dist", *dist}, {"sim", *sim}};
      action = [=, &ctx] {
        ctx.inputs.push_back(*dist);
        auto rows = sadiv::io::read_distributions_csv(*dist);
        rows = maybe_floor(std::move(rows),
                           *floor_eps > 0 ? std::optional<double>(*floor_eps)
                                          : std::nullopt);
        auto Z = load_similarity(*sim, rows.front().size(), ctx);
        json values = json::array();
        for (const auto& p : rows) {
          const double h = sadiv::entropy(Z, *alpha, p);
          std::cout << sadiv::io::format_double(h) << '\n';
          values.push_back(h);
        }
        if (!out->empty()) {
          write_report(*out, json{{"entropy", values}}, ctx);
        }
      };
    });
  }

  // ---- divergence -------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("divergence", "structure-aware divergence d(p || q)");
    auto alpha = std::make_shared<double>(2.0);
    auto pfile = std::make_shared<std::string>();
    auto qfile = std::make_shared<std::string>();
    auto sim = std::make_shared<std::string>("identity");
    auto floor_eps = std::make_shared<double>(-1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--alpha", *alpha, "divergence order (>= 2)");
    cmd->add_option("--p", *pfile, "first distribution CSV")->required();
    cmd->add_option("--q", *qfile, "second distribution CSV")->required();
    cmd->add_option("--sim", *sim, "similarity CSV or 'identity'");
    cmd->add_option("--floor", *floor_eps, "floor distributions to this interior epsilon");
    cmd->add_option("--out", *out, "write a JSON report here");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "divergence";
      ctx.parameters = {{"alpha", *alpha}, {"p", *pfile}, {"q", *qfile}, {"sim", *sim}};
      action = [=, &ctx] {
        ctx.inputs.push_back(*pfile);
        auto prows = sadiv::io::read_distributions_csv(*pfile);
        std::vector<sadiv::Distribution> qrows;
        if (*qfile == *pfile) {
          qrows = prows;
        } else {
          ctx.inputs.push_back(*qfile);
          qrows = sadiv::io::read_distributions_csv(*qfile);
        }
        const std::optional<double> eps =
            *floor_eps > 0 ? std::optional<double>(*floor_eps)
                           : std::optional<double>(sadiv::kInteriorFloor);
        prows = maybe_floor(std::move(prows), eps);
        qrows = maybe_floor(std::move(qrows), eps);
        auto Z = certified(load_similarity(*sim, prows.front().size(), ctx));
        const double d = sadiv::divergence(Z, *alpha, prows.front(), qrows.front());
        std::cout << sadiv::io::format_double(d) << '\n';
        if (!out->empty()) write_report(*out, json{{"divergence", d}}, ctx);
      };
    });
  }

  // ---- jbd-matrix -------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("jbd-matrix", "all-pairs Jensen-Bregman dissimilarity");
    auto alpha = std::make_shared<double>(2.0);
    auto dists = std::make_shared<std::string>();
    auto sim = std::make_shared<std::string>("identity");
    auto method = std::make_shared<std::string>("fast");
    auto format = std::make_shared<std::string>("csv");
    auto floor_eps = std::make_shared<double>(-1.0);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--alpha", *alpha, "divergence order (>= 2)");
    cmd->add_option("--dists", *dists, "distribution CSV, one row each")->required();
    cmd->add_option("--sim", *sim, "similarity CSV or 'identity'");
    cmd->add_option("--method", *method, "naive | fast")
        ->check(CLI::IsMember({"naive", "fast"}));
    cmd->add_option("--format", *format, "csv | json output")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--floor", *floor_eps, "floor distributions to this interior epsilon");
    cmd->add_option("--out", *out, "output path")->required();
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "jbd-matrix";
      ctx.parameters = {{"alpha", *alpha}, {"method", *method}, {"sim", *sim}};
      action = [=, &ctx] {
        ctx.inputs.push_back(*dists);
        auto rows = sadiv::io::read_distributions_csv(*dists);
        const std::optional<double> eps =
            *floor_eps > 0 ? std::optional<double>(*floor_eps)
                           : std::optional<double>(sadiv::kInteriorFloor);
        rows = maybe_floor(std::move(rows), eps);
        auto Z = certified(load_similarity(*sim, rows.front().size(), ctx));
        const auto result = *method == "naive"
                                ? sadiv::all_pairs_jbd_naive(Z, *alpha, rows)
                                : sadiv::all_pairs_jbd_fast(Z, *alpha, rows);
        if (*format == "json") {
          write_report(*out, json{{"jbd", matrix_to_json(result.values)}}, ctx);
        } else {
          write_square_csv(*out, result.values,
                           default_ids(result.values.rows(), "d"));
          ctx.outputs.push_back(*out);
        }
        std::cout << "wrote " << *out << '\n';
      };
    });
  }

  // ---- cluster ----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("cluster", "Bregman k-means over distributions");
    auto k = std::make_shared<int>(2);
    auto alpha = std::make_shared<double>(2.0);
    auto restarts = std::make_shared<int>(100);
    auto dists = std::make_shared<std::string>();
    auto sim = std::make_shared<std::string>("identity");
    auto weights_column = std::make_shared<std::string>();
    auto floor_eps = std::make_shared<double>(-1.0);
    auto out = std::make_shared<std::string>();
    auto centroids_out = std::make_shared<std::string>();
    cmd->add_option("--k", *k, "number of clusters")->required();
    cmd->add_option("--alpha", *alpha, "divergence order (>= 2)");
    cmd->add_option("--restarts", *restarts, "random restarts");
    cmd->add_option("--seed", ctx.seed, "rng seed")->each([&ctx](const std::string&) {
      ctx.seed_given = true;
    });
    cmd->add_option("--dists", *dists, "distribution CSV, one row each")->required();
    cmd->add_option("--sim", *sim, "similarity CSV or 'identity'");
    cmd->add_option("--weights-column", *weights_column,
                    "column holding member weights (renormalized)");
    cmd->add_option("--floor", *floor_eps, "floor distributions to this interior epsilon");
    cmd->add_option("--out", *out, "JSON report path (default stdout)");
    cmd->add_option("--centroids-out", *centroids_out, "centroid CSV path");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "cluster";
      action = [=, &ctx] {
        resolve_seed(ctx);
        ctx.parameters = {{"k", *k},
                          {"alpha", *alpha},
                          {"restarts", *restarts},
                          {"sim", *sim},
                          {"weights_column", *weights_column}};
        ctx.inputs.push_back(*dists);
        const std::optional<double> eps =
            *floor_eps > 0 ? std::optional<double>(*floor_eps)
                           : std::optional<double>(sadiv::kInteriorFloor);
        sadiv::WeightedEnsemble ensemble = [&] {
          if (weights_column->empty()) {
            auto rows = maybe_floor(sadiv::io::read_distributions_csv(*dists), eps);
            return sadiv::WeightedEnsemble::uniform_weights(std::move(rows));
          }
          auto wr = sadiv::io::read_weighted_distributions_csv(*dists, *weights_column);
          wr.distributions = maybe_floor(std::move(wr.distributions), eps);
          return sadiv::WeightedEnsemble::validated(std::move(wr.distributions),
                                                    wr.weights);
        }();
        auto Z = certified(load_similarity(*sim, ensemble.dimension(), ctx));
        sadiv::KMeansOptions opts;
        opts.n_restarts = *restarts;
        opts.seed = ctx.seed;
        const auto report = sadiv::bregman_kmeans(Z, *alpha, ensemble, *k, opts);

        json j{{"k", *k},
               {"assignments", report.best.assignments},
               {"explained_fraction", report.best.explained_fraction},
               {"total_info", report.total_info},
               {"between_info", report.between_info},
               {"within_info", report.within_info},
               {"restart_objectives", report.restart_objectives},
               {"degenerate", report.degenerate}};
        if (!centroids_out->empty()) {
          sadiv::io::write_distributions_csv(
              *centroids_out, default_ids(ensemble.dimension(), "e"),
              report.centroids);
          ctx.outputs.push_back(*centroids_out);
          j["centroids_csv"] = *centroids_out;
        }
        if (!out->empty()) {
          write_report(*out, j, ctx);
        } else {
          j["manifest"] = make_manifest(ctx);
          std::cout << j.dump(2) << '\n';
        }
      };
    });
  }

  // ---- wasserstein ------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("wasserstein", "exact W1 on a finite metric");
    auto dist_csv = std::make_shared<std::string>();
    auto dists = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--distance", *dist_csv, "metric distance CSV")->required();
    cmd->add_option("--dists", *dists, "distribution CSV (two or more rows)")->required();
    cmd->add_option("--out", *out, "matrix CSV path (needed for > 2 rows)");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "wasserstein";
      ctx.parameters = {{"distance", *dist_csv}};
      action = [=, &ctx] {
        ctx.inputs.push_back(*dist_csv);
        ctx.inputs.push_back(*dists);
        auto D = sadiv::io::to_distance(
            sadiv::io::read_matrix_csv(*dist_csv, sadiv::io::MatrixKind::kDistance));
        auto rows = sadiv::io::read_distributions_csv(*dists);
        if (rows.size() < 2) {
          throw sadiv::InvalidInput("need at least two distribution rows");
        }
        if (rows.size() == 2) {
          const auto r = sadiv::wasserstein1(D, rows[0], rows[1]);
          std::cout << sadiv::io::format_double(r.distance) << '\n';
          if (!out->empty()) write_report(*out, json{{"wasserstein1", r.distance}}, ctx);
          return;
        }
        if (out->empty()) {
          throw sadiv::InvalidInput("--out is required for more than two rows");
        }
        const auto M = sadiv::all_pairs_wasserstein(D, rows);
        write_square_csv(*out, M.values, default_ids(M.values.rows(), "d"));
        ctx.outputs.push_back(*out);
        std::cout << "wrote " << *out << '\n';
      };
    });
  }

  // ---- sim-from-dist ----------------------------------------------------
  {
    auto* cmd = app.add_subcommand("sim-from-dist",
                                   "similarity matrix exp(-tau d) from a metric");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto tau = std::make_shared<double>(0.0);
    auto target = std::make_shared<double>(0.0);
    auto linear = std::make_shared<bool>(false);
    cmd->add_option("--in", *in, "distance CSV")->required();
    cmd->add_option("--out", *out, "similarity CSV path")->required();
    cmd->add_option("--tau", *tau, "scale parameter (> 0)");
    cmd->add_option("--target-median", *target,
                    "calibrate tau to this median off-diagonal similarity");
    cmd->add_flag("--linear", *linear, "use 1 - d/max(d) instead of exp(-tau d)");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "sim-from-dist";
      action = [=, &ctx] {
        ctx.inputs.push_back(*in);
        auto table = sadiv::io::read_matrix_csv(*in, sadiv::io::MatrixKind::kDistance);
        auto D = sadiv::io::to_distance(table);
        sadiv::SimilarityMatrix Z = [&] {
          if (*linear) {
            ctx.parameters = {{"mode", "linear"}};
            return sadiv::similarity_linear_from_metric(D);
          }
          double t = *tau;
          if (*target > 0.0) t = sadiv::calibrate_tau(D, *target);
          if (!(t > 0.0)) {
            throw sadiv::InvalidInput("provide --tau > 0 or --target-median");
          }
          ctx.parameters = {{"mode", "exponential"}, {"tau", t}};
          auto sim = sadiv::similarity_from_metric(D, t);
          sim.certify_pd();
          return sim;
        }();
        write_square_csv(*out, Z.matrix(), table.column_names);
        ctx.outputs.push_back(*out);
        const auto& cert = Z.pd_certificate();
        json j{{"positive_definite", cert.has_value()},
               {"lambda_min", cert ? cert->lambda_min : 0.0},
               {"parameters", ctx.parameters}};
        std::cout << j.dump(2) << '\n';
      };
    });
  }

  // ---- sim-from-hierarchy -------------------------------------------------
  {
    auto* cmd = app.add_subcommand("sim-from-hierarchy",
                                   "similarity from code paths and a level map");
    auto paths = std::make_shared<std::string>();
    auto levels = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--paths", *paths, "CSV of element,code1,...,codeL")->required();
    cmd->add_option("--levels", *levels, "JSON level->similarity map")->required();
    cmd->add_option("--out", *out, "similarity CSV path")->required();
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "sim-from-hierarchy";
      action = [=, &ctx] {
        ctx.inputs.push_back(*paths);
        ctx.inputs.push_back(*levels);
        auto h = sadiv::io::read_hierarchy(*paths, *levels);
        auto Z = sadiv::similarity_from_hierarchy(h);
        Z.certify_pd();
        write_square_csv(*out, Z.matrix(),
                         default_ids(Z.size(), "e"));
        ctx.outputs.push_back(*out);
        const auto& cert = Z.pd_certificate();
        std::cout << json{{"positive_definite", cert.has_value()},
                          {"lambda_min", cert ? cert->lambda_min : 0.0}}
                         .dump(2)
                  << '\n';
      };
    });
  }

  // ---- nearest-pd ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("nearest-pd",
                                   "nearest positive definite similarity matrix");
    auto in = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto opts = std::make_shared<sadiv::NearestPdOptions>();
    cmd->add_option("--in", *in, "symmetric matrix CSV")->required();
    cmd->add_option("--out", *out, "output CSV path");
    cmd->add_option("--delta", opts->delta, "required smallest eigenvalue");
    cmd->add_option("--cap", opts->offdiag_cap, "off-diagonal upper bound");
    cmd->add_option("--tol", opts->tol, "convergence tolerance");
    cmd->add_option("--max-iters", opts->max_iters, "projection sweep cap");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "nearest-pd";
      action = [=, &ctx] {
        ctx.inputs.push_back(*in);
        auto table = sadiv::io::read_table_csv(*in);
        ctx.parameters = {{"delta", opts->delta},
                          {"cap", opts->offdiag_cap},
                          {"tol", opts->tol},
                          {"max_iters", opts->max_iters}};
        const auto res = sadiv::nearest_pd_similarity(table.values, *opts);
        if (!res.converged) {
          throw sadiv::NumericalError(
              "nearest-pd projections did not converge in " +
              std::to_string(opts->max_iters) + " sweeps");
        }
        if (!out->empty()) {
          write_square_csv(*out, res.similarity.matrix(), table.column_names);
          ctx.outputs.push_back(*out);
        }
        const auto& cert = res.similarity.pd_certificate();
        std::cout << json{{"converged", res.converged},
                          {"iterations", res.iterations},
                          {"lambda_min", cert ? cert->lambda_min : 0.0},
                          {"matrix", matrix_to_json(res.similarity.matrix())}}
                         .dump(2)
                  << '\n';
      };
    });
  }

  // ---- exp --------------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("exp", "experiment harness");
  exp_cmd->require_subcommand(1);

  {
    auto* cmd = exp_cmd->add_subcommand("planted", "planted-partition recovery");
    auto lattice = std::make_shared<std::string>("data/planted_lattice.csv");
    auto runs = std::make_shared<int>(50);
    auto restarts = std::make_shared<int>(100);
    auto identity = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>("planted_report.json");
    auto csv = std::make_shared<std::string>();
    cmd->add_option("--lattice", *lattice, "frozen lattice CSV");
    cmd->add_option("--runs", *runs, "runs per sample count");
    cmd->add_option("--restarts", *restarts, "k-means restarts");
    cmd->add_flag("--identity", *identity, "use Z = I instead of the structure");
    cmd->add_option("--seed", ctx.seed, "rng seed")->each([&ctx](const std::string&) {
      ctx.seed_given = true;
    });
    cmd->add_option("--out", *out, "JSON report path");
    cmd->add_option("--csv", *csv, "plot-ready CSV path");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "exp planted";
      action = [=, &ctx] {
        resolve_seed(ctx);
        ctx.inputs.push_back(*lattice);
        sadiv::PlantedConfig config;
        config.lattice = sadiv::load_planted_lattice(*lattice);
        config.runs = *runs;
        config.restarts = *restarts;
        config.seed = ctx.seed;
        ctx.parameters = {{"runs", *runs},
                          {"restarts", *restarts},
                          {"identity", *identity},
                          {"m_samples", config.m_samples},
                          {"alpha", config.alpha}};
        const auto report = sadiv::run_planted_experiment(config, !*identity);

        json records = json::array();
        for (const auto& r : report.records) {
          records.push_back({{"m", r.m},
                             {"run", r.run},
                             {"explained_by_k", r.explained_by_k},
                             {"ami_k2", r.ami_k2},
                             {"ami_k3", r.ami_k3}});
        }
        json j{{"use_structure", report.use_structure},
               {"m_samples", config.m_samples},
               {"median_ami_k2_by_m", report.median_ami_k2_by_m},
               {"median_ami_k3_by_m", report.median_ami_k3_by_m},
               {"records", records}};
        if (!csv->empty()) {
          std::ofstream c(*csv);
          c << "m,run,k,explained_fraction,ami_k2,ami_k3\n";
          for (const auto& r : report.records) {
            for (std::size_t ki = 0; ki < r.explained_by_k.size(); ++ki) {
              c << r.m << ',' << r.run << ',' << (config.k_min + static_cast<int>(ki))
                << ',' << sadiv::io::format_double(r.explained_by_k[ki]) << ','
                << sadiv::io::format_double(r.ami_k2) << ','
                << sadiv::io::format_double(r.ami_k3) << '\n';
            }
          }
          ctx.outputs.push_back(*csv);
        }
        write_report(*out, j, ctx);
        std::cout << "wrote " << *out << '\n';
      };
    });
  }

  {
    auto* cmd = exp_cmd->add_subcommand("runtime", "all-pairs runtime vs exact OT");
    auto sizes = std::make_shared<std::vector<int>>();
    auto runs = std::make_shared<int>(50);
    auto alpha = std::make_shared<double>(2.0);
    auto out = std::make_shared<std::string>("runtime_report.json");
    auto csv = std::make_shared<std::string>();
    cmd->add_option("--sizes", *sizes, "input sizes (default 10 20 50 100 200)");
    cmd->add_option("--runs", *runs, "runs per size");
    cmd->add_option("--alpha", *alpha, "divergence order");
    cmd->add_option("--seed", ctx.seed, "rng seed")->each([&ctx](const std::string&) {
      ctx.seed_given = true;
    });
    cmd->add_option("--out", *out, "JSON report path");
    cmd->add_option("--csv", *csv, "per-run CSV path");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "exp runtime";
      action = [=, &ctx] {
        resolve_seed(ctx);
        sadiv::RuntimeConfig config;
        if (!sizes->empty()) config.sizes = *sizes;
        config.runs_per_size = *runs;
        config.alpha = *alpha;
        config.seed = ctx.seed;
        ctx.parameters = {{"sizes", config.sizes},
                          {"runs", *runs},
                          {"alpha", *alpha},
                          {"support", config.support},
                          {"embed_dim", config.embed_dim}};
        const auto report = sadiv::run_runtime_experiment(config);

        json summaries = json::array();
        for (const auto& s : report.summaries) {
          summaries.push_back({{"size", s.size},
                               {"median_ot_seconds", s.median_ot_seconds},
                               {"median_naive_seconds", s.median_naive_seconds},
                               {"median_fast_seconds", s.median_fast_seconds},
                               {"median_pearson_r", s.median_pearson_r},
                               {"median_kendall_tau", s.median_kendall_tau},
                               {"max_fast_naive_diff", s.max_fast_naive_diff}});
        }
        json j{{"summaries", summaries}};
        if (!csv->empty()) {
          std::ofstream c(*csv);
          c << "size,run,ot_seconds,naive_seconds,fast_seconds,pearson_r,kendall_tau\n";
          for (const auto& r : report.records) {
            c << r.size << ',' << r.run << ','
              << sadiv::io::format_double(r.ot_seconds) << ','
              << sadiv::io::format_double(r.naive_seconds) << ','
              << sadiv::io::format_double(r.fast_seconds) << ','
              << sadiv::io::format_double(r.pearson_r) << ','
              << sadiv::io::format_double(r.kendall_tau) << '\n';
          }
          ctx.outputs.push_back(*csv);
        }
        write_report(*out, j, ctx);
        std::cout << "wrote " << *out << '\n';
      };
    });
  }

  {
    auto* cmd = exp_cmd->add_subcommand("beta-div",
                                        "stage beta-diversity with a null model");
    auto abundance = std::make_shared<std::string>();
    auto stages = std::make_shared<std::string>();
    auto traits = std::make_shared<std::string>();
    auto sim = std::make_shared<std::string>();
    auto alpha = std::make_shared<double>(2.0);
    auto n_null = std::make_shared<int>(1000);
    auto without_replacement = std::make_shared<bool>(false);
    auto out = std::make_shared<std::string>("beta_div_report.json");
    auto csv = std::make_shared<std::string>();
    cmd->add_option("--abundance", *abundance, "plot x species abundance CSV")->required();
    cmd->add_option("--stages", *stages, "plot,stage CSV")->required();
    cmd->add_option("--traits", *traits, "species x trait CSV (builds 1 - d/max similarity)");
    cmd->add_option("--sim", *sim, "similarity CSV or 'identity'");
    cmd->add_option("--alpha", *alpha, "divergence order");
    cmd->add_option("--n-null", *n_null, "null resample count");
    cmd->add_flag("--null-without-replacement", *without_replacement,
                  "resample plots without replacement");
    cmd->add_option("--seed", ctx.seed, "rng seed")->each([&ctx](const std::string&) {
      ctx.seed_given = true;
    });
    cmd->add_option("--out", *out, "JSON report path");
    cmd->add_option("--csv", *csv, "null distribution CSV path");
    cmd->callback([=, &ctx, &action] {
      ctx.subcommand = "exp beta-div";
      action = [=, &ctx] {
        resolve_seed(ctx);
        if (traits->empty() == sim->empty()) {
          throw sadiv::InvalidInput("provide exactly one of --traits or --sim");
        }
        ctx.inputs.push_back(*abundance);
        ctx.inputs.push_back(*stages);
        auto ab = sadiv::io::read_matrix_csv(*abundance,
                                             sadiv::io::MatrixKind::kAbundance);

        std::vector<std::string> labels;
        {
          // plot,stage rows with text labels; parsed by hand.
          std::ifstream in(*stages);
          std::string line;
          std::getline(in, line);
          while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto comma = line.find(',');
            if (comma == std::string::npos) {
              throw sadiv::InvalidInput("stage rows must be plot,stage");
            }
            labels.push_back(line.substr(comma + 1));
          }
        }
        if (labels.size() != static_cast<std::size_t>(ab.values.rows())) {
          throw sadiv::InvalidInput("stage labels do not cover all plots");
        }

        sadiv::SimilarityMatrix Z = [&]() -> sadiv::SimilarityMatrix {
          if (!traits->empty()) {
            ctx.inputs.push_back(*traits);
            auto tt = sadiv::io::read_matrix_csv(*traits,
                                                 sadiv::io::MatrixKind::kAbundance);
            if (tt.row_ids != ab.column_names) {
              throw sadiv::InvalidInput(
                  "trait species do not match abundance species");
            }
            return sadiv::rutor_similarity(tt.values);
          }
          return certified(load_similarity(*sim, ab.values.cols(), ctx));
        }();

        ctx.parameters = {{"alpha", *alpha},
                          {"n_null", *n_null},
                          {"with_replacement", !*without_replacement},
                          {"similarity", traits->empty() ? *sim : "traits"}};
        const auto report = sadiv::run_beta_diversity(
            ab.values, labels, Z, *alpha, *n_null, ctx.seed, !*without_replacement);

        json stage_json = json::array();
        const double first = report.stages.empty() ? 0.0
                                                   : report.stages.front().empirical;
        for (const auto& s : report.stages) {
          stage_json.push_back({{"stage", s.stage},
                                {"n_plots", s.n_plots},
                                {"empirical", s.empirical},
                                {"ratio_vs_first_stage",
                                 first > 0.0 ? s.empirical / first : 0.0},
                                {"percentile", s.percentile}});
        }
        json j{{"alpha", *alpha},
               {"n_null", *n_null},
               {"with_replacement", !*without_replacement},
               {"stages", stage_json}};
        if (!csv->empty()) {
          std::ofstream c(*csv);
          c << "stage,null_value\n";
          for (const auto& s : report.stages) {
            for (double v : s.null_values) {
              c << s.stage << ',' << sadiv::io::format_double(v) << '\n';
            }
          }
          ctx.outputs.push_back(*csv);
        }
        write_report(*out, j, ctx);
        std::cout << "wrote " << *out << '\n';
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  }

  sadiv::parallel::set_max_threads(threads);
  try {
    action();
  } catch (const sadiv::InvalidInput& e) {
    std::cerr << json{{"error", {{"type", "validation"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 1;
  } catch (const sadiv::NumericalError& e) {
    std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump()
              << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
