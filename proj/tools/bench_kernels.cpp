// Benchmark comparing the serial reference kernels against the vectorized
// and OpenMP-parallel paths on the all-pairs dissimilarity task.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sadiv/info.hpp"
#include "sadiv/parallel.hpp"
#include "sadiv/rng.hpp"
#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"
#include "sadiv/stats.hpp"
#include "sadiv/wasserstein.hpp"

namespace {

double time_once(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double best_of(int reps, const std::function<void()>& fn) {
  double best = time_once(fn);
  for (int i = 1; i < reps; ++i) best = std::min(best, time_once(fn));
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int support = 50;
  const int dim = 10;
  std::vector<int> sizes{50, 100, 200};
  if (argc > 1) {
    sizes.clear();
    for (int i = 1; i < argc; ++i) sizes.push_back(std::stoi(argv[i]));
  }

  sadiv::CounterRng rng(2024);
  Eigen::MatrixXd X(support, dim);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.next_double();
  }
  const auto D = sadiv::DistanceMatrix::from_points(
      X, sadiv::DistanceMatrix::Metric::kEuclidean);
  auto Z = sadiv::similarity_from_metric(D, 1.0);
  Z.certify_pd();

  std::printf("%-6s %-22s %12s %10s\n", "size", "kernel", "seconds", "speedup");
  for (const int m : sizes) {
    std::vector<sadiv::Distribution> dists;
    dists.reserve(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      dists.push_back(sadiv::floor_to_interior(
          sadiv::sample_uniform_simplex(support, rng)));
    }

    double t_naive, t_fast_serial, t_fast_parallel, t_w1_serial, t_w1_parallel;
    {
      sadiv::parallel::ScopedSerial serial;
      t_naive = best_of(3, [&] { sadiv::all_pairs_jbd_naive(Z, 2.0, dists); });
      t_fast_serial = best_of(3, [&] { sadiv::all_pairs_jbd_fast(Z, 2.0, dists); });
      t_w1_serial = time_once([&] { sadiv::all_pairs_wasserstein(D, dists); });
    }
    t_fast_parallel = best_of(3, [&] { sadiv::all_pairs_jbd_fast(Z, 2.0, dists); });
    t_w1_parallel = time_once([&] { sadiv::all_pairs_wasserstein(D, dists); });

    std::printf("%-6d %-22s %12.6f %10s\n", m, "jbd naive (serial ref)", t_naive, "1.0x");
    std::printf("%-6d %-22s %12.6f %9.1fx\n", m, "jbd fast (serial)", t_fast_serial,
                t_naive / t_fast_serial);
    std::printf("%-6d %-22s %12.6f %9.1fx\n", m, "jbd fast (openmp)", t_fast_parallel,
                t_naive / t_fast_parallel);
    std::printf("%-6d %-22s %12.6f %10s\n", m, "w1 exact (serial)", t_w1_serial, "1.0x");
    std::printf("%-6d %-22s %12.6f %9.1fx\n", m, "w1 exact (openmp)", t_w1_parallel,
                t_w1_serial / t_w1_parallel);
  }
  return 0;
}
