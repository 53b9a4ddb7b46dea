#include <chrono>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "calu/generators.hpp"
#include "calu/reference.hpp"
#include "calu/scheduler.hpp"
#include "calu/verify.hpp"

using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial reference vs parallel factorization"};
  int m = 512, n = 512, b = 64, tree_width = 2, reps = 1;
  std::uint64_t seed = 1;
  std::string workers_csv = "1,2,4", policy = "hybrid", layout = "bcl";
  double d_ratio = 0.1;
  app.add_option("--m", m, "rows");
  app.add_option("--n", n, "columns");
  app.add_option("--block-size", b, "tile size");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--workers", workers_csv, "worker counts, comma separated");
  app.add_option("--policy", policy, "scheduling policy for the parallel runs");
  app.add_option("--d-ratio", d_ratio, "dynamic column fraction");
  app.add_option("--layout", layout, "storage layout");
  app.add_option("--tree-width", tree_width, "panel reduction width");
  app.add_option("--reps", reps, "repetitions, best time wins");
  CLI11_PARSE(app, argc, argv);

  const auto a = calu::gen::generate(calu::gen::MatrixFamily::Gaussian, m, n, seed);
  const calu::Partition part = calu::make_partition(m, n, b);
  const auto kind = calu::parse_layout(layout);

  std::printf("%-10s %8s %14s %12s %10s %12s\n", "impl", "workers", "policy", "time_s",
              "speedup", "residual");

  double t_ref = 0;
  {
    double best = 0;
    double res = 0;
    for (int r = 0; r < reps; ++r) {
      calu::LayoutMatrix mat = calu::LayoutMatrix::from_column_major(a, part, kind);
      const auto t0 = clock_type::now();
      const auto perm = calu::ref::factor(mat, tree_width);
      const double dt = seconds_since(t0);
      if (r == 0 || dt < best) best = dt;
      res = calu::verify::residual(a, mat, perm);
    }
    t_ref = best;
    std::printf("%-10s %8d %14s %12.4f %10.2f %12.3e\n", "serial", 1, "-", best, 1.0, res);
  }

  std::vector<int> workers;
  {
    std::string item;
    std::stringstream ss(workers_csv);
    while (std::getline(ss, item, ',')) workers.push_back(std::stoi(item));
  }
  for (int w : workers) {
    calu::sched::SchedulerConfig cfg;
    cfg.workers = w;
    cfg.policy = calu::sched::parse_policy(policy);
    cfg.d_ratio = d_ratio;
    cfg.tree_width = tree_width;
    double best = 0;
    double res = 0;
    for (int r = 0; r < reps; ++r) {
      calu::LayoutMatrix mat =
          calu::LayoutMatrix::from_column_major(a, part, kind, cfg.resolved_grid());
      const auto t0 = clock_type::now();
      const auto rep = calu::sched::factor(mat, cfg);
      const double dt = seconds_since(t0);
      if (r == 0 || dt < best) best = dt;
      res = calu::verify::residual(a, mat, rep.row_perm);
    }
    std::printf("%-10s %8d %14s %12.4f %10.2f %12.3e\n", "parallel", w, policy.c_str(), best,
                t_ref / best, res);
  }
  return 0;
}
