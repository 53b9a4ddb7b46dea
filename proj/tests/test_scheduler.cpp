#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"

#include "calu/dag.hpp"
#include "calu/errors.hpp"
#include "calu/generators.hpp"
#include "calu/reference.hpp"
#include "calu/scheduler.hpp"

using namespace calu;
using dag::Kind;
using dag::Section;
using dag::TaskGraph;
using sched::Policy;
using sched::SchedulerConfig;

namespace {

const sched::CostFn unit_cost = [](const dag::Task&) { return 1.0; };

// 32 independent unit updates spread evenly over a 2x2 grid.
TaskGraph flat_graph(Section section) {
  std::vector<dag::Task> tasks;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 8; ++j) tasks.push_back({Kind::S, 1, i, j, section});
  return TaskGraph::custom(tasks, {}, 8);
}

double reconstruction_error(const std::vector<double>& orig, const std::vector<double>& f,
                            const PermutationVector& perm, int m, int n) {
  const int steps = std::min(m, n);
  double worst = 0.0, amax = 0.0;
  for (double v : orig) amax = std::max(amax, std::fabs(v));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int k = 0; k <= std::min({i, j, steps - 1}); ++k)
        acc += (i == k ? 1.0 : f[i + std::size_t(k) * m]) * f[k + std::size_t(j) * m];
      worst = std::max(worst, std::fabs(acc - orig[perm[i] + std::size_t(j) * m]));
    }
  return worst / amax;
}

}  // namespace

TEST_CASE("static column counts") {
  CHECK(sched::n_static_panels(7, 0.1) == 6);
  CHECK(sched::n_static_panels(7, 0.0) == 7);
  CHECK(sched::n_static_panels(7, 1.0) == 0);
  CHECK(sched::n_static_panels(4, 0.5) == 2);
  CHECK(sched::n_static_panels(5, 0.5) == 2);

  CHECK(sched::n_static_for(Policy::Static, 7, 0.9) == 7);
  CHECK(sched::n_static_for(Policy::Hybrid, 7, 0.1) == 6);
  CHECK(sched::n_static_for(Policy::Dynamic, 7, 0.1) == 0);
  CHECK(sched::n_static_for(Policy::BlockLocality, 7, 0.1) == 0);
  CHECK(sched::n_static_for(Policy::GuidedColumnLocality, 7, 0.1) == 0);
}

TEST_CASE("policy names round-trip") {
  for (Policy p : {Policy::Static, Policy::Dynamic, Policy::Hybrid, Policy::BlockLocality,
                   Policy::GuidedColumnLocality})
    CHECK(sched::parse_policy(sched::to_string(p)) == p);
  CHECK_THROWS_AS(sched::parse_policy("fifo"), std::invalid_argument);
}

TEST_CASE("configuration limits") {
  SchedulerConfig ok;
  ok.workers = 4;
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.resolved_grid() == ThreadGrid{2, 2});
  ok.grid = ThreadGrid{4, 1};
  CHECK(ok.resolved_grid() == ThreadGrid{4, 1});
  CHECK_NOTHROW(ok.validate());

  auto broken = [](auto mutate) {
    SchedulerConfig c;
    c.workers = 4;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  broken([](SchedulerConfig& c) { c.workers = 0; });
  broken([](SchedulerConfig& c) { c.d_ratio = -0.1; });
  broken([](SchedulerConfig& c) { c.d_ratio = 1.5; });
  broken([](SchedulerConfig& c) { c.group = 0; });
  broken([](SchedulerConfig& c) { c.tree_width = -1; });
  broken([](SchedulerConfig& c) { c.cutoff = 0; });
  broken([](SchedulerConfig& c) { c.grid = ThreadGrid{2, 2}; c.workers = 3; });
  broken([](SchedulerConfig& c) { c.noise.deltas = {1, 2, 3, 4, 5}; });
  broken([](SchedulerConfig& c) { c.noise.deltas = {-1.0}; });
}

TEST_CASE("acquisition keys order columns, then steps, then kinds") {
  using sched::key_of;
  const auto u12 = key_of({Kind::U, 1, 0, 2}, 90);
  const auto s122 = key_of({Kind::S, 1, 2, 2}, 10);
  const auto s132 = key_of({Kind::S, 1, 3, 2}, 11);
  const auto p2 = key_of({Kind::P, 2, 0, 0}, 3);
  const auto l23 = key_of({Kind::L, 2, 3, 0}, 2);
  const auto p1 = key_of({Kind::P, 1, 0, 0}, 99);
  CHECK(p1 < u12);
  CHECK(u12 < s122);
  CHECK(s122 < s132);
  CHECK(s132 < p2);
  CHECK(p2 < l23);
}

TEST_CASE("acquisition order is compatible with the dependencies") {
  const Partition part = make_partition(24, 20, 4);  // 6 x 5 blocks
  TaskGraph g = TaskGraph::build(part, part.N);
  for (int t = 0; t < g.size(); ++t)
    for (int s : g.succs(t)) {
      INFO(dag::name_of(g.task(t)) << " -> " << dag::name_of(g.task(s)));
      CHECK(sched::key_of(g.task(t), t) < sched::key_of(g.task(s), s));
    }
}

TEST_CASE("static programs batch consecutive updates of one column") {
  const Partition part = make_partition(16, 16, 4);
  TaskGraph g = TaskGraph::build(part, part.N);
  SchedulerConfig cfg;
  cfg.workers = 1;
  cfg.policy = Policy::Static;
  sched::Dispatcher d(g, cfg, {1, 1});
  d.seed_ready();

  std::vector<std::string> batches;
  std::vector<int> sizes;
  while (!d.all_issued()) {
    const std::vector<int> batch = d.acquire(0);
    REQUIRE(!batch.empty());
    sizes.push_back(int(batch.size()));
    batches.push_back(dag::name_of(g.task(batch.front())));
    for (int id : batch)
      for (int r : g.mark_done(id)) d.push_ready(r);
  }
  CHECK(d.issued() == 30);
  CHECK(d.dynamic_issued() == 0);
  CHECK(sizes == std::vector<int>{1, 1, 1, 1, 1, 3, 1, 1, 1, 1, 3,
                                  1, 2, 1, 1, 1, 3, 1, 2, 1, 1, 1});
  CHECK(batches[0] == "P(1)");
  CHECK(batches[5] == "S(1,2,2)");   // the first three-update batch
  CHECK(batches[6] == "P(2)");
  CHECK(batches[21] == "P(4)");
  CHECK(d.acquire(0).empty());
}

TEST_CASE("ready updates follow the worker that wrote their block") {
  std::vector<dag::Task> tasks{{Kind::S, 1, 1, 1, Section::Dynamic}};
  for (int r = 0; r < 6; ++r) tasks.push_back({Kind::S, 2, 1, 1, Section::Dynamic});
  std::vector<std::pair<int, int>> edges;
  for (int r = 1; r <= 6; ++r) edges.push_back({0, r});
  TaskGraph g = TaskGraph::custom(tasks, edges, 2);

  SchedulerConfig cfg;
  cfg.workers = 2;
  cfg.policy = Policy::BlockLocality;
  sched::Dispatcher d(g, cfg, {1, 2});
  d.seed_ready();

  CHECK(d.acquire(0) == std::vector<int>{0});
  d.note_write(0, 1, 1);
  for (int r : g.mark_done(0)) d.push_ready(r);

  // Successors 1..6 chase the toucher; the overflow beyond the cap of four
  // falls back to the shared queue in arrival order.
  CHECK(d.acquire(1) == std::vector<int>{1});  // shared queue, no steal
  CHECK(d.acquire(1) == std::vector<int>{2});
  CHECK(d.steals() == 0);
  CHECK(d.acquire(1) == std::vector<int>{3});  // now stolen from worker 0
  CHECK(d.steals() == 1);
  CHECK(d.acquire(0) == std::vector<int>{4});  // own queue, no steal
  CHECK(d.steals() == 1);
  CHECK(d.acquire(0) == std::vector<int>{5});
  CHECK(d.acquire(0) == std::vector<int>{6});
  CHECK(d.all_issued());
}

TEST_CASE("a focused worker finishes its column before moving left") {
  std::vector<dag::Task> tasks{{Kind::S, 1, 2, 3, Section::Dynamic},   // column 3
                               {Kind::S, 1, 2, 2, Section::Dynamic},   // column 2
                               {Kind::S, 2, 2, 3, Section::Dynamic}};  // column 3
  TaskGraph g = TaskGraph::custom(tasks, {{0, 1}}, 4);

  SchedulerConfig cfg;
  cfg.workers = 1;
  cfg.policy = Policy::GuidedColumnLocality;
  sched::Dispatcher d(g, cfg, {1, 1});
  d.seed_ready();

  CHECK(d.acquire(0) == std::vector<int>{0});  // smallest key first, focus -> 3
  d.note_write(0, 2, 3);
  for (int r : g.mark_done(0)) d.push_ready(r);
  // Column 2 now holds the smallest key, but the focus stays on column 3.
  CHECK(d.acquire(0) == std::vector<int>{2});
  for (int r : g.mark_done(2)) d.push_ready(r);
  CHECK(d.acquire(0) == std::vector<int>{1});
  CHECK(d.steals() == 0);
}

TEST_CASE("virtual time run of an even workload with one late worker") {
  SchedulerConfig cfg;
  cfg.workers = 4;
  cfg.grid = ThreadGrid{2, 2};
  cfg.noise.deltas = {2.0};

  cfg.policy = Policy::Static;
  TaskGraph stat = flat_graph(Section::Static);
  const auto rs = sched::simulate(stat, cfg, unit_cost);
  CHECK(rs.makespan == 10.0);
  CHECK(rs.tasks == 32);
  CHECK(int(rs.timeline.events.size()) == 32);
  CHECK(rs.dynamic_issued == 0);
  CHECK(rs.steals == 0);

  cfg.policy = Policy::Dynamic;
  TaskGraph dyn = flat_graph(Section::Dynamic);
  const auto rd = sched::simulate(dyn, cfg, unit_cost);
  CHECK(rd.makespan == 9.0);
  CHECK(rd.dynamic_issued == 32);

  cfg.policy = Policy::BlockLocality;
  TaskGraph loc = flat_graph(Section::Dynamic);
  const auto rl = sched::simulate(loc, cfg, unit_cost);
  CHECK(rl.makespan == 9.0);
}

TEST_CASE("virtual time runs are reproducible") {
  const Partition part = make_partition(32, 32, 4);
  SchedulerConfig cfg;
  cfg.workers = 3;
  cfg.policy = Policy::Hybrid;
  cfg.d_ratio = 0.4;
  cfg.noise.deltas = {0.0, 7.0};
  TaskGraph g = sched::build_graph(part, cfg);
  const auto cost = sched::default_costs(part, cfg.resolved_grid(), cfg.tree_width);
  const auto a = sched::simulate(g, cfg, cost);
  const auto b = sched::simulate(g, cfg, cost);
  CHECK(a.makespan == b.makespan);
  CHECK(a.timeline.events == b.timeline.events);
  CHECK(a.dynamic_issued == b.dynamic_issued);
  CHECK(a.steals == b.steals);
  CHECK(a.tasks == g.size());
}

TEST_CASE("section split feeds the dynamic counter") {
  const Partition part = make_partition(16, 16, 4);
  SchedulerConfig cfg;
  cfg.workers = 2;
  cfg.policy = Policy::Hybrid;
  cfg.d_ratio = 0.5;  // two of four columns stay static
  TaskGraph g = sched::build_graph(part, cfg);
  CHECK(g.n_static() == 2);
  const auto r = sched::simulate(g, cfg, unit_cost);
  CHECK(r.dynamic_issued == 19);
  CHECK(r.tasks == 30);
}

TEST_CASE("panel costs scale with the reduction depth") {
  const Partition part = make_partition(40, 40, 8);
  const auto cost = sched::default_costs(part, {2, 2}, 0);
  CHECK(cost({Kind::P, 1, 0, 0}) == 2.0);  // two leaves, one merge level
  CHECK(cost({Kind::P, 5, 0, 0}) == 1.0);  // single block row left
  CHECK(cost({Kind::L, 1, 2, 0}) == 1.0);
  CHECK(cost({Kind::U, 1, 0, 2}) == 1.0);
  CHECK(cost({Kind::S, 1, 2, 2}) == 1.0);
  const auto wide = sched::default_costs(part, {2, 2}, 4);
  CHECK(wide({Kind::P, 1, 0, 0}) == 3.0);  // four leaves, two merge levels
}

TEST_CASE("parallel and serial factorizations agree bit for bit") {
  const int m = 24, n = 20, b = 4;
  const Partition part = make_partition(m, n, b);
  const std::vector<double> cm = gen::generate(gen::MatrixFamily::Gaussian, m, n, 7);

  LayoutMatrix ra = LayoutMatrix::from_column_major(cm, part, LayoutKind::ColumnMajor);
  const PermutationVector rp = ref::factor(ra, 2);
  const std::vector<double> rf = ra.to_column_major();
  const double eps = std::numeric_limits<double>::epsilon();
  CHECK(reconstruction_error(cm, rf, rp, m, n) < 64 * m * eps);

  for (Policy pol : {Policy::Static, Policy::Dynamic, Policy::Hybrid, Policy::BlockLocality,
                     Policy::GuidedColumnLocality}) {
    for (int workers : {1, 2, 4}) {
      for (LayoutKind kind :
           {LayoutKind::ColumnMajor, LayoutKind::BlockCyclic, LayoutKind::TwoLevelBlock}) {
        SchedulerConfig cfg;
        cfg.workers = workers;
        cfg.policy = pol;
        cfg.d_ratio = 0.25;
        cfg.tree_width = 2;
        LayoutMatrix a =
            LayoutMatrix::from_column_major(cm, part, kind, cfg.resolved_grid());
        const auto rep = sched::factor(a, cfg);
        INFO("policy " << sched::to_string(pol) << ", workers " << workers);
        CHECK(rep.row_perm.pos == rp.pos);
        CHECK(a.to_column_major() == rf);
        CHECK(rep.tasks == int(rep.timeline.events.size()));
      }
    }
  }
}

TEST_CASE("default reduction width on one worker matches the serial default") {
  const int m = 20, n = 20, b = 5;
  const Partition part = make_partition(m, n, b);
  const std::vector<double> cm = gen::generate(gen::MatrixFamily::Gaussian, m, n, 9);

  LayoutMatrix ra = LayoutMatrix::from_column_major(cm, part, LayoutKind::ColumnMajor);
  const PermutationVector rp = ref::factor(ra);

  SchedulerConfig cfg;
  cfg.workers = 1;
  cfg.policy = Policy::Hybrid;
  LayoutMatrix a = LayoutMatrix::from_column_major(cm, part, LayoutKind::ColumnMajor);
  const auto rep = sched::factor(a, cfg);
  CHECK(rep.row_perm.pos == rp.pos);
  CHECK(a.to_column_major() == ra.to_column_major());
}

TEST_CASE("singular input names the failing panel") {
  const Partition part = make_partition(8, 8, 4);
  std::vector<double> ones(64, 1.0);
  SchedulerConfig cfg;
  cfg.workers = 2;
  cfg.policy = Policy::Hybrid;
  LayoutMatrix a = LayoutMatrix::from_column_major(ones, part, LayoutKind::BlockCyclic,
                                                   cfg.resolved_grid());
  bool thrown = false;
  try {
    sched::factor(a, cfg);
  } catch (const SingularMatrixError& e) {
    thrown = true;
    CHECK(e.step == 1);
  }
  CHECK(thrown);
}
