#include "calu/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "calu/generators.hpp"
#include "calu/matrix_io.hpp"
#include "calu/model.hpp"
#include "calu/reference.hpp"
#include "calu/scheduler.hpp"
#include "calu/trace.hpp"
#include "calu/verify.hpp"

namespace calu::cli {

namespace {

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_csv(s)) out.push_back(std::stod(item));
  return out;
}

ThreadGrid parse_grid(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw std::invalid_argument("grid: expected PRxPC, e.g. 2x4");
  return ThreadGrid{std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

/// Input shared by the matrix-consuming subcommands.
struct InputOpts {
  std::string in;
  std::string family = "gaussian";
  int m = 0, n = 0;
  std::uint64_t seed = 1;

  io::DenseMatrix load() const {
    if (!in.empty()) return io::read_matrix_market_file(in);
    if (m <= 0 || n <= 0)
      throw std::invalid_argument("either --in or --generate with --m/--n is required");
    return {m, n, gen::generate(gen::parse_family(family), m, n, seed)};
  }

  void add_to(CLI::App& cmd) {
    cmd.add_option("--in", in, "input matrix (MatrixMarket dense array)");
    cmd.add_option("--generate", family, "matrix family: gaussian | diagdom | identity");
    cmd.add_option("--m", m, "generated rows");
    cmd.add_option("--n", n, "generated columns");
    cmd.add_option("--seed", seed, "generator seed");
  }
};

struct ScheduleOpts {
  int block_size = 32;
  int workers = 1;
  std::string policy = "hybrid";
  double d_ratio = 0.1;
  int group = 3;
  int tree_width = 0;
  int cutoff = kernels::kDefaultCutoff;
  std::string grid;

  sched::SchedulerConfig config() const {
    sched::SchedulerConfig cfg;
    cfg.workers = workers;
    cfg.policy = sched::parse_policy(policy);
    cfg.d_ratio = d_ratio;
    cfg.group = group;
    cfg.tree_width = tree_width;
    cfg.cutoff = cutoff;
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    return cfg;
  }

  void add_to(CLI::App& cmd, bool single_policy) {
    cmd.add_option("--block-size", block_size, "tile size b");
    cmd.add_option("--workers", workers, "worker count");
    if (single_policy) {
      cmd.add_option("--policy", policy,
                     "static | dynamic | hybrid | block-locality | guided-column");
      cmd.add_option("--d-ratio", d_ratio, "dynamic column fraction (hybrid)");
    }
    cmd.add_option("--group", group, "static update batch size");
    cmd.add_option("--tree-width", tree_width, "panel reduction width (0 = auto)");
    cmd.add_option("--cutoff", cutoff, "recursion cutoff of the panel kernel");
    cmd.add_option("--grid", grid, "worker grid PRxPC (default: squarest)");
  }
};

nlohmann::json load_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      std::ifstream f(argv[i + 1]);
      if (!f) throw std::runtime_error(std::string("cannot read config ") + argv[i + 1]);
      return nlohmann::json::parse(f);
    }
  return nlohmann::json::object();
}

template <class T>
void cfg_get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_config(const nlohmann::json& j, InputOpts& in) {
  cfg_get(j, "in", in.in);
  cfg_get(j, "generate", in.family);
  cfg_get(j, "m", in.m);
  cfg_get(j, "n", in.n);
  cfg_get(j, "seed", in.seed);
}

void apply_config(const nlohmann::json& j, ScheduleOpts& s) {
  cfg_get(j, "block-size", s.block_size);
  cfg_get(j, "workers", s.workers);
  cfg_get(j, "policy", s.policy);
  cfg_get(j, "d-ratio", s.d_ratio);
  cfg_get(j, "group", s.group);
  cfg_get(j, "tree-width", s.tree_width);
  cfg_get(j, "cutoff", s.cutoff);
  cfg_get(j, "grid", s.grid);
}

std::string grid_name(ThreadGrid g) {
  return std::to_string(g.pr) + "x" + std::to_string(g.pc);
}

nlohmann::json run_summary(const sched::RunReport& rep) {
  nlohmann::json j = {
      {"makespan", rep.makespan},
      {"tasks", rep.tasks},
      {"dynamic_issued", rep.dynamic_issued},
      {"steals", rep.steals},
  };
  if (!rep.timeline.events.empty()) {
    const trace::IdleStats idle = trace::idle_stats(rep.timeline);
    j["idle_max"] = idle.idle_max;
    j["idle_avg"] = idle.idle_avg;
    j["t90_fraction"] = idle.t90_fraction;
  }
  return j;
}

void write_traces(const trace::Timeline& t, const std::string& json_path,
                  const std::string& svg_path) {
  if (!json_path.empty()) {
    auto f = open_out(json_path);
    trace::export_chrome(t, f);
  }
  if (!svg_path.empty()) {
    auto f = open_out(svg_path);
    trace::export_svg(t, f);
  }
}

// ---- factor ---------------------------------------------------------------

int cmd_factor(const InputOpts& in, const ScheduleOpts& sc, const std::string& layout,
               const std::string& out, const std::string& dump, const std::string& trace_json,
               const std::string& trace_svg) {
  const io::DenseMatrix a = in.load();
  const Partition part = make_partition(a.m, a.n, sc.block_size);
  const sched::SchedulerConfig cfg = sc.config();
  LayoutMatrix mat = LayoutMatrix::from_column_major(a.data, part, parse_layout(layout),
                                                     cfg.resolved_grid());

  const sched::RunReport rep = sched::factor(mat, cfg);

  nlohmann::json j = run_summary(rep);
  j["m"] = a.m;
  j["n"] = a.n;
  j["block_size"] = sc.block_size;
  j["layout"] = layout;
  j["grid"] = grid_name(cfg.resolved_grid());
  j["workers"] = cfg.workers;
  j["policy"] = to_string(cfg.policy);
  j["d_ratio"] = cfg.d_ratio;
  j["n_static"] = sched::n_static_for(cfg.policy, part.N, cfg.d_ratio);
  j["residual"] = verify::residual(a.data, mat, rep.row_perm);
  j["growth"] = verify::growth(a.data, mat);

  std::cout << j.dump(2) << '\n';
  if (!out.empty()) open_out(out) << j.dump(2) << '\n';
  if (!dump.empty()) io::write_factor_dump_file(dump, mat, rep.row_perm);
  write_traces(rep.timeline, trace_json, trace_svg);
  return 0;
}

// ---- sweep ----------------------------------------------------------------

int cmd_sweep(const InputOpts& in, const ScheduleOpts& sc, const std::string& policies,
              const std::string& d_ratios, const std::string& layouts,
              const std::string& out) {
  const io::DenseMatrix a = in.load();
  const Partition part = make_partition(a.m, a.n, sc.block_size);

  std::ostringstream csv;
  csv << "layout,policy,d_ratio,makespan,residual,growth,dynamic_issued,steals\n";
  for (const auto& layout : split_csv(layouts)) {
    for (const auto& policy : split_csv(policies)) {
      for (double d : parse_doubles(d_ratios)) {
        ScheduleOpts one = sc;
        one.policy = policy;
        one.d_ratio = d;
        const sched::SchedulerConfig cfg = one.config();
        LayoutMatrix mat = LayoutMatrix::from_column_major(
            a.data, part, parse_layout(layout), cfg.resolved_grid());
        const sched::RunReport rep = sched::factor(mat, cfg);
        csv << layout << ',' << policy << ',' << d << ',' << rep.makespan << ','
            << verify::residual(a.data, mat, rep.row_perm) << ','
            << verify::growth(a.data, mat) << ',' << rep.dynamic_issued << ','
            << rep.steals << '\n';
      }
    }
  }
  std::cout << csv.str();
  if (!out.empty()) open_out(out) << csv.str();
  return 0;
}

// ---- model ----------------------------------------------------------------

int cmd_model(double t1, int p, const std::string& deltas, double t_cp, double t_mig,
              double t_over, double f_s, const std::string& out) {
  model::CostModel cm{t1, p, t_cp, t_mig, t_over};
  cm.validate();
  model::NoiseProfile noise{parse_doubles(deltas)};
  noise.validate();

  const model::StaticBound bound = model::max_static_fraction(cm, noise);
  nlohmann::json j = {
      {"t1", t1},
      {"p", p},
      {"deltas", noise.deltas},
      {"t_p", cm.t_p()},
      {"t_ideal", model::t_ideal(cm, noise)},
      {"f_s_max", bound.f_s_max},
      {"clamped", bound.clamped},
      {"d_ratio_min", 1.0 - bound.f_s_max},
      {"t_actual_at_f_s_max", model::t_actual(cm, noise, bound.f_s_max)},
      {"t_actual_static", model::t_actual(cm, noise, 1.0)},
  };
  if (f_s >= 0.0) j["t_actual_at_f_s"] = model::t_actual(cm, noise, f_s);
  std::cout << j.dump(2) << '\n';
  if (!out.empty()) open_out(out) << j.dump(2) << '\n';
  return 0;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(int m, int n, const ScheduleOpts& sc, const std::string& policies,
                 const std::string& d_ratios, const std::string& noise_csv, double noise_max,
                 std::uint64_t seed, const std::string& out, const std::string& trace_json,
                 const std::string& trace_svg) {
  const Partition part = make_partition(m, n, sc.block_size);

  std::vector<double> deltas;
  if (!noise_csv.empty())
    deltas = parse_doubles(noise_csv);
  else if (noise_max > 0)
    for (int w = 0; w < sc.workers; ++w) deltas.push_back(noise_max * gen::uniform(seed, w));

  const auto policy_list = split_csv(policies);
  const auto ratio_list = parse_doubles(d_ratios);
  const bool single = policy_list.size() == 1 && ratio_list.size() == 1;
  if ((!trace_json.empty() || !trace_svg.empty()) && !single)
    throw std::invalid_argument("trace output needs a single policy and d-ratio");

  nlohmann::json runs = nlohmann::json::array();
  for (const auto& policy : policy_list) {
    for (double d : ratio_list) {
      ScheduleOpts one = sc;
      one.policy = policy;
      one.d_ratio = d;
      sched::SchedulerConfig cfg = one.config();
      cfg.noise.deltas = deltas;
      dag::TaskGraph g = sched::build_graph(part, cfg);
      const sched::CostFn cost =
          sched::default_costs(part, cfg.resolved_grid(), cfg.tree_width);
      const sched::RunReport rep = sched::simulate(g, cfg, cost);

      double t1 = 0;
      for (int id = 0; id < g.size(); ++id) t1 += cost(g.task(id));
      const model::CostModel cm{t1, cfg.workers, 0, 0, 0};
      const double ideal = model::t_ideal(cm, cfg.noise);

      nlohmann::json j = run_summary(rep);
      j["policy"] = policy;
      j["d_ratio"] = d;
      j["n_static"] = sched::n_static_for(cfg.policy, part.N, d);
      j["t1"] = t1;
      j["t_ideal"] = ideal;
      j["efficiency"] = rep.makespan > 0 ? ideal / rep.makespan : 1.0;
      const trace::ValidationResult v = trace::validate(rep.timeline, g);
      j["valid"] = v.ok;
      runs.push_back(std::move(j));
      if (single) write_traces(rep.timeline, trace_json, trace_svg);
    }
  }
  nlohmann::json doc = {
      {"m", m},
      {"n", n},
      {"block_size", sc.block_size},
      {"blocks_m", part.M},
      {"blocks_n", part.N},
      {"workers", sc.workers},
      {"noise", deltas},
      {"runs", std::move(runs)},
  };
  std::cout << doc.dump(2) << '\n';
  if (!out.empty()) open_out(out) << doc.dump(2) << '\n';
  return 0;
}

// ---- convert --------------------------------------------------------------

int cmd_convert(const InputOpts& in, const std::string& in_layout, int block_size,
                const std::string& layout, const std::string& grid, const std::string& out,
                const std::string& dump_layout) {
  LayoutMatrix mat;
  if (!in_layout.empty()) {
    std::ifstream f(in_layout);
    if (!f) throw std::runtime_error("cannot open " + in_layout + " for reading");
    mat = io::read_layout_json(f).converted(parse_layout(layout),
                                            grid.empty() ? ThreadGrid{1, 1} : parse_grid(grid));
  } else {
    const io::DenseMatrix a = in.load();
    const Partition part = make_partition(a.m, a.n, block_size);
    mat = LayoutMatrix::from_column_major(a.data, part, parse_layout(layout),
                                          grid.empty() ? ThreadGrid{1, 1} : parse_grid(grid));
  }
  if (!dump_layout.empty()) {
    auto f = open_out(dump_layout);
    io::write_layout_json(f, mat);
    // Read the file back so the exchange format, not the in-memory object,
    // is what lands in --out.
    std::ifstream back(dump_layout);
    mat = io::read_layout_json(back);
  }
  if (!out.empty()) {
    const io::DenseMatrix full{mat.part().m, mat.part().n, mat.to_column_major()};
    io::write_matrix_market_file(out, full);
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  try {
    const nlohmann::json file_cfg = load_config(argc, argv);

    CLI::App app{"block LU factorization with tournament pivoting: parallel runs, "
                 "schedule simulation and the static/dynamic balance model"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with option defaults (flags win)");

    // factor
    InputOpts f_in;
    ScheduleOpts f_sc;
    std::string f_layout = "cm", f_out, f_dump, f_tjson, f_tsvg;
    apply_config(file_cfg, f_in);
    apply_config(file_cfg, f_sc);
    cfg_get(file_cfg, "layout", f_layout);
    auto* fac = app.add_subcommand("factor", "factor one matrix and report quality");
    fac->add_option("--config", config_path, "JSON file with option defaults (flags win)");
    f_in.add_to(*fac);
    f_sc.add_to(*fac, true);
    fac->add_option("--layout", f_layout, "storage layout: cm | bcl | 2lbl");
    fac->add_option("--out", f_out, "write the run summary JSON here");
    fac->add_option("--dump", f_dump, "write the packed factors (binary)");
    fac->add_option("--trace-json", f_tjson, "write the schedule as a chrome trace");
    fac->add_option("--trace-svg", f_tsvg, "write the schedule as an svg gantt chart");
    fac->callback([&] {
      cmd_factor(f_in, f_sc, f_layout, f_out, f_dump, f_tjson, f_tsvg);
    });

    // sweep
    InputOpts s_in;
    ScheduleOpts s_sc;
    std::string s_policies = "static,dynamic,hybrid,block-locality,guided-column";
    std::string s_ratios = "0.1", s_layouts = "cm", s_out;
    apply_config(file_cfg, s_in);
    apply_config(file_cfg, s_sc);
    auto* sw = app.add_subcommand("sweep", "factor under several policies and layouts");
    sw->add_option("--config", config_path, "JSON file with option defaults (flags win)");
    s_in.add_to(*sw);
    s_sc.add_to(*sw, false);
    sw->add_option("--policies", s_policies, "comma separated policy list");
    sw->add_option("--d-ratios", s_ratios, "comma separated dynamic fractions");
    sw->add_option("--layouts", s_layouts, "comma separated layout list");
    sw->add_option("--out", s_out, "write the CSV here");
    sw->callback([&] { cmd_sweep(s_in, s_sc, s_policies, s_ratios, s_layouts, s_out); });

    // model
    double m_t1 = 0, m_tcp = 0, m_tmig = 0, m_tover = 0, m_fs = -1;
    int m_p = 1;
    std::string m_deltas = "0", m_out;
    auto* mo = app.add_subcommand("model", "static fraction bound for a noisy run");
    mo->add_option("--config", config_path, "JSON file with option defaults (flags win)");
    mo->add_option("--t1", m_t1, "total work")->required();
    mo->add_option("--p", m_p, "core count")->required();
    mo->add_option("--deltas", m_deltas, "per-core excess work, comma separated");
    mo->add_option("--critical-path", m_tcp, "critical path time");
    mo->add_option("--migration", m_tmig, "data migration time");
    mo->add_option("--overhead", m_tover, "scheduling overhead time");
    mo->add_option("--f-s", m_fs, "also evaluate this static fraction");
    mo->add_option("--out", m_out, "write the JSON here");
    mo->callback([&] { cmd_model(m_t1, m_p, m_deltas, m_tcp, m_tmig, m_tover, m_fs, m_out); });

    // simulate
    ScheduleOpts si_sc;
    int si_m = 0, si_n = 0;
    std::uint64_t si_seed = 1;
    double si_noise_max = 0;
    std::string si_policies = "hybrid", si_ratios = "0.1", si_noise, si_out, si_tjson, si_tsvg;
    apply_config(file_cfg, si_sc);
    auto* si = app.add_subcommand("simulate", "virtual-time schedule of a factorization");
    si->add_option("--config", config_path, "JSON file with option defaults (flags win)");
    si->add_option("--m", si_m, "matrix rows")->required();
    si->add_option("--n", si_n, "matrix columns")->required();
    si_sc.add_to(*si, false);
    si->add_option("--policies", si_policies, "comma separated policy list");
    si->add_option("--d-ratios", si_ratios, "comma separated dynamic fractions");
    si->add_option("--noise", si_noise, "per-worker start delays, comma separated");
    si->add_option("--noise-max", si_noise_max, "draw start delays uniformly from [0, max]");
    si->add_option("--seed", si_seed, "seed for --noise-max draws");
    si->add_option("--out", si_out, "write the JSON here");
    si->add_option("--trace-json", si_tjson, "write the schedule as a chrome trace");
    si->add_option("--trace-svg", si_tsvg, "write the schedule as an svg gantt chart");
    si->callback([&] {
      cmd_simulate(si_m, si_n, si_sc, si_policies, si_ratios, si_noise, si_noise_max, si_seed,
                   si_out, si_tjson, si_tsvg);
    });

    // convert
    InputOpts c_in;
    int c_b = 32;
    std::string c_in_layout, c_layout = "cm", c_grid, c_out, c_dump;
    apply_config(file_cfg, c_in);
    cfg_get(file_cfg, "block-size", c_b);
    cfg_get(file_cfg, "layout", c_layout);
    auto* co = app.add_subcommand("convert", "re-lay a matrix and exchange layout files");
    co->add_option("--config", config_path, "JSON file with option defaults (flags win)");
    c_in.add_to(*co);
    co->add_option("--in-layout", c_in_layout, "input layout JSON instead of a matrix");
    co->add_option("--block-size", c_b, "tile size b");
    co->add_option("--layout", c_layout, "target layout: cm | bcl | 2lbl");
    co->add_option("--grid", c_grid, "worker grid PRxPC");
    co->add_option("--out", c_out, "write the matrix (MatrixMarket)");
    co->add_option("--dump-layout", c_dump, "write the laid-out form as JSON");
    co->callback([&] {
      cmd_convert(c_in, c_in_layout, c_b, c_layout, c_grid, c_out, c_dump);
    });

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace calu::cli
