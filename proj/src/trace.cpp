#include "calu/trace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace calu::trace {

namespace {

const char* kind_tag(dag::Kind k) {
  switch (k) {
    case dag::Kind::P: return "P";
    case dag::Kind::L: return "L";
    case dag::Kind::U: return "U";
    case dag::Kind::S: return "S";
  }
  return "?";
}

dag::Kind parse_kind(const std::string& s) {
  if (s == "P") return dag::Kind::P;
  if (s == "L") return dag::Kind::L;
  if (s == "U") return dag::Kind::U;
  if (s == "S") return dag::Kind::S;
  throw std::invalid_argument("unknown task kind '" + s + "'");
}

double timeline_span(const Timeline& t) {
  double span = t.makespan;
  for (const auto& e : t.events) span = std::max(span, e.t_end);
  return span;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

}  // namespace

IdleStats idle_stats(const Timeline& t) {
  if (t.workers <= 0 || t.events.empty())
    throw std::invalid_argument("idle_stats: empty timeline");
  const double span = timeline_span(t);
  std::vector<double> busy(t.workers, 0.0), last_end(t.workers, 0.0);
  for (const auto& e : t.events) {
    if (e.worker < 0 || e.worker >= t.workers)
      throw std::invalid_argument("idle_stats: worker id out of range");
    busy[e.worker] += e.t_end - e.t_start;
    last_end[e.worker] = std::max(last_end[e.worker], e.t_end);
  }
  IdleStats s;
  s.idle_fraction.resize(t.workers);
  for (int w = 0; w < t.workers; ++w) {
    s.idle_fraction[w] = span > 0 ? 1.0 - busy[w] / span : 0.0;
    s.idle_max = std::max(s.idle_max, s.idle_fraction[w]);
    s.idle_avg += s.idle_fraction[w];
  }
  s.idle_avg /= t.workers;

  // Time by which ceil(0.9 p) workers have gone permanently idle.
  std::sort(last_end.begin(), last_end.end());
  const int nth = int(std::ceil(0.9 * t.workers));
  s.t90_fraction = span > 0 ? last_end[nth - 1] / span : 0.0;
  return s;
}

ValidationResult validate(const Timeline& t, dag::TaskGraph& g) {
  auto fail = [](std::string what, int idx) {
    ValidationResult r;
    r.ok = false;
    r.violation = Violation{std::move(what), idx};
    return r;
  };

  std::vector<int> event_of(g.size(), -1);
  for (int e = 0; e < int(t.events.size()); ++e) {
    const auto& ev = t.events[e];
    if (ev.t_end < ev.t_start) return fail("event ends before it starts", e);
    int id = g.find(ev.kind, ev.k, ev.i, ev.j);
    if (id < 0) return fail("event does not match any task", e);
    if (event_of[id] != -1) return fail("task executed twice", e);
    event_of[id] = e;
  }
  for (int id = 0; id < g.size(); ++id)
    if (event_of[id] == -1)
      return fail("task never executed: " + dag::name_of(g.task(id)), -1);

  // Dependencies must be respected in time, not just in issue order.
  for (int id = 0; id < g.size(); ++id) {
    const auto& ev = t.events[event_of[id]];
    for (int p : g.preds(id))
      if (t.events[event_of[p]].t_end > ev.t_start)
        return fail("task starts before predecessor " + dag::name_of(g.task(p)) +
                        " finishes",
                    event_of[id]);
  }

  // One task at a time per worker.
  std::vector<std::vector<int>> by_worker(size_t(std::max(t.workers, 1)));
  for (int e = 0; e < int(t.events.size()); ++e) {
    if (t.events[e].worker < 0 || t.events[e].worker >= t.workers)
      return fail("worker id out of range", e);
    by_worker[t.events[e].worker].push_back(e);
  }
  for (auto& lane : by_worker) {
    std::sort(lane.begin(), lane.end(), [&](int a, int b) {
      return t.events[a].t_start < t.events[b].t_start;
    });
    for (size_t x = 1; x < lane.size(); ++x)
      if (t.events[lane[x - 1]].t_end > t.events[lane[x]].t_start)
        return fail("overlapping events on one worker", lane[x]);
  }

  // Replay through the graph's own accounting.
  g.reset();
  std::vector<int> order(size_t(g.size()));
  for (int id = 0; id < g.size(); ++id) order[id] = id;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ea = t.events[event_of[a]];
    const auto& eb = t.events[event_of[b]];
    if (ea.t_end != eb.t_end) return ea.t_end < eb.t_end;
    return ea.t_start < eb.t_start;
  });
  std::vector<int> queue = std::move(order);
  while (!queue.empty()) {
    std::vector<int> stuck;
    for (int id : queue) {
      if (g.executable(id))
        g.mark_done(id);
      else
        stuck.push_back(id);
    }
    if (stuck.size() == queue.size())
      return fail("replay stalled at " + dag::name_of(g.task(stuck.front())),
                  event_of[stuck.front()]);
    queue = std::move(stuck);
  }
  return {};
}

void export_chrome(const Timeline& t, std::ostream& os) {
  const double to_us = t.unit == TimeUnit::Nanoseconds ? 1e-3 : 1.0;
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : t.events) {
    nlohmann::json args = {
        {"k", e.k},
        {"i", e.i},
        {"j", e.j},
        {"section", e.section == dag::Section::Static ? "static" : "dynamic"},
        {"t0", e.t_start},
        {"t1", e.t_end},
    };
    events.push_back({
        {"name", dag::name_of({e.kind, e.k, e.i, e.j, e.section})},
        {"cat", kind_tag(e.kind)},
        {"ph", "X"},
        {"pid", 0},
        {"tid", e.worker},
        {"ts", e.t_start * to_us},
        {"dur", (e.t_end - e.t_start) * to_us},
        {"args", std::move(args)},
    });
  }
  nlohmann::json doc = {
      {"traceEvents", std::move(events)},
      {"displayTimeUnit", "ms"},
      {"metadata",
       {{"workers", t.workers},
        {"unit", t.unit == TimeUnit::Nanoseconds ? "ns" : "ticks"},
        {"makespan", t.makespan}}},
  };
  os << doc.dump(2) << '\n';
}

Timeline import_chrome(std::istream& is) {
  nlohmann::json doc = nlohmann::json::parse(is);
  Timeline t;
  const auto& meta = doc.at("metadata");
  t.workers = meta.at("workers").get<int>();
  t.unit = meta.at("unit").get<std::string>() == "ns" ? TimeUnit::Nanoseconds
                                                      : TimeUnit::Ticks;
  t.makespan = meta.at("makespan").get<double>();
  for (const auto& je : doc.at("traceEvents")) {
    if (je.value("ph", "") != "X") continue;
    TraceEvent e;
    e.worker = je.at("tid").get<int>();
    e.kind = parse_kind(je.at("cat").get<std::string>());
    const auto& args = je.at("args");
    e.k = args.at("k").get<int>();
    e.i = args.at("i").get<int>();
    e.j = args.at("j").get<int>();
    e.section = args.at("section").get<std::string>() == "static"
                    ? dag::Section::Static
                    : dag::Section::Dynamic;
    e.t_start = args.at("t0").get<double>();
    e.t_end = args.at("t1").get<double>();
    t.events.push_back(e);
  }
  std::sort(t.events.begin(), t.events.end(), [](const auto& a, const auto& b) {
    if (a.worker != b.worker) return a.worker < b.worker;
    return a.t_start < b.t_start;
  });
  return t;
}

namespace {

const char* fill_color(dag::Kind k, dag::Section s) {
  const bool st = s == dag::Section::Static;
  switch (k) {
    case dag::Kind::P: return st ? "#c62828" : "#ef9a9a";
    case dag::Kind::S: return st ? "#2e7d32" : "#a5d6a7";
    case dag::Kind::U: return st ? "#ef6c00" : "#ffcc80";
    case dag::Kind::L: return st ? "#ad1457" : "#f48fb1";
  }
  return "#9e9e9e";
}

}  // namespace

void export_svg(const Timeline& t, std::ostream& os) {
  const double span = std::max(timeline_span(t), 1e-300);
  const int lane_h = 22, lane_gap = 4, left = 70, top = 30;
  const double plot_w = 960;
  const int width = left + int(plot_w) + 20;
  const int height = top + t.workers * (lane_h + lane_gap) + 30;
  const double scale = plot_w / span;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "  <text x=\"" << left << "\" y=\"18\">schedule, " << t.workers
     << " workers, makespan " << fmt(t.makespan)
     << (t.unit == TimeUnit::Nanoseconds ? " ns" : " ticks") << "</text>\n";
  for (int w = 0; w < t.workers; ++w) {
    const int y = top + w * (lane_h + lane_gap);
    os << "  <text x=\"4\" y=\"" << y + lane_h - 7 << "\">w" << w << "</text>\n";
    os << "  <line x1=\"" << left << "\" y1=\"" << y + lane_h << "\" x2=\""
       << left + plot_w << "\" y2=\"" << y + lane_h
       << "\" stroke=\"#ddd\"/>\n";
  }
  for (const auto& e : t.events) {
    const int y = top + e.worker * (lane_h + lane_gap);
    const double x = left + e.t_start * scale;
    const double w = std::max((e.t_end - e.t_start) * scale, 0.5);
    os << "  <rect x=\"" << fmt(x) << "\" y=\"" << y << "\" width=\"" << fmt(w)
       << "\" height=\"" << lane_h << "\" fill=\"" << fill_color(e.kind, e.section)
       << "\" stroke=\"#333\" stroke-width=\"0.3\""
       << " data-worker=\"" << e.worker << "\""
       << " data-kind=\"" << kind_tag(e.kind) << "\""
       << " data-k=\"" << e.k << "\" data-i=\"" << e.i << "\" data-j=\"" << e.j
       << "\" data-section=\""
       << (e.section == dag::Section::Static ? "static" : "dynamic") << "\""
       << " data-t0=\"" << fmt(e.t_start) << "\" data-t1=\"" << fmt(e.t_end)
       << "\">\n    <title>" << dag::name_of({e.kind, e.k, e.i, e.j, e.section})
       << " w" << e.worker << " [" << fmt(e.t_start) << ", " << fmt(e.t_end)
       << ")</title>\n  </rect>\n";
  }
  os << "</svg>\n";
}

std::vector<TraceEvent> parse_svg_events(std::istream& is) {
  auto attr = [](const std::string& tag, const std::string& name) {
    const std::string key = name + "=\"";
    auto pos = tag.find(key);
    if (pos == std::string::npos)
      throw std::invalid_argument("svg rect missing attribute " + name);
    pos += key.size();
    auto end = tag.find('"', pos);
    return tag.substr(pos, end - pos);
  };
  std::vector<TraceEvent> events;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find("<rect") == std::string::npos ||
        line.find("data-worker") == std::string::npos)
      continue;
    TraceEvent e;
    e.worker = std::stoi(attr(line, "data-worker"));
    e.kind = parse_kind(attr(line, "data-kind"));
    e.k = std::stoi(attr(line, "data-k"));
    e.i = std::stoi(attr(line, "data-i"));
    e.j = std::stoi(attr(line, "data-j"));
    e.section = attr(line, "data-section") == "static" ? dag::Section::Static
                                                       : dag::Section::Dynamic;
    e.t_start = std::stod(attr(line, "data-t0"));
    e.t_end = std::stod(attr(line, "data-t1"));
    events.push_back(e);
  }
  return events;
}

}  // namespace calu::trace
