#include "baoi/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "baoi/errors.hpp"

namespace baoi::cli {

namespace {

std::string join(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += fields[i];
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

bool wants_consistent(ModeSelection m) { return m != ModeSelection::kPaper; }
bool wants_paper(ModeSelection m) { return m != ModeSelection::kConsistent; }

struct NetworkOptions {
  double density = 0.1;
  double range = model::kDefaultRange;
  int wmin = model::kDefaultWMin;
  int frame = model::kDefaultFrameLength;
  std::string out;

  model::NetworkParams params() const { return {density, range, wmin, frame}; }
};

struct SimOptions {
  std::int64_t frames = 5000;
  std::int64_t warmup = -1;
  std::optional<std::uint64_t> seed;
  int reps = 10;
  double area_side = 40.0;
  std::string admission = "frame_end";
  std::string trace;

  std::uint64_t effective_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("BAOI_SEED"); env != nullptr && *env != '\0') {
      try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) return v;
      } catch (const std::exception&) {
      }
      throw CLI::ValidationError("BAOI_SEED", std::string("not an unsigned integer: ") + env);
    }
    return 1;
  }

  sim::SimConfig config(const model::NetworkParams& params) const {
    sim::SimConfig c{params};
    c.area_side = area_side;
    c.total_frames = frames;
    c.warmup_frames = warmup;
    c.seed = effective_seed();
    c.replications = reps;
    c.admission = sim::parse_admission(admission);
    return c;
  }
};

using Echo = std::vector<std::pair<std::string, std::string>>;

Echo network_echo(const std::string& command, const NetworkOptions& n) {
  return {{"command", command},
          {"density", format_number(n.density)},
          {"range", format_number(n.range)},
          {"wmin", std::to_string(n.wmin)},
          {"frame", std::to_string(n.frame)}};
}

void append_sim_echo(Echo& echo, const sim::SimConfig& c) {
  echo.emplace_back("frames", std::to_string(c.total_frames));
  echo.emplace_back("warmup", std::to_string(c.effective_warmup()));
  echo.emplace_back("seed", std::to_string(c.seed));
  echo.emplace_back("reps", std::to_string(c.replications));
  echo.emplace_back("area-side", format_number(c.area_side));
  echo.emplace_back("admission", sim::to_string(c.admission));
}

void write_echo(std::ostream& os, const Echo& echo) {
  for (const auto& [k, v] : echo) os << "# " << k << '=' << v << '\n';
}

/// Writes to --out when given, otherwise to the command's stdout.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot open output file " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::vector<std::string> sim_columns() {
  return {"sim_p_tx", "sim_p_tx_ci", "sim_p_cl", "sim_p_cl_ci", "sim_baoi", "sim_baoi_ci"};
}

std::vector<std::string> sim_fields(const sim::SimReport& r) {
  return {format_number(r.p_tx.mean), format_number(r.p_tx.ci_half_width),
          format_number(r.p_cl.mean), format_number(r.p_cl.ci_half_width),
          format_number(r.baoi.mean), format_number(r.baoi.ci_half_width)};
}

int cmd_fixed_point(const NetworkOptions& n, std::ostream& out, std::ostream& err) {
  const model::NetworkParams params = n.params();
  PointResult point(params);
  try {
    point.model = model::solve_fixed_point(params);
    point.mu = point.model->mu;
    if (!queue::is_stable(point.mu, params.frame_length())) {
      point.status = "unstable";
      point.message = "mu * T_F = " + format_number(point.mu * params.frame_length()) + " <= 1";
    }
  } catch (const InfeasibleRegime& e) {
    point.status = "infeasible";
    point.message = e.what();
  } catch (const NoConvergence& e) {
    point.status = "no_convergence";
    point.message = e.what();
  }

  Output output(n.out, out);
  write_echo(output.stream(), network_echo("fixed-point", n));
  output.stream() << join(fixed_point_columns()) << '\n'
                  << join(fixed_point_fields(point)) << '\n';
  if (!point.ok()) err << "fixed-point: " << point.status << ": " << point.message << '\n';
  return point.exit_code();
}

int cmd_analyze(const NetworkOptions& n, const std::string& mode_text,
                std::optional<double> mu_override, std::ostream& out, std::ostream& err) {
  const ModeSelection modes = parse_mode_selection(mode_text);
  const PointResult point = analyze_point(n.params(), modes, mu_override);

  Output output(n.out, out);
  Echo echo = network_echo("analyze", n);
  echo.emplace_back("mode", to_string(modes));
  if (mu_override) echo.emplace_back("mu-override", format_number(*mu_override));
  write_echo(output.stream(), echo);
  output.stream() << join(analysis_columns()) << '\n' << join(analysis_fields(point)) << '\n';
  if (!point.ok()) err << "analyze: " << point.status << ": " << point.message << '\n';
  return point.exit_code();
}

int cmd_sweep(const NetworkOptions& n, const SimOptions& s, const std::string& swept,
              const std::string& grid_text, const std::string& mode_text, bool simulate,
              std::ostream& out, std::ostream& err) {
  const ModeSelection modes = parse_mode_selection(mode_text);
  if (swept != "density" && swept != "frame") {
    throw CLI::ValidationError("--sweep", "expected density or frame");
  }
  const Grid grid = parse_grid(grid_text);
  // Validates the fixed parameters before any output.
  const sim::SimConfig base_sim = s.config(n.params());
  if (simulate) base_sim.validate();

  Output output(n.out, out);
  Echo echo = network_echo("sweep", n);
  echo.emplace_back("sweep", swept);
  echo.emplace_back("grid", format_number(grid.min) + ":" + format_number(grid.max) + ":" +
                                format_number(grid.step));
  echo.emplace_back("mode", to_string(modes));
  echo.emplace_back("simulate", simulate ? "true" : "false");
  if (simulate) append_sim_echo(echo, base_sim);
  std::ostream& os = output.stream();
  write_echo(os, echo);

  std::vector<std::string> columns{"sweep_value"};
  for (auto& c : analysis_columns()) columns.push_back(c);
  if (simulate) {
    for (auto& c : sim_columns()) columns.push_back(c);
  }
  os << join(columns) << '\n' << std::flush;

  int ok_points = 0;
  int worst = kExitOk;
  for (const double value : grid.values()) {
    NetworkOptions point_opts = n;
    if (swept == "density") {
      point_opts.density = value;
    } else {
      point_opts.frame = static_cast<int>(std::lround(value));
    }
    std::vector<std::string> fields{swept == "density" ? format_number(value)
                                                       : std::to_string(point_opts.frame)};
    std::optional<PointResult> point;
    try {
      point = analyze_point(point_opts.params(), modes);
    } catch (const DomainError& e) {
      err << "sweep: " << swept << '=' << fields[0] << ": " << e.what() << '\n';
      worst = std::max(worst, static_cast<int>(kExitUsage));
      continue;
    }
    for (auto& f : analysis_fields(*point)) fields.push_back(std::move(f));
    if (point->ok()) {
      ++ok_points;
    } else {
      err << "sweep: " << swept << '=' << fields[0] << ": " << point->status << ": "
          << point->message << '\n';
      worst = std::max(worst, point->exit_code());
    }
    if (simulate) {
      try {
        sim::SimConfig c = base_sim;
        c.params = point_opts.params();
        for (auto& f : sim_fields(sim::run(c))) fields.push_back(std::move(f));
      } catch (const Error& e) {
        err << "sweep: simulation at " << swept << '=' << fields[0] << " failed: " << e.what()
            << '\n';
        for (std::size_t i = 0; i < sim_columns().size(); ++i) fields.emplace_back();
        worst = std::max(worst, static_cast<int>(kExitRuntime));
      }
    }
    os << join(fields) << '\n' << std::flush;
  }
  if (ok_points == 0) return worst == kExitOk ? kExitInfeasible : worst;
  return kExitOk;
}

int cmd_simulate(const NetworkOptions& n, const SimOptions& s, std::ostream& out,
                 std::ostream& err) {
  const model::NetworkParams params = n.params();
  const sim::SimConfig config = s.config(params);
  config.validate();

  std::unique_ptr<std::ofstream> trace_file;
  std::function<void(const sim::TraceRecord&)> trace;
  if (!s.trace.empty()) {
    trace_file = std::make_unique<std::ofstream>(s.trace, std::ios::binary);
    if (!*trace_file) throw Error("cannot open trace file " + s.trace);
    *trace_file << "replication,node,slot,generation_slot,baoi\n";
    trace = [&f = *trace_file](const sim::TraceRecord& r) {
      f << r.replication << ',' << r.broadcast.node << ',' << r.broadcast.slot << ','
        << r.broadcast.generation_slot << ',' << r.broadcast.baoi << '\n';
    };
  }
  const sim::SimReport report = sim::run(config, trace);
  if (trace_file) trace_file->flush();

  // Analytic counterparts; the queue terms only exist in the stable regime.
  std::optional<double> a_ptx, a_pcl, a_baoi;
  try {
    const auto m = model::solve_fixed_point(params);
    a_ptx = m.p_tx;
    a_pcl = m.p_cl_avg;
    a_baoi = queue::average_baoi(m, params.frame_length()).baoi_avg;
  } catch (const Error& e) {
    err << "simulate: analytic comparison incomplete: " << e.what() << '\n';
  }

  Output output(n.out, out);
  std::ostream& os = output.stream();
  Echo echo = network_echo("simulate", n);
  append_sim_echo(echo, config);
  write_echo(os, echo);
  os << "row,seed,nodes,counted_nodes,mean_neighbors,p_tx,p_tx_active,p_cl,baoi\n";
  for (const auto& r : report.replications) {
    os << join({std::to_string(r.index), std::to_string(r.seed), std::to_string(r.node_count),
                std::to_string(r.counted_nodes), format_number(r.mean_neighbors),
                format_number(r.p_tx), format_number(r.p_tx_active), format_number(r.p_cl),
                format_number(r.baoi)})
       << '\n';
  }
  auto summary = [&](const std::string& label, const std::vector<std::string>& values) {
    std::vector<std::string> row{label, "", "", ""};
    row.insert(row.end(), values.begin(), values.end());
    os << join(row) << '\n';
  };
  summary("mean", {format_number(report.mean_neighbors.mean), format_number(report.p_tx.mean),
                   format_number(report.p_tx_active.mean), format_number(report.p_cl.mean),
                   format_number(report.baoi.mean)});
  summary("ci95", {format_number(report.mean_neighbors.ci_half_width),
                   format_number(report.p_tx.ci_half_width),
                   format_number(report.p_tx_active.ci_half_width),
                   format_number(report.p_cl.ci_half_width),
                   format_number(report.baoi.ci_half_width)});
  auto rel = [](double emp, const std::optional<double>& ana) -> std::optional<double> {
    if (!ana) return std::nullopt;
    return (emp - *ana) / *ana;
  };
  const double lambda = params.lambda();
  summary("analytic", {format_number(lambda), optional_number(a_ptx), optional_number(a_ptx),
                       optional_number(a_pcl), optional_number(a_baoi)});
  summary("rel_delta",
          {format_number((report.mean_neighbors.mean - lambda) / lambda),
           optional_number(rel(report.p_tx.mean, a_ptx)),
           optional_number(rel(report.p_tx_active.mean, a_ptx)),
           optional_number(rel(report.p_cl.mean, a_pcl)),
           optional_number(rel(report.baoi.mean, a_baoi))});
  os.flush();

  std::ostream& msg = output.to_file() ? out : err;
  auto line = [&](const char* name, const sim::Estimate& e, const std::optional<double>& ana) {
    msg << name << ": empirical " << format_number(e.mean) << " +/- "
        << format_number(e.ci_half_width) << ", analytic " << optional_number(ana)
        << ", relative delta " << optional_number(rel(e.mean, ana)) << '\n';
  };
  line("p_tx", report.p_tx, a_ptx);
  line("p_cl", report.p_cl, a_pcl);
  line("baoi", report.baoi, a_baoi);
  return kExitOk;
}

// --config expands to "--key value" arguments placed ahead of the user's own
// flags; with last-wins option policy the command line takes precedence.
// Keys that belong to another subcommand are skipped so one file can serve
// all of them; keys no subcommand knows are rejected.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);

  std::vector<std::string> injected;
  const CLI::App* target = nullptr;
  for (const CLI::App* sub : app.get_subcommands({})) {
    if (sub->get_name() == args.front()) target = sub;
  }
  if (target == nullptr) return args;
  auto known = [](const CLI::App* sub, const std::string& key) {
    return sub->get_option_no_throw("--" + key) != nullptr;
  };
  for (const auto& [key, value] : parse_config(in)) {
    if (key == "config") continue;
    if (!known(target, key)) {
      bool elsewhere = false;
      for (const CLI::App* sub : app.get_subcommands({})) elsewhere = elsewhere || known(sub, key);
      if (!elsewhere) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
      continue;
    }
    if (key == "simulate") {
      if (value == "true" || value == "1") {
        injected.push_back("--simulate");
      } else if (value != "false" && value != "0") {
        throw CLI::ValidationError("simulate", "expected true or false, got " + value);
      }
      continue;
    }
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  std::vector<std::string> expanded{args.front()};
  expanded.insert(expanded.end(), injected.begin(), injected.end());
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

}  // namespace

ModeSelection parse_mode_selection(const std::string& text) {
  if (text == "consistent") return ModeSelection::kConsistent;
  if (text == "paper") return ModeSelection::kPaper;
  if (text == "both") return ModeSelection::kBoth;
  throw CLI::ValidationError("--mode", "expected paper, consistent or both, got " + text);
}

const char* to_string(ModeSelection modes) {
  switch (modes) {
    case ModeSelection::kConsistent:
      return "consistent";
    case ModeSelection::kPaper:
      return "paper";
    case ModeSelection::kBoth:
      return "both";
  }
  return "";
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

int PointResult::exit_code() const {
  if (status == "ok") return kExitOk;
  if (status == "unstable" || status == "infeasible") return kExitInfeasible;
  return kExitRuntime;
}

PointResult analyze_point(const model::NetworkParams& params, ModeSelection modes,
                          std::optional<double> mu_override) {
  PointResult point(params, mu_override);
  try {
    if (mu_override) {
      if (!(*mu_override > 0.0 && *mu_override <= 1.0)) {
        throw DomainError("--mu-override must lie in (0, 1]");
      }
      point.mu = *mu_override;
    } else {
      point.model = model::solve_fixed_point(params);
      point.mu = point.model->mu;
    }
    if (wants_consistent(modes)) {
      point.consistent =
          queue::average_baoi(point.mu, params.frame_length(), queue::Mode::kConsistent);
    }
    if (wants_paper(modes)) {
      point.paper = queue::average_baoi(point.mu, params.frame_length(), queue::Mode::kPaper);
    }
  } catch (const Unstable& e) {
    point.status = "unstable";
    point.message = e.what();
  } catch (const InfeasibleRegime& e) {
    point.status = "infeasible";
    point.message = e.what();
  } catch (const NoConvergence& e) {
    point.status = "no_convergence";
    point.message = e.what();
  }
  return point;
}

std::vector<std::string> fixed_point_columns() {
  return {"density", "range", "wmin",  "frame",          "lambda",
          "p_tx",    "p_cl",  "mu",    "mu_times_frame", "status"};
}

std::vector<std::string> fixed_point_fields(const PointResult& point) {
  const auto& p = point.params;
  std::vector<std::string> f{format_number(p.density()), format_number(p.range()),
                             std::to_string(p.w_min()), std::to_string(p.frame_length()),
                             format_number(p.lambda())};
  if (point.model) {
    f.push_back(format_number(point.model->p_tx));
    f.push_back(format_number(point.model->p_cl_avg));
    f.push_back(format_number(point.model->mu));
    f.push_back(format_number(point.model->mu * p.frame_length()));
  } else {
    f.insert(f.end(), 4, "");
  }
  f.push_back(point.ok() ? "stable" : point.status);
  return f;
}

std::vector<std::string> analysis_columns() {
  return {"density",        "range",         "wmin",
          "frame",          "lambda",        "p_tx",
          "p_cl",           "mu",            "status",
          "alpha",          "nu",            "mean_system_time",
          "e_xw",           "ey_consistent", "baoi_consistent",
          "velocity_consistent", "ey_paper", "baoi_paper",
          "velocity_paper", "baoi_deviation"};
}

std::vector<std::string> analysis_fields(const PointResult& point) {
  const auto& p = point.params;
  std::vector<std::string> f{format_number(p.density()), format_number(p.range()),
                             std::to_string(p.w_min()), std::to_string(p.frame_length()),
                             format_number(p.lambda())};
  if (point.model) {
    f.push_back(format_number(point.model->p_tx));
    f.push_back(format_number(point.model->p_cl_avg));
  } else {
    f.insert(f.end(), 2, "");
  }
  f.push_back(point.mu > 0.0 ? format_number(point.mu) : "");
  f.push_back(point.status);

  const auto& any = point.consistent ? point.consistent : point.paper;
  if (any) {
    f.push_back(format_number(any->alpha));
    f.push_back(format_number(any->nu));
    f.push_back(format_number(any->mean_system_time));
    f.push_back(format_number(any->e_xw));
  } else {
    f.insert(f.end(), 4, "");
  }
  for (const auto& sol : {point.consistent, point.paper}) {
    if (sol) {
      f.push_back(format_number(sol->mean_interdeparture));
      f.push_back(format_number(sol->baoi_avg));
      f.push_back(format_number(sol->velocity));
    } else {
      f.insert(f.end(), 3, "");
    }
  }
  if (point.consistent && point.paper) {
    f.push_back(format_number(point.paper->baoi_avg - point.consistent->baoi_avg));
  } else {
    f.emplace_back();
  }
  return f;
}

std::vector<double> Grid::values() const {
  std::vector<double> v;
  if (max == min) {
    v.push_back(min);
    return v;
  }
  const auto count = static_cast<std::int64_t>(std::floor((max - min) / step + 1e-9)) + 1;
  for (std::int64_t i = 0; i < count; ++i) v.push_back(min + static_cast<double>(i) * step);
  return v;
}

Grid parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
      throw CLI::ValidationError("--grid", "bad number '" + s + "' in '" + text + "'");
    }
    return v;
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(trim(part));
  Grid g;
  if (parts.size() == 1) {
    g.min = g.max = number(parts[0]);
    return g;
  }
  if (parts.size() != 3) {
    throw CLI::ValidationError("--grid", "expected min:max:step, got '" + text + "'");
  }
  g.min = number(parts[0]);
  g.max = number(parts[1]);
  g.step = number(parts[2]);
  if (!(g.step > 0.0)) throw CLI::ValidationError("--grid", "step must be positive");
  if (g.max < g.min) throw CLI::ValidationError("--grid", "max must not be below min");
  return g;
}

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--config",
                                 "line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw CLI::ValidationError("--config", "line " + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(std::move(key), value);
  }
  return entries;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Broadcast age of information for slotted CSMA/CA networks", "baoi"};
  app.require_subcommand(1);

  NetworkOptions net;
  SimOptions sim_opts;
  std::string mode = "consistent";
  std::optional<double> mu_override;
  std::string swept;
  std::string grid;
  bool simulate = false;
  std::string config_path;

  auto add_network = [&](CLI::App* sub) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--density", net.density, "node density (nodes per unit area)")
        ->capture_default_str();
    sub->add_option("--range", net.range, "transmit range")->capture_default_str();
    sub->add_option("--wmin", net.wmin, "minimum contention window (slots)")
        ->capture_default_str();
    sub->add_option("--frame", net.frame, "frame length T_F (slots)")->capture_default_str();
    sub->add_option("--out", net.out, "write CSV here instead of stdout");
    sub->add_option("--config", config_path, "flat key=value file; flags override it");
  };
  auto add_sim = [&](CLI::App* sub) {
    sub->add_option("--frames", sim_opts.frames, "simulated frames per replication")
        ->capture_default_str();
    sub->add_option("--warmup", sim_opts.warmup,
                    "warmup frames (default 20% of frames, at least 100)");
    sub->add_option("--seed", sim_opts.seed, "base seed (falls back to BAOI_SEED, then 1)");
    sub->add_option("--reps", sim_opts.reps, "replications")->capture_default_str();
    sub->add_option("--area-side", sim_opts.area_side, "torus side length")
        ->capture_default_str();
    sub->add_option("--admission", sim_opts.admission, "frame_end or immediate")
        ->check(CLI::IsMember({"frame_end", "immediate"}))
        ->capture_default_str();
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "paper, consistent or both")
        ->check(CLI::IsMember({"paper", "consistent", "both"}))
        ->capture_default_str();
  };

  CLI::App* fixed = app.add_subcommand("fixed-point", "solve the equivalent transmission model");
  add_network(fixed);

  CLI::App* analyze = app.add_subcommand("analyze", "average broadcast age at one point");
  add_network(analyze);
  add_mode(analyze);
  analyze->add_option("--mu-override", mu_override, "use this service rate directly");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep density or frame length");
  add_network(sweep);
  add_mode(sweep);
  add_sim(sweep);
  sweep->add_option("--sweep", swept, "density or frame")
      ->required()
      ->check(CLI::IsMember({"density", "frame"}));
  sweep->add_option("--grid", grid, "min:max:step")->required();
  sweep->add_flag("--simulate", simulate, "add simulated estimates to every row");

  CLI::App* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo network simulation");
  add_network(simulate_cmd);
  add_sim(simulate_cmd);
  simulate_cmd->add_option("--trace", sim_opts.trace, "per-broadcast CSV trace");

  try {
    std::vector<std::string> args = expand_config(raw_args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "baoi: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*fixed) return cmd_fixed_point(net, out, err);
    if (*analyze) return cmd_analyze(net, mode, mu_override, out, err);
    if (*sweep) return cmd_sweep(net, sim_opts, swept, grid, mode, simulate, out, err);
    if (*simulate_cmd) return cmd_simulate(net, sim_opts, out, err);
  } catch (const CLI::ParseError& e) {
    err << "baoi: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "baoi: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Unstable& e) {
    err << "baoi: unstable: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InfeasibleRegime& e) {
    err << "baoi: infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "baoi: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace baoi::cli
