// Command-line front end: simulate aggregate traces, separate measured ones,
// run the validation sequences, calibrate branch lengths, and map trace
// distances to coordinates.

#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "ponsep/ponsep.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 domain failure (below the correlation gate, no
// detectable event), 2 input validation error.
constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitValidation = 2;

std::pair<int, std::string> split_id_arg(const std::string& arg,
                                         const char* what) {
  const std::size_t eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw std::invalid_argument(std::string(what) +
                                ": expected <id>=<value>, got \"" + arg + "\"");
  std::size_t used = 0;
  int id = 0;
  try {
    id = std::stoi(arg.substr(0, eq), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": bad id in \"" + arg + "\"");
  }
  if (used != eq)
    throw std::invalid_argument(std::string(what) + ": bad id in \"" + arg + "\"");
  return {id, arg.substr(eq + 1)};
}

double parse_value(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": bad number \"" + text + "\"");
  }
  if (used != text.size())
    throw std::invalid_argument(std::string(what) + ": bad number \"" + text + "\"");
  return v;
}

// Per-connected-branch y0 vector: design defaults with explicit overrides.
std::vector<double> resolve_y0(const ponsep::NetworkDesign& design,
                               const std::vector<std::string>& overrides) {
  std::vector<double> y0 = ponsep::default_y0(design);
  const auto connected = design.connected_branches();
  for (const std::string& arg : overrides) {
    const auto [id, value] = split_id_arg(arg, "--y0");
    bool found = false;
    for (std::size_t i = 0; i < connected.size(); ++i) {
      if (connected[i]->id == id) {
        y0[i] = parse_value(value, "--y0");
        found = true;
        break;
      }
    }
    if (!found)
      throw std::invalid_argument("--y0: branch " + std::to_string(id) +
                                  " is not a connected branch of the design");
  }
  return y0;
}

std::string today_iso_date() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[16];
  std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
  return buf;
}

struct SimulateOptions {
  std::string design_path;
  std::string out_path;
  std::vector<std::string> y0_overrides;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateOptions& opt) {
  const ponsep::DesignDocument doc = ponsep::load_design(opt.design_path);
  const std::vector<double> y0 = resolve_y0(doc.design, opt.y0_overrides);
  const ponsep::Trace trace = ponsep::simulate_network(
      doc.design, y0, doc.settings, opt.noise_sigma, opt.seed);
  ponsep::save_trace_csv(trace, opt.out_path);
  std::cout << "wrote " << opt.out_path << " (" << trace.size() << " samples, "
            << doc.design.connected_count() << " channels)\n";
  return kExitOk;
}

struct SeparateOptions {
  std::string design_path;
  std::string measured_path;
  std::string out_dir;
  int pop = 100;
  int gens = 400;
  double cr = 0.3;
  double eta = 0.05;
  std::uint64_t seed = 1;
  int workers = 4;
};

int run_separate(const SeparateOptions& opt) {
  const ponsep::DesignDocument doc = ponsep::load_design(opt.design_path);
  const ponsep::Trace measured = ponsep::load_trace_csv(opt.measured_path);

  ponsep::DeConfig cfg;
  cfg.population_size = opt.pop;
  cfg.generations = opt.gens;
  cfg.crossover_rate = opt.cr;
  cfg.scale_factor = opt.eta;
  cfg.seed = opt.seed;
  cfg.workers = opt.workers;

  const ponsep::SeparationResult result =
      ponsep::separate(measured, doc.design, doc.settings, cfg);

  fs::create_directories(opt.out_dir);
  const auto connected = doc.design.connected_branches();
  std::vector<std::string> channel_names;
  for (std::size_t i = 0; i < connected.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "channel_%02d", connected[i]->id);
    channel_names.emplace_back(name);
    ponsep::save_trace_csv(result.per_channel_traces[i],
                           fs::path(opt.out_dir) / (std::string(name) + ".csv"));
  }
  ponsep::save_trace_csv(result.fitted_aggregate,
                         fs::path(opt.out_dir) / "fitted.csv");
  ponsep::export_overlay(measured, result.fitted_aggregate,
                         result.per_channel_traces,
                         fs::path(opt.out_dir) / "overlay.csv", channel_names);

  std::string summary;
  char buf[128];
  std::snprintf(buf, sizeof buf, "pearson %.9f\n", result.pearson);
  summary += buf;
  std::snprintf(buf, sizeof buf, "residual_sse %.9e\n", result.residual_sse);
  summary += buf;
  std::snprintf(buf, sizeof buf, "generations %d\n", result.generations_used);
  summary += buf;
  std::snprintf(buf, sizeof buf, "elapsed_s %.3f\n", result.elapsed_seconds);
  summary += buf;
  for (std::size_t i = 0; i < connected.size(); ++i) {
    std::snprintf(buf, sizeof buf, "y0 %d %.6f\n", connected[i]->id,
                  result.y0_per_channel[i]);
    summary += buf;
  }
  for (const auto& group : result.ambiguous_groups) {
    summary += "ambiguous";
    for (int id : group) summary += " " + std::to_string(id);
    summary += "\n";
  }
  summary += result.success ? "status ok\n" : "status below-threshold\n";
  ponsep::write_file(fs::path(opt.out_dir) / "summary.txt", summary);
  std::cout << summary;
  return result.success ? kExitOk : kExitDomain;
}

struct SequenceOptions {
  std::string design_path;
  std::string name;  // A, B or C
  std::string report_path;
  std::vector<std::string> y0_overrides;
  std::vector<std::string> measured;  // step=path
};

int run_sequence_cmd(const SequenceOptions& opt) {
  const ponsep::DesignDocument doc = ponsep::load_design(opt.design_path);

  // y0 truth covers every branch in id order; overrides use branch ids.
  std::vector<double> y0_truth(doc.design.branches.size(), 0.0);
  for (const ponsep::Branch& b : doc.design.branches)
    y0_truth[static_cast<std::size_t>(b.id - 1)] =
        doc.design.launch_level_db - b.insertion_loss_db;
  for (const std::string& arg : opt.y0_overrides) {
    const auto [id, value] = split_id_arg(arg, "--y0");
    if (id < 1 || id > doc.design.splitter_ratio)
      throw std::invalid_argument("--y0: branch " + std::to_string(id) +
                                  " outside 1..N");
    y0_truth[static_cast<std::size_t>(id - 1)] = parse_value(value, "--y0");
  }

  std::map<int, ponsep::Trace> measured_by_step;
  for (const std::string& arg : opt.measured) {
    const auto [step, path] = split_id_arg(arg, "--measured");
    measured_by_step.emplace(step, ponsep::load_trace_csv(path));
  }

  const ponsep::SequenceSpec spec =
      ponsep::make_sequence(opt.name.at(0), doc.design.splitter_ratio);
  const auto reports = ponsep::run_sequence(spec, doc.design, doc.settings,
                                            y0_truth, measured_by_step);
  ponsep::write_file(opt.report_path, ponsep::sequence_report_csv(reports));

  for (const auto& r : reports) {
    std::string joined;
    for (int id : r.channels) {
      if (!joined.empty()) joined += '+';
      joined += std::to_string(id);
    }
    char line[128];
    std::snprintf(line, sizeof line, "step %d  channels %-15s  pearson %.9f  max|err| %.3e dB\n",
                  r.step, joined.c_str(), r.pearson, r.max_abs_err_db);
    std::cout << line;
  }
  std::cout << "report written to " << opt.report_path << "\n";
  return kExitOk;
}

struct CalibrateOptions {
  std::string design_path;
  std::string db_path;
  std::vector<std::string> lengths;  // id=km
  std::vector<std::string> traces;   // id=path
  std::string report_path;
  std::string date;
};

int run_calibrate(const CalibrateOptions& opt) {
  const ponsep::DesignDocument doc = ponsep::load_design(opt.design_path);
  const std::string date = opt.date.empty() ? today_iso_date() : opt.date;

  std::vector<std::pair<int, double>> measured;  // branch id -> length
  for (const std::string& arg : opt.lengths) {
    const auto [id, value] = split_id_arg(arg, "--length");
    measured.emplace_back(id, parse_value(value, "--length"));
  }
  for (const std::string& arg : opt.traces) {
    const auto [id, path] = split_id_arg(arg, "--trace");
    const ponsep::Branch* branch = doc.design.find_branch(id);
    if (branch == nullptr)
      throw std::invalid_argument("--trace: branch " + std::to_string(id) +
                                  " is not in the design");
    const ponsep::Trace trace = ponsep::load_trace_csv(path);
    const std::vector<double> ends =
        ponsep::detect_fiber_end(trace, doc.design.feeder_length_km);
    if (ends.empty()) {
      std::cerr << "no fiber-end event found in " << path << "\n";
      return kExitDomain;
    }
    // Several events can show up in an aggregate capture; take the one
    // nearest the design end of this branch.
    const double design_end =
        doc.design.feeder_length_km + branch->length_km;
    double best = ends.front();
    for (double e : ends)
      if (std::abs(e - design_end) < std::abs(best - design_end)) best = e;
    measured.emplace_back(id, best - doc.design.feeder_length_km);
  }
  if (measured.empty())
    throw std::invalid_argument("calibrate: provide --length and/or --trace inputs");

  std::vector<ponsep::CalibrationRecord> field_records;
  std::string report = "code\tbranch\tmeasured\tdesign\tdiff\n";
  bool all_zero = true;
  for (const auto& [id, length] : measured) {
    const ponsep::Branch* branch = doc.design.find_branch(id);
    if (branch == nullptr)
      throw std::invalid_argument("calibrate: branch " + std::to_string(id) +
                                  " is not in the design");
    const ponsep::CalibrationRecord field{branch->code, id, length, date};
    const ponsep::CalibrationRecord design_rec{branch->code, id,
                                               branch->length_km, date};
    const ponsep::CalibrationDiff diff = ponsep::compare(field, design_rec);
    field_records.push_back(field);
    char row[128];
    std::snprintf(row, sizeof row, "%s\t%d\t%.4f\t%.4f\t%.4f\n",
                  diff.code.c_str(), id, diff.measured_km, diff.design_km,
                  diff.diff_km);
    report += row;
    if (diff.diff_km != 0.0) all_zero = false;
  }
  report += all_zero ? "status calibrated\n" : "status adjustments-recorded\n";

  ponsep::store(field_records, opt.db_path);
  if (!opt.report_path.empty()) ponsep::write_file(opt.report_path, report);
  std::cout << report;
  return kExitOk;
}

struct LocateOptions {
  std::string design_path;
  int branch = 0;
  double distance_km = 0.0;
};

int run_locate(const LocateOptions& opt) {
  const ponsep::DesignDocument doc = ponsep::load_design(opt.design_path);
  const auto point =
      ponsep::locate_event(doc.design, opt.branch, opt.distance_km);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f %.6f\n", point[0], point[1]);
  std::cout << buf;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PON OTDR toolkit: splitter-aggregate simulation, channel "
               "separation, validation sequences, calibration, map lookup"};
  app.require_subcommand(1);

  SimulateOptions sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Simulate the design's aggregate trace");
  sim_cmd->add_option("--design", sim.design_path, "design JSON file")->required();
  sim_cmd->add_option("--out", sim.out_path, "output trace CSV")->required();
  sim_cmd->add_option("--y0", sim.y0_overrides,
                      "per-branch launch power override, <id>=<dB> (repeatable)");
  sim_cmd->add_option("--noise", sim.noise_sigma, "Gaussian noise sigma in dB");
  sim_cmd->add_option("--seed", sim.seed, "noise seed");

  SeparateOptions sep;
  CLI::App* sep_cmd = app.add_subcommand(
      "separate", "Fit per-channel powers to a measured aggregate trace");
  sep_cmd->add_option("--design", sep.design_path, "design JSON file")->required();
  sep_cmd->add_option("--measured", sep.measured_path, "measured trace CSV")->required();
  sep_cmd->add_option("--out-dir", sep.out_dir, "output directory")->required();
  sep_cmd->add_option("--pop", sep.pop, "DE population size");
  sep_cmd->add_option("--gens", sep.gens, "DE generations");
  sep_cmd->add_option("--cr", sep.cr, "DE crossover rate");
  sep_cmd->add_option("--eta", sep.eta, "DE scale factor");
  sep_cmd->add_option("--seed", sep.seed, "DE seed");
  sep_cmd->add_option("--workers", sep.workers, "parallel fitness workers");

  SequenceOptions seq;
  CLI::App* seq_cmd = app.add_subcommand(
      "sequence", "Run a superposition validation sequence (A, B or C)");
  seq_cmd->add_option("--design", seq.design_path, "design JSON file")->required();
  seq_cmd->add_option("--seq", seq.name, "sequence name")
      ->required()
      ->check(CLI::IsMember({"A", "B", "C"}));
  seq_cmd->add_option("--report", seq.report_path, "report CSV path")->required();
  seq_cmd->add_option("--y0", seq.y0_overrides,
                      "per-branch truth override, <id>=<dB> (repeatable)");
  seq_cmd->add_option("--measured", seq.measured,
                      "measured trace for a step, <step>=<csv> (repeatable)");

  CalibrateOptions cal;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "Compare field lengths against the design and record them");
  cal_cmd->add_option("--design", cal.design_path, "design JSON file")->required();
  cal_cmd->add_option("--db", cal.db_path, "calibration database path")->required();
  cal_cmd->add_option("--length", cal.lengths,
                      "measured branch length, <id>=<km> (repeatable)");
  cal_cmd->add_option("--trace", cal.traces,
                      "field trace to detect the branch end in, <id>=<csv>");
  cal_cmd->add_option("--report", cal.report_path, "write the diff table here");
  cal_cmd->add_option("--date", cal.date, "record date (ISO), default today");

  LocateOptions loc;
  CLI::App* loc_cmd = app.add_subcommand(
      "locate", "Map a trace distance on a branch to map coordinates");
  loc_cmd->add_option("--design", loc.design_path, "design JSON file")->required();
  loc_cmd->add_option("--branch", loc.branch, "branch id")->required();
  loc_cmd->add_option("--distance", loc.distance_km, "trace distance in km")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim);
    if (app.got_subcommand(sep_cmd)) return run_separate(sep);
    if (app.got_subcommand(seq_cmd)) return run_sequence_cmd(seq);
    if (app.got_subcommand(cal_cmd)) return run_calibrate(cal);
    if (app.got_subcommand(loc_cmd)) return run_locate(loc);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
