#include "piff/cli.hpp"

#include "piff/analysis.hpp"
#include "piff/ast.hpp"
#include "piff/bisim.hpp"
#include "piff/checked_model.hpp"
#include "piff/exactsim.hpp"
#include "piff/labels.hpp"
#include "piff/polymatrix.hpp"
#include "piff/translate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace piff {

namespace {

// pipeline rejected the input: exit 1, message already fully formatted
struct CliFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// malformed option value: exit 2, same class as an unknown flag
struct CliUsage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw CliFailure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out.good()) throw CliFailure("cannot write '" + path + "'");
}

PolyMatrix load_matrix(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& ex) {
    throw CliFailure(path + ": " + ex.what());
  }
  return matrix_from_json(j);
}

LabelMap labelling_for(const PolyMatrix& m, const std::string& path) {
  auto parsed = parse_labels(slurp(path), path);
  if (!parsed.file) throw CliFailure(parsed.diags.render());
  auto applied = apply_labels(*parsed.file, m);
  if (!applied.labels) throw CliFailure(applied.diags.render());
  return std::move(*applied.labels);
}

void attach_labels(PolyMatrix& m, const std::string& label_path, bool required) {
  if (!label_path.empty())
    m.labels = labelling_for(m, label_path);
  else if (required && m.labels.empty())
    throw CliFailure("matrix carries no labelling; provide --labels");
}

int state_index(const PolyMatrix& m, const std::string& name) {
  auto it = m.state_idx.find(name);
  if (it == m.state_idx.end()) throw CliFailure("unknown state '" + name + "'");
  return it->second;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// shared shape of --init values: comma-separated `state:number` pairs
template <typename F>
void each_init_pair(const std::string& arg, F&& take) {
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trimmed(item);
    if (item.empty()) continue;
    auto colon = item.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == item.size())
      throw CliUsage("--init entries look like 'state:value', got '" + item + "'");
    take(trimmed(item.substr(0, colon)), trimmed(item.substr(colon + 1)));
  }
}

std::vector<double> occupancy_arg(const PolyMatrix& m, const std::string& arg) {
  std::vector<double> mu(m.dim(), 0.0);
  each_init_pair(arg, [&](const std::string& name, const std::string& val) {
    Rational r;
    try {
      r = rational_from_string(val);
    } catch (const std::invalid_argument&) {
      throw CliUsage("--init value '" + val + "' is not a number");
    }
    mu[state_index(m, name)] = to_double(r);
  });
  return mu;
}

// --init if given, otherwise the population recorded in the matrix
std::vector<double> initial_occupancy(const PolyMatrix& m, const std::string& arg) {
  if (!arg.empty()) return occupancy_arg(m, arg);
  if (m.init.empty())
    throw CliFailure("matrix carries no initial population; provide --init");
  double total = 0;
  for (auto [s, c] : m.init) total += static_cast<double>(c);
  std::vector<double> mu(m.dim(), 0.0);
  for (auto [s, c] : m.init) mu[s] += static_cast<double>(c) / total;
  return mu;
}

std::string csv_trajectory(const PolyMatrix& m, const Eigen::MatrixXd& traj) {
  std::ostringstream os;
  os << "t";
  for (const auto& s : m.states) os << ',' << s;
  os << '\n' << std::setprecision(17);
  for (int t = 0; t < traj.rows(); ++t) {
    os << t;
    for (int j = 0; j < traj.cols(); ++j) os << ',' << traj(t, j);
    os << '\n';
  }
  return os.str();
}

PctlFormula formula_arg(const std::string& src) {
  auto parsed = parse_pctl(src);
  if (!parsed.formula) throw CliFailure(parsed.diags.render());
  return std::move(*parsed.formula);
}

// ---- subcommands -----------------------------------------------------------

int do_compile(const std::string& model_path, bool no_prune, const std::string& out_ff,
               const std::string& out_matrix) {
  auto parsed = parse_model(slurp(model_path), model_path);
  if (!parsed.diags.items.empty()) std::cerr << parsed.diags.render();
  if (!parsed.ast) return 1;
  auto checked = validate_model(std::make_shared<ModelAST>(std::move(*parsed.ast)));
  if (!checked.diags.items.empty()) std::cerr << checked.diags.render();
  if (!checked.model) return 1;

  TranslateOptions opts;
  opts.prune = !no_prune;
  FlatSpec spec = translate(*checked.model, opts);
  if (!out_ff.empty()) spill(out_ff, print_ff(spec));
  if (!out_matrix.empty()) {
    PolyMatrix m = build_matrix(spec);
    DiagnosticList st = check_stochasticity(m);
    if (st.has_errors()) {
      std::cerr << st.render();
      return 1;
    }
    spill(out_matrix, matrix_to_json(m).dump(2) + "\n");
  }
  std::cerr << model_path << ": " << spec.states.size() << " states, "
            << spec.actions.size() << " actions\n";
  return 0;
}

int do_reduce(const std::string& in, const std::string& labels, const std::string& out,
              const std::string& emit_ff) {
  PolyMatrix m = load_matrix(in);
  attach_labels(m, labels, true);
  Partition part = refine_partition(m, m.labels);
  std::vector<std::string> names = block_names(part, m.labels);
  Quotient q = quotient_model(m, m.labels, part);
  std::cout << partition_to_json(part, m, names).dump(2) << "\n";
  if (!out.empty()) spill(out, matrix_to_json(q.matrix).dump(2) + "\n");
  if (!emit_ff.empty()) spill(emit_ff, print_ff(spec_from_matrix(q.matrix)));
  std::cerr << in << ": " << m.dim() << " states -> " << part.size() << " blocks\n";
  return 0;
}

int do_mf(const std::string& in, const std::string& init_arg, int steps,
          const std::string& out) {
  PolyMatrix m = load_matrix(in);
  Eigen::MatrixXd traj = meanfield_trajectory(m, initial_occupancy(m, init_arg), steps);
  std::string csv = csv_trajectory(m, traj);
  if (out.empty())
    std::cout << csv;
  else
    spill(out, csv);
  return 0;
}

int do_fastsim(const std::string& in, const std::string& init_arg,
               const std::string& start, int steps, const std::string& out) {
  PolyMatrix m = load_matrix(in);
  Eigen::MatrixXd traj =
      fast_simulation(m, initial_occupancy(m, init_arg), state_index(m, start), steps);
  std::string csv = csv_trajectory(m, traj);
  if (out.empty())
    std::cout << csv;
  else
    spill(out, csv);
  return 0;
}

int do_check(const std::string& in, const std::string& labels, const std::string& init_arg,
             const std::string& state, int time, const std::string& formula_src) {
  PolyMatrix m = load_matrix(in);
  attach_labels(m, labels, false);
  PctlFormula f = formula_arg(formula_src);
  CheckResult r = check_pctl(m, f, initial_occupancy(m, init_arg), state_index(m, state), time);
  nlohmann::json j{{"state", state},
                   {"time", time},
                   {"formula", pctl_text(f)},
                   {"verdict", r.verdict}};
  j["probability"] = r.probability ? nlohmann::json(*r.probability) : nlohmann::json(nullptr);
  std::cout << j.dump(2) << "\n";
  return 0; // a false verdict is still a successful check
}

PopulationConfig simulate_config(const PolyMatrix& m, long long population,
                                 const std::string& init_arg) {
  PopulationConfig cfg;
  cfg.total = population;
  cfg.counts.assign(m.dim(), 0);
  if (!init_arg.empty()) {
    each_init_pair(init_arg, [&](const std::string& name, const std::string& val) {
      long long c = 0;
      try {
        size_t used = 0;
        c = std::stoll(val, &used);
        if (used != val.size()) throw std::invalid_argument(val);
      } catch (const std::exception&) {
        throw CliUsage("--init count '" + val + "' is not an integer");
      }
      cfg.counts[state_index(m, name)] = c;
    });
    long long sum = 0;
    for (long long c : cfg.counts) sum += c;
    if (sum != population)
      throw CliFailure("--init counts sum to " + std::to_string(sum) + ", --N says " +
                       std::to_string(population));
    return cfg;
  }
  if (m.init.empty())
    throw CliFailure("matrix carries no initial population; provide --init");
  // scale the recorded population to N by largest remainder
  long long base = 0;
  for (auto [s, c] : m.init) base += c;
  std::vector<std::pair<long long, int>> rests; // (remainder, state), larger first
  long long assigned = 0;
  for (auto [s, c] : m.init) {
    long long scaled = population * static_cast<long long>(c);
    cfg.counts[s] += scaled / base;
    assigned += scaled / base;
    if (scaled % base) rests.push_back({-(scaled % base), s});
  }
  std::sort(rests.begin(), rests.end());
  for (std::size_t i = 0; i < rests.size() && assigned < population; ++i, ++assigned)
    ++cfg.counts[rests[i].second];
  return cfg;
}

int do_simulate(const std::string& in, long long population, int steps, int replicas,
                std::uint64_t seed, const std::string& out_dir,
                const std::string& init_arg) {
  PolyMatrix m = load_matrix(in);
  PopulationConfig cfg = simulate_config(m, population, init_arg);
  SimResult sim = monte_carlo(m, cfg, steps, replicas, seed);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliFailure("cannot create directory '" + out_dir + "': " + ec.message());

  int width = 1;
  for (int r = replicas - 1; r >= 10; r /= 10) ++width;
  width = std::max(width, 3);

  for (int r = 0; r < replicas; ++r) {
    std::ostringstream os;
    os << "# seed " << seed << ", replica " << r << " seed " << sim.seeds[r] << "\n";
    os << "# population " << population << ", counts per state\n";
    os << "t";
    for (const auto& s : m.states) os << ',' << s;
    os << '\n';
    for (std::size_t t = 0; t < sim.trajectories[r].size(); ++t) {
      os << t;
      for (long long c : sim.trajectories[r][t]) os << ',' << c;
      os << '\n';
    }
    std::ostringstream name;
    name << "replica_" << std::setw(width) << std::setfill('0') << r << ".csv";
    spill((fs::path(out_dir) / name.str()).string(), os.str());
  }

  std::ostringstream os;
  os << "# seed " << seed << ", population " << population << ", replicas " << replicas
     << "\n";
  os << "t,state,mean,sd\n" << std::setprecision(17);
  for (int t = 0; t < sim.mean.rows(); ++t)
    for (int z = 0; z < m.dim(); ++z)
      os << t << ',' << m.states[z] << ',' << sim.mean(t, z) << ',' << sim.sd(t, z) << '\n';
  spill((fs::path(out_dir) / "summary.csv").string(), os.str());
  std::cerr << out_dir << ": " << replicas << " replica files + summary.csv\n";
  return 0;
}

int do_verify(const std::string& full_path, const std::string& red_path,
              const std::string& labels, const std::string& init_arg, int steps,
              const std::vector<std::string>& formulas) {
  PolyMatrix full = load_matrix(full_path);
  attach_labels(full, labels, true);
  PolyMatrix red = load_matrix(red_path);

  Partition part = refine_partition(full, full.labels);
  Quotient q = quotient_model(full, full.labels, part);
  if (q.matrix.dim() != red.dim())
    throw CliFailure("recomputed quotient has " + std::to_string(q.matrix.dim()) +
                     " states, '" + red_path + "' has " + std::to_string(red.dim()));
  for (int i = 0; i < red.dim(); ++i) {
    if (q.matrix.states[i] != red.states[i])
      throw CliFailure("state " + std::to_string(i + 1) + " is '" + red.states[i] +
                       "', recomputed quotient says '" + q.matrix.states[i] + "'");
    if (q.matrix.rows[i].size() != red.rows[i].size())
      throw CliFailure("row '" + red.states[i] + "' differs from the recomputed quotient");
    for (const auto& [c, e] : q.matrix.rows[i])
      if (!(red.at(i, c) == e.form))
        throw CliFailure("entry '" + red.states[i] + "' -> '" + red.states[c] +
                         "' differs from the recomputed quotient");
  }
  std::cout << "quotient: " << part.size() << " blocks, matches '" << red_path << "'\n";

  std::vector<double> mu0 = initial_occupancy(full, init_arg);
  std::vector<double> mu0q(part.size(), 0.0);
  for (int i = 0; i < full.dim(); ++i) mu0q[part.block_of[i]] += mu0[i];
  Eigen::MatrixXd tf = meanfield_trajectory(full, mu0, steps);
  Eigen::MatrixXd tq = meanfield_trajectory(q.matrix, mu0q, steps);
  double gap = 0;
  for (int t = 0; t <= steps; ++t)
    for (int b = 0; b < part.size(); ++b) {
      double agg = 0;
      for (int i : part.blocks[b]) agg += tf(t, i);
      gap = std::max(gap, std::abs(agg - tq(t, b)));
    }
  if (gap > 1e-12)
    throw CliFailure("aggregated trajectory deviates from the quotient by " +
                     std::to_string(gap));
  std::cout << "trajectory: " << steps << " steps, aggregation gap " << gap << "\n";

  for (const std::string& src : formulas) {
    PctlFormula f = formula_arg(src);
    std::vector<CheckResult> rf = check_pctl_all(full, f, mu0, 0);
    std::vector<CheckResult> rq = check_pctl_all(q.matrix, f, mu0q, 0);
    for (int z = 0; z < full.dim(); ++z) {
      const CheckResult& blk = rq[part.block_of[z]];
      if (rf[z].verdict != blk.verdict)
        throw CliFailure("formula '" + pctl_text(f) + "': verdict at '" + full.states[z] +
                         "' differs from its block");
      if (rf[z].probability && blk.probability &&
          std::abs(*rf[z].probability - *blk.probability) > 1e-12)
        throw CliFailure("formula '" + pctl_text(f) + "': probability at '" +
                         full.states[z] + "' differs from its block");
    }
    std::cout << "formula '" << pctl_text(f) << "': verdicts agree on all "
              << full.dim() << " states\n";
  }
  return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"compiler and analysis toolchain for predicate-based population models"};
  app.require_subcommand(1);

  std::string model_path, in_path, full_path, red_path;
  std::string out_ff, out_matrix, out_path, out_dir, emit_ff;
  std::string labels_path, init_arg, state_name, start_name, formula_src;
  std::vector<std::string> formulas;
  bool no_prune = false;
  int steps = 0, time_point = 0, replicas = 0;
  long long population = 0;
  std::uint64_t seed = 0;

  CLI::App* compile = app.add_subcommand("compile", "translate a .piff model to the flat format");
  compile->add_option("model", model_path, "model source (.piff)")->required();
  compile->add_flag("--no-prune", no_prune, "keep states unreachable from init");
  compile->add_option("-o,--out", out_ff, "write the flat spec (.ff) here");
  compile->add_option("--matrix", out_matrix, "write the transition matrix JSON here");

  CLI::App* reduce = app.add_subcommand("reduce", "minimize a matrix by probabilistic bisimulation");
  reduce->add_option("matrix", in_path, "matrix JSON")->required();
  reduce->add_option("--labels", labels_path, "label file (.lbl); default: labels in the matrix");
  reduce->add_option("-o,--out", out_path, "write the quotient matrix JSON here");
  reduce->add_option("--emit-ff", emit_ff, "write the quotient as a flat spec (.ff)");

  CLI::App* mf = app.add_subcommand("mf", "mean-field occupancy trajectory");
  mf->add_option("matrix", in_path, "matrix JSON")->required();
  mf->add_option("--init", init_arg, "initial occupancy 'state:frac,...'; default: matrix init");
  mf->add_option("--steps", steps, "number of steps")->required();
  mf->add_option("-o,--out", out_path, "trajectory CSV (stdout if omitted)");

  CLI::App* fastsim = app.add_subcommand("fastsim", "single-agent law against the mean-field flow");
  fastsim->add_option("matrix", in_path, "matrix JSON")->required();
  fastsim->add_option("--init", init_arg, "initial occupancy; default: matrix init");
  fastsim->add_option("--start", start_name, "agent's start state")->required();
  fastsim->add_option("--steps", steps, "number of steps")->required();
  fastsim->add_option("-o,--out", out_path, "trajectory CSV (stdout if omitted)");

  CLI::App* check = app.add_subcommand("check", "bounded PCTL check for one state and time");
  check->add_option("matrix", in_path, "matrix JSON")->required();
  check->add_option("--labels", labels_path, "label file; default: labels in the matrix");
  check->add_option("--init", init_arg, "initial occupancy; default: matrix init");
  check->add_option("--state", state_name, "state to check")->required();
  check->add_option("--time", time_point, "time point (default 0)");
  check->add_option("--formula", formula_src, "PCTL formula")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "exact population simulation");
  simulate->add_option("matrix", in_path, "matrix JSON")->required();
  simulate->add_option("--N", population, "population size")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--steps", steps, "number of steps")->required();
  simulate->add_option("--replicas", replicas, "independent replicas")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "master seed (mandatory for reproducibility)")->required();
  simulate->add_option("--init", init_arg, "initial counts 'state:count,...'; default: matrix init scaled to N");
  simulate->add_option("-o,--out", out_dir, "output directory")->required();

  CLI::App* verify = app.add_subcommand("verify", "check a reduced matrix against its full model");
  verify->add_option("full", full_path, "full matrix JSON")->required();
  verify->add_option("reduced", red_path, "reduced matrix JSON")->required();
  verify->add_option("--labels", labels_path, "label file for the full matrix");
  verify->add_option("--init", init_arg, "initial occupancy on the full states; default: matrix init");
  verify->add_option("--steps", steps, "trajectory length (default 100)")->default_val(100);
  verify->add_option("--formula", formulas, "PCTL formula to compare on both sides (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e); // prints help or the error message
    return code == 0 ? 0 : 2;
  }

  try {
    if (compile->parsed()) return do_compile(model_path, no_prune, out_ff, out_matrix);
    if (reduce->parsed()) return do_reduce(in_path, labels_path, out_path, emit_ff);
    if (mf->parsed()) return do_mf(in_path, init_arg, steps, out_path);
    if (fastsim->parsed()) return do_fastsim(in_path, init_arg, start_name, steps, out_path);
    if (check->parsed())
      return do_check(in_path, labels_path, init_arg, state_name, time_point, formula_src);
    if (simulate->parsed())
      return do_simulate(in_path, population, steps, replicas, seed, out_dir, init_arg);
    if (verify->parsed())
      return do_verify(full_path, red_path, labels_path, init_arg, steps, formulas);
  } catch (const CliUsage& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 2;
  } catch (const CliFailure& ex) {
    std::string msg = ex.what();
    std::cerr << msg;
    if (msg.empty() || msg.back() != '\n') std::cerr << '\n';
    return 1;
  } catch (const NotLumpable& ex) {
    std::cerr << ex.what() << "\n"; // message already carries its NOT_LUMPABLE tag
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace piff
