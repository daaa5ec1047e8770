#include "cli.hpp"

#include "ipi/error.hpp"
#include "ipi/io.hpp"
#include "ipi/random_mdp.hpp"
#include "ipi/structure.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace ipi::cli {
namespace {

using nlohmann::json;

const std::vector<std::string> kMethods = {"vi", "pi", "opi", "ipi"};
const std::vector<std::string> kInnerNames = {"richardson", "jacobi", "gs", "sor", "sd", "minres", "gmres"};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidSpec, what); }

bool is_one_of(const std::string& value, const std::vector<std::string>& options) {
  return std::find(options.begin(), options.end(), value) != options.end();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("key '") + key + "': " + e.what());
  }
}

SolverSpec parse_solver(const json& j) {
  if (!j.is_object()) invalid("solver entries must be objects");
  SolverSpec s;
  s.method = get_or<std::string>(j, "method", s.method);
  s.inner = get_or<std::string>(j, "inner", s.inner);
  s.nu = get_or<double>(j, "nu", s.nu);
  s.omega = get_or<double>(j, "omega", s.omega);
  if (j.contains("restart")) s.restart = get_or<int>(j, "restart", 0);
  s.alpha = get_or<double>(j, "alpha", s.alpha);
  s.opi_w = get_or<int>(j, "opi_w", s.opi_w);
  if (!is_one_of(s.method, kMethods)) invalid("unknown method '" + s.method + "'");
  validate(parse_inner(s));
  return s;
}

ModelSource parse_model(const json& j) {
  if (!j.is_object()) invalid("'model' must be an object");
  const auto type = get_or<std::string>(j, "type", "");
  if (type == "sis") {
    return SisModelSource{io::sis_params_from_json(j.dump())};
  }
  if (type == "random") {
    RandomModelSource r;
    r.n = get_or<int>(j, "n", r.n);
    r.m = get_or<int>(j, "m", r.m);
    r.gamma = get_or<double>(j, "gamma", r.gamma);
    r.density = get_or<double>(j, "density", r.density);
    r.seed = get_or<unsigned long long>(j, "seed", r.seed);
    r.ensure_regular = get_or<bool>(j, "ensure_regular", r.ensure_regular);
    return r;
  }
  if (type == "file") {
    const auto path = get_or<std::string>(j, "path", "");
    if (path.empty()) invalid("file model needs a 'path'");
    return FileModelSource{path};
  }
  invalid("model type must be sis, random or file");
}

RandomMdpSpec to_spec(const RandomModelSource& r) {
  RandomMdpSpec spec;
  spec.num_states = r.n;
  spec.num_actions = r.m;
  spec.gamma = r.gamma;
  spec.density = r.density;
  spec.seed = r.seed;
  spec.ensure_regular = r.ensure_regular;
  return spec;
}

// Builds the model of one sweep cell. Sweeps are already parallel across
// cells, so model construction stays single-threaded here.
MdpModel build_cell_model(const SweepSpec& spec, double value) {
  return std::visit(
      [&](const auto& source) -> MdpModel {
        using S = std::decay_t<decltype(source)>;
        if constexpr (std::is_same_v<S, SisModelSource>) {
          auto params = source.params;
          if (spec.axis == "gamma") params.gamma = value;
          if (spec.axis == "population") params.population = static_cast<int>(value);
          return sis::build_sis_mdp(params);
        } else if constexpr (std::is_same_v<S, RandomModelSource>) {
          auto r = source;
          if (spec.axis == "gamma") r.gamma = value;
          return generate_random(to_spec(r));
        } else {
          auto model = io::read_mdp(source.path);
          return spec.axis == "gamma" ? model.with_gamma(value) : model;
        }
      },
      spec.model);
}

std::string format_double(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

void add_solver_options(CLI::App* cmd, SolverSpec& s) {
  cmd->add_option("--method", s.method, "Outer solver")->check(CLI::IsMember(kMethods))->capture_default_str();
  cmd->add_option("--inner", s.inner, "Inner solver for ipi")->check(CLI::IsMember(kInnerNames))->capture_default_str();
  cmd->add_option("--nu", s.nu, "Richardson step parameter")->capture_default_str();
  cmd->add_option("--omega", s.omega, "SOR relaxation parameter")->capture_default_str();
  cmd->add_option("--restart", s.restart, "GMRES restart length (default: none)");
  cmd->add_option("--alpha", s.alpha, "Forcing parameter of ipi")->capture_default_str();
  cmd->add_option("--opi-w", s.opi_w, "T_pi applications per opi step")->capture_default_str();
}

struct LoopOptions {
  double tol = 1e-8;
  int max_outer = 100000;
  int max_inner = kDefaultMaxInnerIters;
  double time_budget = kDefaultTimeBudget;
};

void add_loop_options(CLI::App* cmd, LoopOptions& o) {
  cmd->add_option("--tol", o.tol, "Outer tolerance")->capture_default_str();
  cmd->add_option("--max-outer", o.max_outer, "Outer iteration cap")->capture_default_str();
  cmd->add_option("--max-inner", o.max_inner, "Inner iteration cap")->capture_default_str();
  cmd->add_option("--time-budget", o.time_budget, "Wall-clock budget in seconds (<= 0 disables)")
      ->capture_default_str();
}

OuterConfig to_config(const LoopOptions& o) {
  OuterConfig c;
  c.tol = o.tol;
  c.max_outer_iters = o.max_outer;
  c.max_inner_iters = o.max_inner;
  c.time_budget_s = o.time_budget > 0.0 ? std::optional<double>(o.time_budget) : std::nullopt;
  return c;
}

std::optional<double> reported_alpha(const SolverSpec& s) {
  return s.method == "ipi" ? std::optional<double>(s.alpha) : std::nullopt;
}

int exit_code_for(const SolveReport& report) {
  return report.terminated_by == Termination::Tolerance ? kExitConverged : kExitNotConverged;
}

}  // namespace

std::string SolverSpec::label() const {
  if (method == "opi") return "opi(w=" + std::to_string(opi_w) + ")";
  if (method != "ipi") return method;
  std::ostringstream s;
  s << "ipi-" << name(parse_inner(*this)) << "(alpha=" << alpha << ")";
  return s.str();
}

InnerMethod parse_inner(const SolverSpec& spec) {
  if (spec.inner == "richardson") return inner::Richardson{spec.nu};
  if (spec.inner == "jacobi") return inner::Jacobi{};
  if (spec.inner == "gs") return inner::GaussSeidel{};
  if (spec.inner == "sor") return inner::Sor{spec.omega};
  if (spec.inner == "sd") return inner::SteepestDescent{};
  if (spec.inner == "minres") return inner::MinRes{};
  if (spec.inner == "gmres") return inner::Gmres{spec.restart};
  invalid("unknown inner solver '" + spec.inner + "'");
}

SolveReport run_solver(const MdpModel& model, const SolverSpec& spec, OuterConfig config) {
  config.alpha = spec.alpha;
  config.opi_w = spec.opi_w;
  config.inner_method = parse_inner(spec);
  const Vector v0 = Vector::Zero(model.num_states());
  if (spec.method == "vi") return value_iteration(model, v0, config);
  if (spec.method == "pi") return policy_iteration(model, v0, config);
  if (spec.method == "opi") return optimistic_pi(model, v0, config);
  if (spec.method == "ipi") return inexact_pi(model, v0, config);
  invalid("unknown method '" + spec.method + "'");
}

SweepSpec parse_sweep(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (!j.is_object()) invalid("sweep spec must be a JSON object");

  SweepSpec spec;
  spec.axis = get_or<std::string>(j, "axis", "");
  if (!is_one_of(spec.axis, {"gamma", "alpha", "population"})) invalid("axis must be gamma, alpha or population");
  spec.values = get_or<std::vector<double>>(j, "values", {});
  if (spec.values.empty()) invalid("sweep needs at least one axis value");
  if (!j.contains("model")) invalid("sweep needs a 'model'");
  spec.model = parse_model(j.at("model"));
  if (j.contains("solvers")) {
    if (!j.at("solvers").is_array()) invalid("'solvers' must be an array");
    for (const auto& s : j.at("solvers")) spec.solvers.push_back(parse_solver(s));
  }
  if (spec.solvers.empty()) invalid("sweep needs at least one solver");
  spec.tol = get_or<double>(j, "tol", spec.tol);
  spec.max_outer = get_or<int>(j, "max_outer", spec.max_outer);
  spec.max_inner = get_or<int>(j, "max_inner", spec.max_inner);
  spec.time_budget = get_or<double>(j, "time_budget", spec.time_budget);

  for (double v : spec.values) {
    if (spec.axis == "gamma" && !(v > 0.0 && v < 1.0)) invalid("gamma values must lie in (0,1)");
    if (spec.axis == "alpha" && !(v > 0.0 && v < 1.0)) invalid("alpha values must lie in (0,1)");
    if (spec.axis == "population" && (v < 1.0 || v != std::floor(v))) invalid("populations must be positive integers");
  }
  if (spec.axis == "population" && !std::holds_alternative<SisModelSource>(spec.model)) {
    invalid("a population sweep needs an sis model");
  }
  return spec;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers, const std::string& out_prefix) {
  const std::size_t cells = spec.values.size() * spec.solvers.size();
  std::vector<SweepRow> rows(cells);

  const auto run_cell = [&](std::size_t k) {
    const double value = spec.values[k / spec.solvers.size()];
    SolverSpec solver = spec.solvers[k % spec.solvers.size()];
    if (spec.axis == "alpha") solver.alpha = value;

    SweepRow& row = rows[k];
    row.axis = spec.axis;
    row.value = value;
    try {
      row.solver = solver.label();
      const MdpModel model = build_cell_model(spec, value);
      LoopOptions loop{spec.tol, spec.max_outer, spec.max_inner, spec.time_budget};
      const auto report = run_solver(model, solver, to_config(loop));
      row.wall_time_s = report.wall_time_s;
      row.outer_iters = report.outer_iters;
      row.total_inner_iters = report.total_inner_iters();
      row.terminated_by = to_string(report.terminated_by);
      row.final_residual_inf = report.final_residual_inf();
      row.summary_json = io::summary_json(report, model, reported_alpha(solver));
      if (!out_prefix.empty()) {
        io::write_file_atomic(out_prefix + ".cell" + std::to_string(k) + ".summary.json", row.summary_json);
      }
    } catch (const std::exception& e) {
      row.terminated_by = "Error";
      row.error = e.what();
    }
  };

  workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(std::max<std::size_t>(cells, 1)));
  if (workers == 1) {
    for (std::size_t k = 0; k < cells; ++k) run_cell(k);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < cells; k = next++) run_cell(k);
      });
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "axis,value,solver,wall_time_s,outer_iters,total_inner_iters,terminated_by,final_residual_inf,error\n";
  for (const auto& r : rows) {
    out << r.axis << ',' << format_double(r.value) << ',' << csv_field(r.solver) << ',' << format_double(r.wall_time_s)
        << ',' << r.outer_iters << ',' << r.total_inner_iters << ',' << r.terminated_by << ','
        << format_double(r.final_residual_inf) << ',' << csv_field(r.error) << '\n';
  }
}

unsigned worker_count() {
  unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("IPI_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic programming solvers for discounted MDPs", "ipi"};
  app.require_subcommand(1);

  // generate-random
  RandomModelSource random_source;
  std::string random_out;
  auto* gen_random = app.add_subcommand("generate-random", "Write a seeded random MDP");
  gen_random->add_option("--n", random_source.n, "Number of states")->capture_default_str();
  gen_random->add_option("--m", random_source.m, "Number of actions")->capture_default_str();
  gen_random->add_option("--gamma", random_source.gamma, "Discount factor")->capture_default_str();
  gen_random->add_option("--density", random_source.density, "Fraction of successors per row")->capture_default_str();
  gen_random->add_option("--seed", random_source.seed, "Generator seed")->capture_default_str();
  gen_random->add_flag("--regular", random_source.ensure_regular, "Make every policy's chain regular");
  gen_random->add_option("--out", random_out, "Output file (.bin for binary, JSON otherwise)")->required();

  // generate-sis
  int population = 100;
  double sis_gamma = 0.9;
  std::string sis_config;
  std::string sis_out;
  auto* gen_sis = app.add_subcommand("generate-sis", "Write the SIS epidemic MDP");
  gen_sis->add_option("--population", population, "Population size N")->capture_default_str();
  gen_sis->add_option("--gamma", sis_gamma, "Discount factor")->capture_default_str();
  gen_sis->add_option("--config", sis_config, "JSON file overriding weights and action tables")
      ->check(CLI::ExistingFile);
  gen_sis->add_option("--out", sis_out, "Output file (.bin for binary, JSON otherwise)")->required();

  // classify
  std::string classify_model;
  std::uint64_t cap = kDefaultPolicyEnumerationCap;
  std::string classify_out;
  auto* classify = app.add_subcommand("classify", "Report irreducibility and periodicity of an MDP");
  classify->add_option("--model", classify_model, "Model file")->required();
  classify->add_option("--cap", cap, "Maximum number of policies to enumerate")->capture_default_str();
  classify->add_option("--out", classify_out, "Also write the report to this file");

  // solve
  std::string solve_model;
  std::string solve_out = "ipi_run";
  std::string reference;
  SolverSpec solve_spec;
  LoopOptions solve_loop;
  auto* solve = app.add_subcommand("solve", "Solve an MDP and write a trace and summary");
  solve->add_option("--model", solve_model, "Model file")->required();
  add_solver_options(solve, solve_spec);
  add_loop_options(solve, solve_loop);
  solve->add_option("--reference", reference, "Fill error_inf from a reference solution")
      ->check(CLI::IsMember({"pi"}));
  solve->add_option("--out", solve_out, "Output prefix")->capture_default_str();

  // evaluate
  std::string eval_model;
  std::string eval_out = "ipi_eval";
  std::optional<int> eval_action;
  SolverSpec eval_spec;
  int eval_max_inner = kDefaultMaxInnerIters;
  auto* evaluate = app.add_subcommand("evaluate", "Run one inner solver on a policy-evaluation system");
  evaluate->add_option("--model", eval_model, "Model file")->required();
  evaluate->add_option("--action", eval_action, "Constant policy action (default: greedy for V = 0)");
  evaluate->add_option("--inner", eval_spec.inner, "Inner solver")->check(CLI::IsMember(kInnerNames))
      ->capture_default_str();
  evaluate->add_option("--nu", eval_spec.nu, "Richardson step parameter")->capture_default_str();
  evaluate->add_option("--omega", eval_spec.omega, "SOR relaxation parameter")->capture_default_str();
  evaluate->add_option("--restart", eval_spec.restart, "GMRES restart length");
  evaluate->add_option("--alpha", eval_spec.alpha, "Relative residual target")->capture_default_str();
  evaluate->add_option("--max-inner", eval_max_inner, "Iteration cap")->capture_default_str();
  evaluate->add_option("--out", eval_out, "Output prefix")->capture_default_str();

  // sweep
  std::string sweep_file;
  std::string sweep_out = "ipi_sweep";
  auto* sweep = app.add_subcommand("sweep", "Run a solver matrix over one parameter axis");
  sweep->add_option("spec", sweep_file, "Sweep spec JSON file")->required();
  sweep->add_option("--out", sweep_out, "Output prefix")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto selected = app.get_subcommands();
    err << (selected.empty() ? app.help() : selected.front()->help());
    return kExitInputError;
  }

  try {
    if (gen_random->parsed()) {
      io::write_mdp(generate_random(to_spec(random_source)), random_out);
      return 0;
    }
    if (gen_sis->parsed()) {
      auto params = sis_config.empty() ? sis::SisParams::defaults(population, sis_gamma)
                                       : io::sis_params_from_json(io::read_file(sis_config));
      if (gen_sis->count("--population")) params.population = population;
      if (gen_sis->count("--gamma")) params.gamma = sis_gamma;
      io::write_mdp(sis::build_sis_mdp(params, worker_count()), sis_out);
      return 0;
    }
    if (classify->parsed()) {
      const auto model = io::read_mdp(classify_model);
      const auto report = io::classification_json(model, classify_mdp(model, cap));
      out << report << '\n';
      if (!classify_out.empty()) io::write_file_atomic(classify_out, report);
      return 0;
    }
    if (solve->parsed()) {
      const auto model = io::read_mdp(solve_model);
      auto config = to_config(solve_loop);
      if (reference == "pi") {
        OuterConfig ref_config;
        ref_config.tol = 1e-12;
        ref_config.time_budget_s = std::nullopt;
        config.reference = policy_iteration(model, Vector::Zero(model.num_states()), ref_config).final_value;
      }
      const auto report = run_solver(model, solve_spec, config);
      std::ostringstream trace;
      io::write_trace_csv(report, trace);
      io::write_file_atomic(solve_out + ".trace.csv", trace.str());
      const auto summary = io::summary_json(report, model, reported_alpha(solve_spec));
      io::write_file_atomic(solve_out + ".summary.json", summary);
      out << summary << '\n';
      return exit_code_for(report);
    }
    if (evaluate->parsed()) {
      const auto model = io::read_mdp(eval_model);
      const Vector zero = Vector::Zero(model.num_states());
      const Policy policy = eval_action ? Policy::constant(model.num_states(), *eval_action) : greedy_policy(model, zero);
      check_policy(model, policy);
      const auto system = extract_policy_system(model, policy);
      const auto method = parse_inner(eval_spec);
      validate(method);
      const StoppingRule rule(eval_spec.alpha, residual(system, zero).lpNorm<Eigen::Infinity>(), eval_max_inner);
      const auto result = solve_to_tolerance(system, zero, method, rule);
      std::ostringstream trace;
      io::write_inner_trace_csv(result.trace, trace);
      io::write_file_atomic(eval_out + ".inner.csv", trace.str());
      json summary;
      summary["inner"] = name(method);
      summary["alpha"] = eval_spec.alpha;
      summary["iterations"] = result.trace.iterations_used;
      summary["converged"] = result.trace.converged;
      summary["final_residual_inf"] = result.trace.residual_inf_history.back();
      out << summary.dump(2) << '\n';
      return result.trace.converged ? kExitConverged : kExitNotConverged;
    }
    if (sweep->parsed()) {
      const auto spec = parse_sweep(io::read_file(sweep_file));
      const auto rows = run_sweep(spec, worker_count(), sweep_out);
      std::ostringstream csv;
      write_sweep_csv(rows, csv);
      io::write_file_atomic(sweep_out + ".sweep.csv", csv.str());
      out << csv.str();
      const bool all_ok = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.error.empty(); });
      return all_ok ? 0 : kExitNotConverged;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace ipi::cli
