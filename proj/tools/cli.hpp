#pragma once

#include "ipi/dp.hpp"
#include "ipi/mdp.hpp"
#include "ipi/sis.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ipi::cli {

/// Exit codes of `ipi solve`.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

/// One solver configuration as named on the command line or in a sweep file.
struct SolverSpec {
  std::string method = "pi";  ///< vi | pi | opi | ipi
  std::string inner = "gmres";  ///< richardson | jacobi | gs | sor | sd | minres | gmres
  double nu = 1.0;
  double omega = 1.0;
  std::optional<int> restart;
  double alpha = 0.1;
  int opi_w = 1;

  [[nodiscard]] std::string label() const;
};

/// Throws InvalidSpec for unknown names.
[[nodiscard]] InnerMethod parse_inner(const SolverSpec& spec);

/// Dispatches to the outer solver named by spec.method, starting from zero.
[[nodiscard]] SolveReport run_solver(const MdpModel& model, const SolverSpec& spec, OuterConfig config);

struct RandomModelSource {
  int n = 10;
  int m = 2;
  double gamma = 0.9;
  double density = 1.0;
  unsigned long long seed = 0;
  bool ensure_regular = false;
};
struct SisModelSource {
  sis::SisParams params = sis::SisParams::defaults();
};
struct FileModelSource {
  std::string path;
};
using ModelSource = std::variant<RandomModelSource, SisModelSource, FileModelSource>;

/// Sweep file: {"axis": "gamma"|"alpha"|"population", "values": [...],
///  "model": {"type": "sis"|"random"|"file", ...}, "solvers": [{...}, ...],
///  "tol": .., "max_outer": .., "max_inner": .., "time_budget": ..}
struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  ModelSource model;
  std::vector<SolverSpec> solvers;
  double tol = 1e-8;
  int max_outer = 100000;
  int max_inner = kDefaultMaxInnerIters;
  double time_budget = kDefaultTimeBudget;
};

/// Throws InvalidSpec / ParseError.
[[nodiscard]] SweepSpec parse_sweep(std::string_view text);

struct SweepRow {
  std::string axis;
  double value = 0.0;
  std::string solver;
  double wall_time_s = 0.0;
  int outer_iters = 0;
  long long total_inner_iters = 0;
  std::string terminated_by;
  double final_residual_inf = 0.0;
  std::string error;  ///< non-empty when the cell failed
  std::string summary_json;
};

/// Runs every (axis value, solver) cell; each cell builds its own model.
/// Failures are recorded in the row and do not stop the sweep. With an
/// output prefix, cell k writes `<prefix>.cell<k>.summary.json`.
[[nodiscard]] std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned workers,
                                              const std::string& out_prefix = {});

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Worker count from IPI_THREADS, else hardware concurrency.
[[nodiscard]] unsigned worker_count();

/// Entry point of the `ipi` binary. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ipi::cli
