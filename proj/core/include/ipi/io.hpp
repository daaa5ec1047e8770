#pragma once

#include "ipi/dp.hpp"
#include "ipi/mdp.hpp"
#include "ipi/policy_eval.hpp"
#include "ipi/sis.hpp"
#include "ipi/structure.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace ipi::io {

/// Models with more stored transitions than this are only written in the
/// binary format.
inline constexpr std::size_t kJsonMaxNonzeros = 5'000'000;

/// {"n":..,"m":..,"gamma":..,"transitions":[{"action":a,"triplets":[[i,j,p],..]},..],"costs":[[..],..]}
[[nodiscard]] std::string mdp_to_json(const MdpModel& model);
[[nodiscard]] MdpModel mdp_from_json(std::string_view text);

void write_mdp_binary(const MdpModel& model, std::ostream& out);
[[nodiscard]] MdpModel read_mdp_binary(std::istream& in);

/// Writes binary when the path ends in ".bin", JSON otherwise (size guarded).
void write_mdp(const MdpModel& model, const std::filesystem::path& path);
/// Detects the binary format by its magic header.
[[nodiscard]] MdpModel read_mdp(const std::filesystem::path& path);

[[nodiscard]] std::string sis_params_to_json(const sis::SisParams& params);
/// Missing keys keep their default values.
[[nodiscard]] sis::SisParams sis_params_from_json(std::string_view text);

/// {solver, n, m, gamma, alpha, outer_iters, total_inner_iters, wall_time_s,
///  final_residual_inf, terminated_by}; alpha is null for non-inexact solvers.
[[nodiscard]] std::string summary_json(const SolveReport& report, const MdpModel& model,
                                       std::optional<double> alpha);

/// Header `iter,residual_inf,error_inf,inner_iters,cum_time_s`, one row per iterate.
void write_trace_csv(const SolveReport& report, std::ostream& out);

/// Header `iter,residual_inf,residual_2`.
void write_inner_trace_csv(const InnerTrace& trace, std::ostream& out);

[[nodiscard]] std::string classification_json(const MdpModel& model, const MdpClass& mdp_class);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ipi::io
