#include "ipi/io.hpp"

#include "ipi/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

namespace ipi::io {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kBinaryMagic = {'I', 'P', 'I', 'M', 'D', 'P', '0', '1'};

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorKind::Parse, "truncated binary model");
  }
  return value;
}

json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Parse, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("key '") + key + "': " + e.what());
  }
}

void read_table(const json& j, const char* key, sis::ActionTable& table) {
  if (!j.contains(key)) return;
  const auto values = field<std::vector<double>>(j, key);
  if (values.size() != table.size()) {
    throw Error(ErrorKind::Parse, std::string("table '") + key + "' needs 20 entries");
  }
  std::copy(values.begin(), values.end(), table.begin());
}

}  // namespace

std::string mdp_to_json(const MdpModel& model) {
  if (model.nonzeros() > kJsonMaxNonzeros) {
    throw Error(ErrorKind::TooLarge, "model has " + std::to_string(model.nonzeros()) +
                                         " transitions; write it with a .bin extension instead");
  }
  json j;
  j["n"] = model.num_states();
  j["m"] = model.num_actions();
  j["gamma"] = model.gamma();
  json transitions = json::array();
  for (int a = 0; a < model.num_actions(); ++a) {
    json triplets = json::array();
    const auto& p = model.transition(a);
    for (Eigen::Index row = 0; row < p.outerSize(); ++row) {
      for (SparseMatrix::InnerIterator it(p, row); it; ++it) {
        triplets.push_back(json::array({static_cast<int>(row), static_cast<int>(it.col()), it.value()}));
      }
    }
    transitions.push_back({{"action", a}, {"triplets", std::move(triplets)}});
  }
  j["transitions"] = std::move(transitions);
  json costs = json::array();
  for (int s = 0; s < model.num_states(); ++s) {
    json row = json::array();
    for (int a = 0; a < model.num_actions(); ++a) row.push_back(model.cost(s, a));
    costs.push_back(std::move(row));
  }
  j["costs"] = std::move(costs);
  return j.dump();
}

MdpModel mdp_from_json(std::string_view text) try {
  const json j = parse(text);
  const int n = field<int>(j, "n");
  const int m = field<int>(j, "m");
  const double gamma = field<double>(j, "gamma");
  if (n < 1 || m < 1) throw Error(ErrorKind::Parse, "n and m must be positive");

  std::vector<Transition> transitions;
  for (const auto& block : field<json>(j, "transitions")) {
    const int action = field<int>(block, "action");
    for (const auto& t : field<json>(block, "triplets")) {
      if (!t.is_array() || t.size() != 3) throw Error(ErrorKind::Parse, "triplets must be [i, j, p]");
      transitions.push_back({t[0].get<int>(), action, t[1].get<int>(), t[2].get<double>()});
    }
  }

  const auto cost_rows = field<std::vector<std::vector<double>>>(j, "costs");
  if (cost_rows.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::DimensionMismatch, "costs must have n rows");
  }
  DenseMatrix costs(n, m);
  for (int s = 0; s < n; ++s) {
    const auto& row = cost_rows[static_cast<std::size_t>(s)];
    if (row.size() != static_cast<std::size_t>(m)) throw Error(ErrorKind::DimensionMismatch, "costs must have m columns");
    for (int a = 0; a < m; ++a) costs(s, a) = row[static_cast<std::size_t>(a)];
  }
  return MdpModel::build(n, m, gamma, transitions, costs);
} catch (const json::exception& e) {
  throw Error(ErrorKind::Parse, e.what());
}

void write_mdp_binary(const MdpModel& model, std::ostream& out) {
  out.write(kBinaryMagic.data(), kBinaryMagic.size());
  put<std::int32_t>(out, model.num_states());
  put<std::int32_t>(out, model.num_actions());
  put<double>(out, model.gamma());
  for (int s = 0; s < model.num_states(); ++s) {
    for (int a = 0; a < model.num_actions(); ++a) put<double>(out, model.cost(s, a));
  }
  for (int a = 0; a < model.num_actions(); ++a) {
    const auto& p = model.transition(a);
    put<std::int64_t>(out, p.nonZeros());
    for (Eigen::Index row = 0; row < p.outerSize(); ++row) {
      for (SparseMatrix::InnerIterator it(p, row); it; ++it) {
        put<std::int32_t>(out, static_cast<std::int32_t>(row));
        put<std::int32_t>(out, static_cast<std::int32_t>(it.col()));
        put<double>(out, it.value());
      }
    }
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing binary model");
}

MdpModel read_mdp_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kBinaryMagic) {
    throw Error(ErrorKind::Parse, "not a binary MDP file");
  }
  const auto n = get<std::int32_t>(in);
  const auto m = get<std::int32_t>(in);
  const auto gamma = get<double>(in);
  if (n < 1 || m < 1) throw Error(ErrorKind::Parse, "n and m must be positive");
  DenseMatrix costs(n, m);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < m; ++a) costs(s, a) = get<double>(in);
  }
  std::vector<Transition> transitions;
  for (int a = 0; a < m; ++a) {
    const auto nnz = get<std::int64_t>(in);
    if (nnz < 0) throw Error(ErrorKind::Parse, "negative entry count");
    for (std::int64_t k = 0; k < nnz; ++k) {
      const auto i = get<std::int32_t>(in);
      const auto j = get<std::int32_t>(in);
      transitions.push_back({i, a, j, get<double>(in)});
    }
  }
  return MdpModel::build(n, m, gamma, transitions, costs);
}

void write_mdp(const MdpModel& model, const std::filesystem::path& path) {
  if (path.extension() == ".bin") {
    std::ostringstream buffer(std::ios::binary);
    write_mdp_binary(model, buffer);
    write_file_atomic(path, buffer.str());
  } else {
    write_file_atomic(path, mdp_to_json(model));
  }
}

MdpModel read_mdp(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (content.size() >= kBinaryMagic.size() &&
      std::memcmp(content.data(), kBinaryMagic.data(), kBinaryMagic.size()) == 0) {
    std::istringstream in(content, std::ios::binary);
    return read_mdp_binary(in);
  }
  return mdp_from_json(content);
}

std::string sis_params_to_json(const sis::SisParams& params) {
  json j;
  j["population"] = params.population;
  j["gamma"] = params.gamma;
  j["w_f"] = params.w_financial;
  j["w_q"] = params.w_quality;
  j["w_h"] = params.w_health;
  j["c_h_per_case"] = params.cost_per_case;
  j["c_f"] = params.financial_cost;
  j["c_q"] = params.quality_of_life;
  j["lambda"] = params.contact_rate;
  j["psi"] = params.infection_prob;
  return j.dump(2);
}

sis::SisParams sis_params_from_json(std::string_view text) {
  const json j = parse(text);
  const int population = j.contains("population") ? field<int>(j, "population") : 100;
  const double gamma = j.contains("gamma") ? field<double>(j, "gamma") : 0.9;
  auto params = sis::SisParams::defaults(population, gamma);
  if (j.contains("w_f")) params.w_financial = field<double>(j, "w_f");
  if (j.contains("w_q")) params.w_quality = field<double>(j, "w_q");
  if (j.contains("w_h")) params.w_health = field<double>(j, "w_h");
  if (j.contains("c_h_per_case")) params.cost_per_case = field<double>(j, "c_h_per_case");
  read_table(j, "c_f", params.financial_cost);
  read_table(j, "c_q", params.quality_of_life);
  read_table(j, "lambda", params.contact_rate);
  read_table(j, "psi", params.infection_prob);
  params.validate();
  return params;
}

std::string summary_json(const SolveReport& report, const MdpModel& model, std::optional<double> alpha) {
  json j;
  j["solver"] = report.solver;
  j["n"] = model.num_states();
  j["m"] = model.num_actions();
  j["gamma"] = model.gamma();
  j["alpha"] = alpha ? json(*alpha) : json(nullptr);
  j["outer_iters"] = report.outer_iters;
  j["total_inner_iters"] = report.total_inner_iters();
  j["wall_time_s"] = report.wall_time_s;
  j["final_residual_inf"] = report.final_residual_inf();
  j["terminated_by"] = to_string(report.terminated_by);
  return j.dump(2);
}

void write_trace_csv(const SolveReport& report, std::ostream& out) {
  out << "iter,residual_inf,error_inf,inner_iters,cum_time_s\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
    out << k << ',' << report.residual_history[k] << ',';
    if (k < report.error_history.size()) out << report.error_history[k];
    out << ',' << report.inner_iters_history[k] << ',' << report.time_history[k] << '\n';
  }
}

void write_inner_trace_csv(const InnerTrace& trace, std::ostream& out) {
  out << "iter,residual_inf,residual_2\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < trace.residual_inf_history.size(); ++i) {
    out << i << ',' << trace.residual_inf_history[i] << ',' << trace.residual_2_history[i] << '\n';
  }
}

std::string classification_json(const MdpModel& model, const MdpClass& mdp_class) {
  json j;
  j["n"] = model.num_states();
  j["m"] = model.num_actions();
  j["verdict"] = to_string(mdp_class.verdict);
  j["policies_checked"] = mdp_class.policies_checked;
  json actions = json::array();
  for (int a = 0; a < model.num_actions(); ++a) {
    const auto c = classify_matrix(model.transition(a));
    actions.push_back({{"action", a}, {"irreducible", c.irreducible}, {"period", c.period}, {"primitive", c.primitive}});
  }
  j["constant_policies"] = std::move(actions);
  return j.dump(2);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace ipi::io
