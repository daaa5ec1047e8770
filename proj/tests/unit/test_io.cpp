#include "fixtures.hpp"

#include "ipi/dp.hpp"
#include "ipi/error.hpp"
#include "ipi/io.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace ipi {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void expect_same_model(const MdpModel& a, const MdpModel& b) {
  ASSERT_EQ(a.num_states(), b.num_states());
  ASSERT_EQ(a.num_actions(), b.num_actions());
  EXPECT_EQ(a.gamma(), b.gamma());
  EXPECT_EQ(a.costs(), b.costs());
  for (int k = 0; k < a.num_actions(); ++k) EXPECT_EQ(test::dense(a.transition(k)), test::dense(b.transition(k)));
}

ErrorKind parse_error_kind(const std::string& text) {
  try {
    (void)io::mdp_from_json(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Io;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ipi_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(MdpJson, RoundTrip) {
  const auto model = test::random_model(25, 3, 0.85, 4, 0.2);
  expect_same_model(model, io::mdp_from_json(io::mdp_to_json(model)));
}

TEST(MdpJson, ParsesDocumentedFormatWithUnorderedTriplets) {
  const std::string text = R"({"n":2,"m":2,"gamma":0.5,
    "transitions":[{"action":1,"triplets":[[1,0,1.0],[0,1,1.0]]},
                   {"action":0,"triplets":[[1,1,1.0],[0,0,1.0]]}],
    "costs":[[0,1],[2,1]]})";
  expect_same_model(io::mdp_from_json(text), test::e1());
}

TEST(MdpJson, Errors) {
  EXPECT_EQ(parse_error_kind("{not json"), ErrorKind::Parse);
  EXPECT_EQ(parse_error_kind(R"({"n":1,"m":1,"gamma":0.5,"costs":[[0]]})"), ErrorKind::Parse);
  EXPECT_EQ(parse_error_kind(R"({"n":1,"m":1,"gamma":0.5,"transitions":[{"action":0,"triplets":[[0,0]]}],"costs":[[0]]})"),
            ErrorKind::Parse);
  EXPECT_EQ(
      parse_error_kind(R"({"n":1,"m":1,"gamma":0.5,"transitions":[{"action":0,"triplets":[["a",0,1]]}],"costs":[[0]]})"),
      ErrorKind::Parse);
  EXPECT_EQ(parse_error_kind(
                R"({"n":1,"m":1,"gamma":0.5,"transitions":[{"action":0,"triplets":[[0,0,0.5],[0,0,0.5]]}],"costs":[[0]]})"),
            ErrorKind::DuplicateTransition);
  EXPECT_EQ(parse_error_kind(R"({"n":1,"m":1,"gamma":0.5,"transitions":[{"action":0,"triplets":[[0,0,0.7]]}],"costs":[[0]]})"),
            ErrorKind::RowSum);
  EXPECT_EQ(parse_error_kind(R"({"n":1,"m":1,"gamma":1.5,"transitions":[{"action":0,"triplets":[[0,0,1]]}],"costs":[[0]]})"),
            ErrorKind::GammaOutOfRange);
  EXPECT_EQ(parse_error_kind(R"({"n":2,"m":1,"gamma":0.5,"transitions":[{"action":0,"triplets":[[0,0,1],[1,1,1]]}],"costs":[[0]]})"),
            ErrorKind::DimensionMismatch);
}

TEST(MdpJson, SizeGuard) {
  RandomMdpSpec spec;
  spec.num_states = 2240;  // 2240^2 > 5e6 stored transitions
  spec.num_actions = 1;
  spec.density = 1.0;
  const auto model = generate_random(spec);
  try {
    (void)io::mdp_to_json(model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(MdpBinary, RoundTripAndTruncation) {
  const auto model = test::random_model(40, 5, 0.95, 9, 0.1);
  std::ostringstream out(std::ios::binary);
  io::write_mdp_binary(model, out);
  const std::string bytes = out.str();
  std::istringstream in(bytes, std::ios::binary);
  expect_same_model(model, io::read_mdp_binary(in));

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2), std::ios::binary);
  EXPECT_THROW((void)io::read_mdp_binary(truncated), Error);
  std::istringstream garbage("definitely not a model", std::ios::binary);
  EXPECT_THROW((void)io::read_mdp_binary(garbage), Error);
}

TEST_F(TempDir, WriteAndReadDetectFormat) {
  const auto model = test::random_model(20, 2, 0.9, 1, 0.3);
  io::write_mdp(model, dir_ / "m.json");
  io::write_mdp(model, dir_ / "m.bin");
  EXPECT_EQ(io::read_file(dir_ / "m.json").front(), '{');
  EXPECT_EQ(io::read_file(dir_ / "m.bin").substr(0, 6), "IPIMDP");
  expect_same_model(model, io::read_mdp(dir_ / "m.json"));
  expect_same_model(model, io::read_mdp(dir_ / "m.bin"));
  EXPECT_FALSE(fs::exists(dir_ / "m.json.tmp"));
  EXPECT_THROW((void)io::read_mdp(dir_ / "missing.json"), Error);
}

TEST(SisParamsJson, RoundTripAndPartialOverride) {
  auto params = sis::SisParams::defaults(321, 0.77);
  params.w_health = 3.0;
  params.contact_rate[4] = 9.0;
  const auto back = io::sis_params_from_json(io::sis_params_to_json(params));
  EXPECT_EQ(back.population, 321);
  EXPECT_EQ(back.gamma, 0.77);
  EXPECT_EQ(back.w_health, 3.0);
  EXPECT_EQ(back.contact_rate, params.contact_rate);
  EXPECT_EQ(back.quality_of_life, params.quality_of_life);

  const auto partial = io::sis_params_from_json(R"({"population": 50, "w_q": 0.5})");
  const auto defaults = sis::SisParams::defaults(50, 0.9);
  EXPECT_EQ(partial.w_quality, 0.5);
  EXPECT_EQ(partial.gamma, 0.9);
  EXPECT_EQ(partial.infection_prob, defaults.infection_prob);

  EXPECT_THROW((void)io::sis_params_from_json(R"({"lambda": [1, 2, 3]})"), Error);
  EXPECT_THROW((void)io::sis_params_from_json(R"({"psi": [2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2,2]})"), Error);
}

TEST(Summary, FieldsAndTrace) {
  const auto model = test::random_model(20, 3, 0.9, 2);
  OuterConfig config;
  OuterConfig exact;
  exact.tol = 1e-12;
  config.reference = policy_iteration(model, Vector::Zero(20), exact).final_value;
  const auto report = inexact_pi(model, Vector::Zero(20), config);

  const auto j = json::parse(io::summary_json(report, model, 0.1));
  for (const char* key : {"solver", "n", "m", "gamma", "alpha", "outer_iters", "total_inner_iters", "wall_time_s",
                          "final_residual_inf", "terminated_by"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["outer_iters"].get<int>(), report.outer_iters);
  EXPECT_EQ(j["terminated_by"].get<std::string>(), "Tolerance");
  EXPECT_TRUE(json::parse(io::summary_json(report, model, std::nullopt))["alpha"].is_null());

  std::ostringstream csv;
  io::write_trace_csv(report, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "iter,residual_inf,error_inf,inner_iters,cum_time_s");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 4);
  }
  EXPECT_EQ(rows, report.outer_iters + 1);
}

TEST(Summary, ErrorColumnBlankWithoutReference) {
  const auto model = test::random_model(10, 2, 0.5, 2);
  const auto report = value_iteration(model, Vector::Zero(10), OuterConfig{});
  std::ostringstream csv;
  io::write_trace_csv(report, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_NE(line.find(",,"), std::string::npos);
}

TEST(InnerTraceCsv, Rows) {
  InnerTrace trace;
  trace.residual_inf_history = {1.0, 0.5, 0.25};
  trace.residual_2_history = {2.0, 1.0, 0.5};
  trace.iterations_used = 2;
  std::ostringstream csv;
  io::write_inner_trace_csv(trace, csv);
  EXPECT_EQ(csv.str(), "iter,residual_inf,residual_2\n0,1,2\n1,0.5,1\n2,0.25,0.5\n");
}

TEST(ClassificationJson, ReportsConstantPolicies) {
  const auto model = test::e1();
  const auto j = json::parse(io::classification_json(model, classify_mdp(model)));
  EXPECT_EQ(j["verdict"], "General");
  ASSERT_EQ(j["constant_policies"].size(), 2U);
  EXPECT_FALSE(j["constant_policies"][0]["irreducible"].get<bool>());
  EXPECT_TRUE(j["constant_policies"][1]["irreducible"].get<bool>());
  EXPECT_EQ(j["constant_policies"][1]["period"].get<int>(), 2);
}

}  // namespace
}  // namespace ipi
