#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include <json.hpp>

#include "cli.hpp"
#include "mlc/maps.hpp"
#include "mlc/measures.hpp"
#include "mlc/oracles.hpp"
#include "mlc/statespace.hpp"

using namespace mlc;

namespace {

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_state(const PureState& state, const std::string& name) {
  const std::string path = temp_path(name);
  save_state(state, path);
  return path;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("measure prints both values by default") {
  const std::string path = write_state(maximally_coherent(3), "mlc_cli_mc3.json");
  std::string out;
  CHECK(run_cli({"measure", path, "--k", "2"}, &out) == 0);
  CHECK(out.find("robustness 0.5\n") != std::string::npos);
  CHECK(out.find("geometric(3) 0.333333333333\n") != std::string::npos);

  std::string only;
  CHECK(run_cli({"measure", path, "--k", "2", "--which", "robustness"}, &only) == 0);
  CHECK(only.find("robustness 0.5") != std::string::npos);
  CHECK(only.find("geometric") == std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("measure cross-checks against the oracles on request") {
  const std::string path = write_state(maximally_coherent(3), "mlc_cli_mc3o.json");
  std::string out;
  CHECK(run_cli({"measure", path, "--k", "2", "--oracle"}, &out) == 0);
  CHECK(out.find("robustness_oracle 0.5") != std::string::npos);
  CHECK(out.find("geometric_oracle(3) 0.333333333333") != std::string::npos);
  CHECK(out.find("deviation") != std::string::npos);
  CHECK(out.find("not_converged") == std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("measure at the top level only reports robustness") {
  const std::string path = write_state(maximally_coherent(3), "mlc_cli_mc3t.json");
  // geometric needs level k+1, which would exceed the dimension here
  CHECK(run_cli({"measure", path, "--k", "3"}) == 3);
  std::string out;
  CHECK(run_cli({"measure", path, "--k", "3", "--which", "robustness"}, &out) == 0);
  CHECK(out.find("robustness 0\n") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("measure maps failures onto documented exit codes") {
  CHECK(run_cli({"measure", temp_path("mlc_cli_missing.json"), "--k", "2"}) == 6);

  const std::string bad = temp_path("mlc_cli_bad.json");
  std::ofstream(bad) << "{\"dim\": 3}";
  CHECK(run_cli({"measure", bad, "--k", "2"}) == 2);
  std::ofstream(bad) << "{\"dim\": 2, \"coeffs\": [[0.9, 0.0], [0.0, 0.0]]}";
  CHECK(run_cli({"measure", bad, "--k", "2"}) == 2);
  std::remove(bad.c_str());

  const std::string path = write_state(maximally_coherent(3), "mlc_cli_mc3e.json");
  CHECK(run_cli({"measure", path, "--k", "0"}) == 3);
  CHECK(run_cli({"measure", path, "--k", "7", "--which", "robustness"}) == 3);
  std::remove(path.c_str());
}

TEST_CASE("cli rejects unknown usage through the parser") {
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"bogus"}) == 2);
  CHECK(run_cli({"--help"}) == 0);
  std::string err;
  CHECK(run_cli({"measure"}, nullptr, &err) == 2);  // missing state and --k
  CHECK_FALSE(err.empty());
}

TEST_CASE("convert reports a feasible self conversion") {
  const std::string path = write_state(maximally_coherent(3), "mlc_cli_conv.json");
  std::string out;
  CHECK(run_cli({"convert", path, path, "--k", "2"}, &out) == 0);
  const auto j = nlohmann::json::parse(out);
  CHECK(j.at("feasible") == true);
  CHECK(j.at("p_max") == 1.0);
  REQUIRE(j.contains("map"));
  CHECK(j.at("map").at("scale") == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("convert builds the map at a requested probability") {
  const std::string path = write_state(maximally_coherent(4), "mlc_cli_conv4.json");
  std::string out;
  CHECK(run_cli({"convert", path, path, "--k", "2", "--p", "0.5"}, &out) == 0);
  const auto j = nlohmann::json::parse(out);
  CHECK(j.at("map").at("scale") == 0.5);

  // the serialized map really scales the conversion
  const TwoOutcomeMap map = two_outcome_from_json(j.at("map").dump());
  const PureState mc4 = maximally_coherent(4);
  const Matrix got = apply(map, outer_product(mc4)).matrix();
  CHECK((got - 0.5 * outer_product(mc4).matrix()).cwiseAbs().maxCoeff() <= 1e-10);
  std::remove(path.c_str());
}

TEST_CASE("convert exit codes cover resource and bound failures") {
  Vector flat = Vector::Zero(4);
  flat[0] = flat[1] = 1.0 / std::sqrt(2.0);
  const std::string free_path = write_state(PureState(4, flat), "mlc_cli_free.json");
  const std::string mc4_path = write_state(maximally_coherent(4), "mlc_cli_mc4.json");
  CHECK(run_cli({"convert", free_path, mc4_path, "--k", "2"}) == 4);

  Vector skew(4);
  skew << std::sqrt(0.85), std::sqrt(0.10), std::sqrt(0.04), std::sqrt(0.01);
  const std::string skew_path = write_state(PureState(4, skew), "mlc_cli_skew.json");
  std::string err;
  CHECK(run_cli({"convert", skew_path, mc4_path, "--k", "2", "--p", "0.9"}, nullptr, &err) == 5);
  CHECK(err.find("bound") != std::string::npos);
  CHECK(err.find("0.05") != std::string::npos);  // the violated bound value

  std::remove(free_path.c_str());
  std::remove(mc4_path.c_str());
  std::remove(skew_path.c_str());
}

TEST_CASE("sweep writes a deterministic csv table") {
  const std::string csv = temp_path("mlc_cli_sweep.csv");
  CHECK(run_cli({"sweep", "--dim", "3", "--k", "2", "--pairs", "4", "--seed", "7",
                 "--out", csv}) == 0);
  const std::string first = read_file(csv);
  CHECK(run_cli({"sweep", "--dim", "3", "--k", "2", "--pairs", "4", "--seed", "7",
                 "--out", csv}) == 0);
  CHECK(read_file(csv) == first);

  std::istringstream lines(first);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "dim,k,source_seed,target_seed,g_source,r_target,p_max,feasible,verified");
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.find('\r') == std::string::npos);
    CHECK(line.rfind("3,2,", 0) == 0);
  }
  CHECK(rows == 4);
  std::remove(csv.c_str());
}

TEST_CASE("sweep validates its table parameters") {
  CHECK(run_cli({"sweep", "--dim", "3", "--k", "2", "--pairs", "1", "--out",
                 "/no/such/dir/table.csv"}) == 6);
  const std::string csv = temp_path("mlc_cli_sweep_bad.csv");
  CHECK(run_cli({"sweep", "--dim", "2", "--k", "2", "--pairs", "1", "--out", csv}) == 3);
  CHECK(run_cli({"sweep", "--dim", "3", "--k", "2", "--pairs", "0", "--out", csv}) == 3);
}

TEST_CASE("witness emits a verifiable json document") {
  const PureState target = sample_pure(4, 321, 3);
  const std::string path = write_state(target, "mlc_cli_wit.json");
  std::string out;
  CHECK(run_cli({"witness", path, "--k", "2", "--seed", "5"}, &out) == 0);
  const auto j = nlohmann::json::parse(out);
  CHECK(j.at("level") == 2);
  CHECK(double(j.at("g_witness")) >= double(j.at("threshold")) - 1e-12);
  CHECK(double(j.at("r_target")) ==
        doctest::Approx(robustness_k(target, CoherenceLevel(2)).value).epsilon(1e-12));

  const PureState witness = parse_state_json(j.at("witness").dump());
  const TwoOutcomeMap map = two_outcome_from_json(j.at("map").dump());
  const Matrix got = apply(map, outer_product(witness)).matrix();
  CHECK((got - outer_product(target).matrix()).cwiseAbs().maxCoeff() <= 1e-10);

  // byte-identical on a rerun with the same seed
  std::string again;
  CHECK(run_cli({"witness", path, "--k", "2", "--seed", "5"}, &again) == 0);
  CHECK(again == out);
  std::remove(path.c_str());
}

TEST_CASE("witness rejects free targets") {
  Vector flat = Vector::Zero(4);
  flat[0] = flat[1] = 1.0 / std::sqrt(2.0);
  const std::string path = write_state(PureState(4, flat), "mlc_cli_wfree.json");
  CHECK(run_cli({"witness", path, "--k", "2", "--seed", "1"}) == 4);
  std::remove(path.c_str());
}
