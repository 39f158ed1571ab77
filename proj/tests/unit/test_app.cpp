#include "doctest.h"

#include "dense_oracle.hpp"
#include "qwalk/app.hpp"
#include "qwalk/errors.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

using namespace qwalk;
using nlohmann::json;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json{{"schema_version", 1}, {"walk", "dtqw"}, {"steps", 1}, {"half_width", 4},
              {"theta1", pi / 4}, {"initial_coin", {{1, 0}, {0, 0}}}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "qwalk_test_app";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QWALK_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& doc) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << doc.dump();
  return p;
}

}  // namespace

TEST_CASE("run: one Hadamard-like step from |0>") {
  const auto out = run(parse_config(base_config()));
  CHECK(out.csv == "t,x,P\n0,0,1\n1,-1,0.50000000000000011\n1,1,0.49999999999999989\n");
  const auto& m = out.summary["moments"];
  REQUIRE(m.size() == 2);
  CHECK(m[1]["total_probability"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m[1]["variance"].get<double>() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("run: zero steps is a single row") {
  auto doc = base_config();
  doc["steps"] = 0;
  doc["start_site"] = 2;
  CHECK(run(parse_config(doc)).csv == "t,x,P\n0,2,1\n");
}

TEST_CASE("run: emit_all_rows writes every site") {
  auto doc = base_config();
  doc["emit_all_rows"] = true;
  const auto rows = lines(run(parse_config(doc)).csv);
  CHECK(rows.size() == 1 + 2 * 9);
  CHECK(rows[1] == "0,-4,0");
}

TEST_CASE("run: probabilities sum to one in every row group") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc.erase("theta1");
  doc["coin1"] = {{"random_theta", true}};
  doc["coin2"] = {{"random_theta", true}};
  doc["steps"] = 20;
  doc["half_width"] = 22;
  doc["seed"] = 5;
  const auto out = run(parse_config(doc));
  std::vector<double> totals(21, 0.0);
  for (const auto& line : lines(out.csv)) {
    if (line == "t,x,P") continue;
    int t = 0, x = 0;
    double p = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf", &t, &x, &p) == 3);
    totals[static_cast<std::size_t>(t)] += p;
  }
  for (double s : totals) CHECK(std::abs(s - 1.0) < 1e-10);
}

TEST_CASE("run is deterministic") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc.erase("theta1");
  doc["coin1"] = {{"random_theta", true}};
  doc["coin2"] = {{"homogeneous", {{"chi", 0.1}, {"xi", 0.2}, {"eta", 0.3}, {"theta", 0.4}}}};
  doc["steps"] = 15;
  doc["half_width"] = 20;
  doc["seed"] = 77;
  const auto a = run(parse_config(doc));
  const auto b = run(parse_config(doc));
  CHECK(a.csv == b.csv);
  CHECK(a.summary.dump() == b.summary.dump());
  doc["seed"] = 78;
  CHECK(run(parse_config(doc)).csv != a.csv);
}

TEST_CASE("config validation") {
  auto unknown = base_config();
  unknown["stepz"] = 3;
  CHECK_THROWS_AS(parse_config(unknown), ConfigError);

  auto version = base_config();
  version["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(version), ConfigError);

  auto no_version = base_config();
  no_version.erase("schema_version");
  CHECK_THROWS_AS(parse_config(no_version), ConfigError);

  auto kind = base_config();
  kind["walk"] = "continuous";
  CHECK_THROWS_AS(parse_config(kind), ConfigError);

  auto both = base_config();
  both["coin1"] = {{"random_theta", true}};
  CHECK_THROWS_AS(parse_config(both), ConfigError);

  auto extra_coin = base_config();
  extra_coin["theta2"] = 0.3;
  CHECK_THROWS_AS(parse_config(extra_coin), ConfigError);

  auto field = base_config();
  field["electric_phase"] = 0.3;
  CHECK_THROWS_AS(parse_config(field), ConfigError);

  auto ss = base_config();
  ss["walk"] = "ssqw";
  ss["coin2"] = {{"random_theta", true}};
  CHECK_THROWS_AS(parse_config(ss), ConfigError);

  auto coin = base_config();
  coin["initial_coin"] = {{1, 0}, {1, 0}};
  CHECK_THROWS_AS(parse_config(coin), ConfigError);

  auto type = base_config();
  type["steps"] = "ten";
  CHECK_THROWS_AS(parse_config(type), ConfigError);

  auto sites = base_config();
  sites.erase("theta1");
  sites["coin1"] = {{"sites", json::array({{{"chi", 0}, {"xi", 0}, {"eta", 0}, {"theta", 1}}})}};
  CHECK_THROWS_AS(parse_config(sites), ConfigError);
}

TEST_CASE("guard violation reports the required lattice") {
  auto doc = base_config();
  doc["steps"] = 30;
  const auto config = parse_config(doc);
  try {
    run(config);
    FAIL("expected guard violation");
  } catch (const GuardViolation& e) {
    CHECK(e.required_half_width() == 32);
    CHECK(std::string(e.what()).find("32") != std::string::npos);
  }
}

TEST_CASE("default initial coin is the symmetric superposition") {
  auto doc = base_config();
  doc.erase("initial_coin");
  const auto c = parse_config(doc);
  CHECK(std::abs(c.initial_coin[0] - std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(c.initial_coin[1] - cd(0.0, std::sqrt(0.5))) < 1e-15);
}

TEST_CASE("random tables draw coin1 then coin2 from the seed") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc.erase("theta1");
  doc["coin1"] = {{"random_theta", true}};
  doc["coin2"] = {{"random_theta", true}};
  doc["seed"] = 9;
  const auto spec = resolve(parse_config(doc), 9);
  std::mt19937_64 rng(9);
  const auto t1 = CoinTable::random_theta(4, rng);
  const auto t2 = CoinTable::random_theta(4, rng);
  CHECK(*spec.table1 == t1);
  CHECK(*spec.table2 == t2);
}

TEST_CASE("compile: identity ssqw coins give the full shift") {
  auto doc = base_config();
  doc["walk"] = "ssqw";
  doc["theta1"] = 0.0;
  doc["theta2"] = 0.0;
  doc["steps"] = 2;
  const auto parts = compile(parse_config(doc), true);
  REQUIRE(parts["step_blocks"].size() == 2);
  CHECK(parts["step_blocks"][0]["elements"].size() == 5);
  const auto blocks = read_parts_list(parts);
  const auto cmp = equal_up_to_phase(compose(blocks[0].element_list(), 4),
                                     LatticeOperator(4, oracle::shift_full(4)), 1e-12);
  CHECK(cmp.equal);
  CHECK(parts["verification"]["passed"].get<bool>());
}

TEST_CASE("compile: records are ordered and typed") {
  auto doc = base_config();
  doc["walk"] = "ssqw";
  doc["theta1"] = 0.3;
  doc["theta2"] = 1.1;
  const auto parts = compile(parse_config(doc), false);
  CHECK_FALSE(parts.contains("verification"));
  const auto& elements = parts["step_blocks"][0]["elements"];
  const char* types[] = {"vwp", "jplate", "vwp", "hwp", "jplate"};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(elements[i]["order"] == i + 1);
    CHECK(elements[i]["element_type"] == types[i]);
    CHECK(elements[i]["provenance"].is_string());
  }
  CHECK(elements[1]["parameters"]["m_x"] == -1);
}

TEST_CASE("compile: random ssqw verifies and round trips") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int i = 0; i < 10; ++i) {
    auto doc = base_config();
    doc["walk"] = "ssqw";
    doc.erase("theta1");
    doc["coin1"] = {{"homogeneous", {{"chi", u(rng)}, {"xi", u(rng)}, {"eta", u(rng)}, {"theta", u(rng)}}}};
    doc["coin2"] = {{"homogeneous", {{"chi", u(rng)}, {"xi", u(rng)}, {"eta", u(rng)}, {"theta", u(rng)}}}};
    const auto config = parse_config(doc);
    const auto parts = compile(config, true);
    const double stated = parts["verification"]["fidelity"].get<double>();
    CHECK(stated >= 1.0 - 1e-10);
    CHECK(parts["verification"]["gamma2_constant_fidelity"].get<double>() < 1.0 - 1e-8);

    const auto reparsed = json::parse(parts.dump(2));
    const auto blocks = read_parts_list(reparsed);
    const auto report = verify(blocks[0], step_reference(resolve(config, config.seed)));
    CHECK(report.fidelity == doctest::Approx(stated).epsilon(1e-14));
  }
}

TEST_CASE("compile: generalized blocks match the ssqw compilation") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc["steps"] = 2;
  doc["half_width"] = 5;
  doc["theta1"] = 0.6;
  doc["theta2"] = -0.4;
  const auto gen = read_parts_list(compile(parse_config(doc), true));
  doc["walk"] = "ssqw";
  const auto ss = read_parts_list(compile(parse_config(doc), true));
  REQUIRE(gen.size() == 2);
  for (const auto& block : gen) {
    CHECK(block.elements.size() == 4);
    CHECK(equal_up_to_phase(compose(block.element_list(), 5), compose(ss[0].element_list(), 5), 1e-10)
              .equal);
  }
}

TEST_CASE("compile rejects walks without an optical recipe") {
  CHECK_THROWS_AS(compile(parse_config(base_config()), true), ConfigError);
}

TEST_CASE("parts-list records reject non-integer vortex charges") {
  json record = {{"order", 1},
                 {"element_type", "jplate"},
                 {"parameters", {{"m_x", 0.5}, {"c_x", 0}, {"m_y", 0}, {"c_y", 0}, {"angle", 0}}},
                 {"provenance", ""}};
  CHECK_THROWS_AS(element_from_json(record), ConfigError);
  record["parameters"]["m_x"] = -1;
  CHECK(std::get<JPlateSpec>(element_from_json(record)) == JPlateSpec{-1, 0, 0, 0, 0});
  record["element_type"] = "lens";
  CHECK_THROWS_AS(element_from_json(record), ConfigError);
}

TEST_CASE("element json round trip") {
  const ElementList elements = {JPlateSpec{1, 0.25, -1, 0.5, 0.125}, HalfWavePlate{0.3},
                                VariableWavePlate{-1.7}, compile_pdc(theta_table(0.9, 2))};
  for (const auto& e : elements) {
    const json record = {{"order", 1}, {"element_type", std::string(element_type(e))},
                         {"parameters", to_json(e)}, {"provenance", "x"}};
    CHECK(element_from_json(json::parse(record.dump())) == e);
  }
}

TEST_CASE("localize: identity tables match the plain walk") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc.erase("theta1");
  doc["coin1"] = {{"homogeneous", {{"chi", 0}, {"xi", 0}, {"eta", 0}, {"theta", 0}}}};
  doc["coin2"] = doc["coin1"];
  doc["steps"] = 6;
  doc["half_width"] = 8;
  const auto config = parse_config(doc);
  const auto ens = localize(config, 1);
  const auto summary = run(config).summary["moments"];
  const auto sigma = ens["ensemble"][0]["sigma"];
  for (std::size_t t = 0; t < summary.size(); ++t) {
    CHECK(sigma[t].get<double>() ==
          doctest::Approx(std::sqrt(summary[t]["variance"].get<double>())).epsilon(1e-14));
  }
}

TEST_CASE("localize: disorder suppresses spreading") {
  auto doc = base_config();
  doc["walk"] = "generalized";
  doc.erase("theta1");
  doc["coin1"] = {{"random_theta", true}};
  doc["coin2"] = {{"random_theta", true}};
  doc["steps"] = 60;
  doc["half_width"] = 62;
  doc["seed"] = 1000;
  const auto ens = localize(parse_config(doc), 6);
  CHECK(ens["members"] == 6);
  REQUIRE(ens["ensemble"].size() == 6);
  CHECK(ens["ensemble"][5]["seed"] == 1005);
  const auto mean = ens["ensemble_mean_sigma"];
  const auto base = ens["baseline"]["sigma"];
  CHECK(mean[60].get<double>() < base[60].get<double>());
  CHECK(mean[60].get<double>() / mean[30].get<double>() < 2.0);
  CHECK(localize(parse_config(doc), 6).dump() == ens.dump());

  auto plain = base_config();
  CHECK_THROWS_AS(localize(parse_config(plain), 3), ConfigError);
}

TEST_CASE("format_real keeps 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(0.0) == "0");
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch_dir();
  const auto good = write_config("good.json", base_config());
  const auto out = (dir / "dist.csv").string();
  CHECK(cli("run --config " + good.string() + " --out " + out) == 0);
  CHECK(slurp(out) == run(parse_config(base_config())).csv);
  CHECK(fs::exists(out + ".summary.json"));

  auto bad = base_config();
  bad["bogus"] = 1;
  CHECK(cli("run --config " + write_config("bad.json", bad).string() + " --out " + out) == 2);
  CHECK(cli("run --config " + (dir / "missing.json").string() + " --out " + out) == 2);
  CHECK(cli("frobnicate") == 2);

  auto big = base_config();
  big["steps"] = 40;
  CHECK(cli("run --config " + write_config("big.json", big).string() + " --out " + out) == 3);

  auto ss = base_config();
  ss["walk"] = "ssqw";
  ss["theta1"] = 0.4;
  ss["theta2"] = 0.9;
  const auto ss_path = write_config("ss.json", ss).string();
  const auto parts = (dir / "parts.json").string();
  CHECK(cli("compile --config " + ss_path + " --out " + parts + " --verify") == 0);
  CHECK(json::parse(slurp(parts))["verification"]["passed"].get<bool>());
  CHECK(cli("verify --config " + ss_path + " --out " + parts) == 0);
  CHECK(cli("compile --config " + good.string() + " --out " + parts) == 2);

  auto gen = base_config();
  gen["walk"] = "generalized";
  gen.erase("theta1");
  gen["coin1"] = {{"random_theta", true}};
  gen["coin2"] = {{"random_theta", true}};
  gen["steps"] = 10;
  gen["half_width"] = 12;
  const auto ens = (dir / "ens.json").string();
  CHECK(cli("localize --config " + write_config("gen.json", gen).string() + " --seeds 3 --out " + ens) == 0);
  CHECK(json::parse(slurp(ens))["members"] == 3);

  CHECK(cli("run --config " + good.string() + " --out " + (dir / "no/such/dir.csv").string()) == 1);
}
