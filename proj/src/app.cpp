#include "qwalk/app.hpp"

#include "qwalk/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <set>
#include <sstream>

namespace qwalk {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// Key-checked view of one JSON object.
class ObjectReader {
 public:
  ObjectReader(const json& doc, std::string where, std::set<std::string> allowed)
      : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    for (const auto& [key, value] : doc_.items()) {
      if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where_);
    }
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& raw(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key '" + key + "' in " + where_);
    return doc_.at(key);
  }

  double real(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("'" + key + "' must be finite");
    return d;
  }
  double real(const std::string& key, double fallback) const {
    return has(key) ? real(key) : fallback;
  }

  int integer(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
    return v.get<std::string>();
  }

 private:
  const json& doc_;
  std::string where_;
};

CoinParams parse_params(const json& doc, const std::string& where) {
  ObjectReader r(doc, where, {"chi", "xi", "eta", "theta"});
  return CoinParams{r.real("chi", 0.0), r.real("xi", 0.0), r.real("eta", 0.0),
                    r.real("theta", 0.0)};
}

TableSource parse_table(const json& doc, const std::string& where) {
  ObjectReader r(doc, where, {"homogeneous", "random_theta", "sites"});
  const int given = int{r.has("homogeneous")} + int{r.has("random_theta")} + int{r.has("sites")};
  if (given != 1) {
    throw ConfigError(where + " needs exactly one of 'homogeneous', 'random_theta', 'sites'");
  }
  TableSource out;
  if (r.has("homogeneous")) {
    out.kind = TableSource::Kind::kHomogeneous;
    out.params = parse_params(r.raw("homogeneous"), where + ".homogeneous");
  } else if (r.has("random_theta")) {
    if (!r.boolean("random_theta", false)) {
      throw ConfigError(where + ".random_theta must be true when present");
    }
    out.kind = TableSource::Kind::kRandomTheta;
  } else {
    const json& list = r.raw("sites");
    if (!list.is_array()) throw ConfigError(where + ".sites must be an array");
    out.kind = TableSource::Kind::kSites;
    for (std::size_t i = 0; i < list.size(); ++i) {
      out.sites.push_back(parse_params(list[i], where + ".sites[" + std::to_string(i) + "]"));
    }
  }
  return out;
}

Vec2 parse_coin(const json& doc) {
  auto fail = [] { throw ConfigError("initial_coin must be [[re, im], [re, im]]"); };
  if (!doc.is_array() || doc.size() != 2) fail();
  Vec2 out;
  for (int i = 0; i < 2; ++i) {
    const json& c = doc[static_cast<std::size_t>(i)];
    if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) fail();
    out[i] = cd{c[0].get<double>(), c[1].get<double>()};
  }
  return out;
}

CoinTable build_table(const TableSource& source, int half_width, std::mt19937_64& rng) {
  switch (source.kind) {
    case TableSource::Kind::kHomogeneous:
      return CoinTable::homogeneous(source.params, half_width);
    case TableSource::Kind::kRandomTheta:
      return CoinTable::random_theta(half_width, rng);
    case TableSource::Kind::kSites:
      if (source.sites.size() != static_cast<std::size_t>(2 * half_width + 1)) {
        throw ConfigError("coin table lists " + std::to_string(source.sites.size()) +
                          " sites, lattice has " + std::to_string(2 * half_width + 1));
      }
      return CoinTable(half_width, source.sites);
  }
  throw ConfigError("unknown coin table source");
}

std::vector<double> sigma_series(const WalkSpec& spec) {
  std::vector<double> sigma;
  for (const auto& state : evolve(spec)) {
    sigma.push_back(std::sqrt(moments(probability(state)).variance));
  }
  return sigma;
}

json header(const RunConfig& config) {
  return json{{"schema_version", kSchemaVersion},
              {"walk", std::string(to_string(config.kind))},
              {"steps", config.steps},
              {"half_width", config.half_width},
              {"seed", config.seed}};
}

json report_json(const VerificationReport& report, int half_width) {
  json factors = json::array();
  for (const auto& f : report.factors) {
    factors.push_back(
        {{"order", f.order}, {"element_type", f.type}, {"unitarity_defect", f.unitarity_defect}});
  }
  return json{{"half_width", half_width},     {"fidelity", report.fidelity},
              {"phase", report.phase},        {"residual", report.residual},
              {"passed", report.passed},      {"tolerance", kVerifyTolerance},
              {"factors", std::move(factors)}};
}

json jplate_json(const JPlateSpec& p) {
  return json{{"m_x", p.m_x}, {"c_x", p.c_x}, {"m_y", p.m_y}, {"c_y", p.c_y}, {"angle", p.angle}};
}

JPlateSpec jplate_from_json(const json& doc, const std::string& where) {
  ObjectReader r(doc, where, {"m_x", "c_x", "m_y", "c_y", "angle"});
  try {
    return make_jplate(r.real("m_x"), r.real("c_x"), r.real("m_y"), r.real("c_y"),
                       r.real("angle"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

// ----------------------------------------------------------------- config

RunConfig parse_config(const json& doc) {
  ObjectReader r(doc, "config",
                 {"schema_version", "walk", "steps", "half_width", "start_site", "initial_coin",
                  "theta1", "theta2", "coin1", "coin2", "electric_phase", "seed",
                  "emit_all_rows", "verify", "ensemble_size", "summary_out"});
  if (r.integer("schema_version") != kSchemaVersion) {
    throw ConfigError("unsupported schema_version; expected " + std::to_string(kSchemaVersion));
  }
  RunConfig c;
  const auto kind = parse_walk_kind(r.string("walk"));
  if (!kind) throw ConfigError("unknown walk kind '" + r.string("walk") + "'");
  c.kind = *kind;
  c.steps = r.integer("steps");
  c.half_width = r.integer("half_width");
  c.start_site = r.integer("start_site", 0);
  c.initial_coin = r.has("initial_coin") ? parse_coin(r.raw("initial_coin"))
                                         : Vec2(cd{1.0, 0.0}, cd{0.0, 1.0}) / std::sqrt(2.0);
  c.electric_phase = r.real("electric_phase", 0.0);
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  c.emit_all_rows = r.boolean("emit_all_rows", false);
  c.verify = r.boolean("verify", false);
  c.ensemble_size = r.integer("ensemble_size", 1);
  if (r.has("summary_out")) c.summary_out = r.string("summary_out");

  if (c.steps < 0) throw ConfigError("'steps' must be non-negative");
  if (c.half_width < 1) throw ConfigError("'half_width' must be positive");
  if (c.ensemble_size < 1) throw ConfigError("'ensemble_size' must be at least 1");

  auto coin = [&](const std::string& theta_key,
                  const std::string& table_key) -> std::optional<TableSource> {
    if (r.has(theta_key) && r.has(table_key)) {
      throw ConfigError("give either '" + theta_key + "' or '" + table_key + "', not both");
    }
    if (r.has(theta_key)) {
      return TableSource{TableSource::Kind::kHomogeneous, CoinParams{0, 0, 0, r.real(theta_key)},
                         {}};
    }
    if (r.has(table_key)) return parse_table(r.raw(table_key), table_key);
    return std::nullopt;
  };
  c.coin1 = coin("theta1", "coin1");
  c.coin2 = coin("theta2", "coin2");
  const bool split_step = c.kind == WalkKind::kSsqw || c.kind == WalkKind::kGeneralized;
  if (!c.coin1) throw ConfigError("missing coin: give 'theta1' or 'coin1'");
  if (split_step && !c.coin2) throw ConfigError("missing second coin: give 'theta2' or 'coin2'");
  if (!split_step && c.coin2) {
    throw ConfigError("a second coin is only used by ssqw and generalized walks");
  }
  if (c.kind == WalkKind::kSsqw) {
    for (const auto& src : {*c.coin1, *c.coin2}) {
      if (src.kind != TableSource::Kind::kHomogeneous) {
        throw ConfigError("ssqw coins must be homogeneous; use a generalized walk");
      }
    }
  }
  if (c.kind != WalkKind::kElectricDtqw && r.has("electric_phase")) {
    throw ConfigError("'electric_phase' is only used by electric-dtqw walks");
  }

  // Schema-level consistency so nothing is computed on a bad config.
  WalkSpec probe = resolve(c, c.seed);
  try {
    validate(probe);
  } catch (const GuardViolation&) {
    // reported by the pipeline with exit status 3
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

WalkSpec resolve(const RunConfig& c, std::uint64_t seed) {
  WalkSpec spec;
  spec.kind = c.kind;
  spec.steps = c.steps;
  spec.initial_coin = c.initial_coin;
  spec.start_site = c.start_site;
  spec.half_width = c.half_width;
  spec.electric_phase = c.electric_phase;
  spec.seed = seed;
  std::mt19937_64 rng(seed);
  if (c.coin1) spec.table1 = build_table(*c.coin1, c.half_width, rng);
  if (c.coin2) spec.table2 = build_table(*c.coin2, c.half_width, rng);
  return spec;
}

// ------------------------------------------------------------------- run

RunOutput run(const RunConfig& config) {
  const WalkSpec spec = resolve(config, config.seed);
  const auto trajectory = evolve(spec);

  std::string csv = "t,x,P\n";
  json rows = json::array();
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const Distribution dist = probability(trajectory[t]);
    for (int x = -dist.half_width(); x <= dist.half_width(); ++x) {
      const double p = dist.at(x);
      if (p > 0.0 || config.emit_all_rows) {
        csv += std::to_string(t) + "," + std::to_string(x) + "," + format_real(p) + "\n";
      }
    }
    const Moments m = moments(dist);
    rows.push_back({{"t", t},
                    {"mean", m.mean},
                    {"variance", m.variance},
                    {"total_probability", dist.total()}});
  }
  json summary = header(config);
  summary["moments"] = std::move(rows);
  return {std::move(csv), std::move(summary)};
}

// --------------------------------------------------------------- compile

json to_json(const OpticalElement& element) {
  return std::visit(
      [](const auto& e) -> json {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, JPlateSpec>) {
          return jplate_json(e);
        } else if constexpr (std::is_same_v<T, HalfWavePlate>) {
          return json{{"fast_axis", e.fast_axis}};
        } else if constexpr (std::is_same_v<T, VariableWavePlate>) {
          return json{{"retardance", e.retardance}};
        } else {
          json sites = json::array();
          for (std::size_t i = 0; i < e.sites.size(); ++i) {
            const auto& s = e.sites[i];
            sites.push_back({{"x", static_cast<int>(i) - e.half_width},
                             {"hwp", {{"fast_axis", s.hwp.fast_axis}}},
                             {"q1", jplate_json(s.q1)},
                             {"q2", jplate_json(s.q2)}});
          }
          return json{{"half_width", e.half_width}, {"sites", std::move(sites)}};
        }
      },
      element);
}

OpticalElement element_from_json(const json& record) {
  ObjectReader r(record, "parts-list record", {"order", "element_type", "parameters",
                                               "provenance"});
  const std::string type = r.string("element_type");
  const json& params = r.raw("parameters");
  if (type == "jplate") return jplate_from_json(params, "jplate parameters");
  if (type == "hwp") {
    return HalfWavePlate{ObjectReader(params, "hwp parameters", {"fast_axis"}).real("fast_axis")};
  }
  if (type == "vwp") {
    return VariableWavePlate{
        ObjectReader(params, "vwp parameters", {"retardance"}).real("retardance")};
  }
  if (type == "pdc_stage") {
    ObjectReader pr(params, "pdc_stage parameters", {"half_width", "sites"});
    PdcStage stage;
    stage.half_width = pr.integer("half_width");
    const json& sites = pr.raw("sites");
    if (!sites.is_array() || sites.size() != static_cast<std::size_t>(2 * stage.half_width + 1)) {
      throw ConfigError("pdc_stage must list one entry per site");
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
      ObjectReader sr(sites[i], "pdc_stage site", {"x", "hwp", "q1", "q2"});
      if (sr.integer("x") != static_cast<int>(i) - stage.half_width) {
        throw ConfigError("pdc_stage sites must be in ascending x order");
      }
      PdcSite site;
      site.hwp = HalfWavePlate{ObjectReader(sr.raw("hwp"), "hwp", {"fast_axis"}).real("fast_axis")};
      site.q1 = jplate_from_json(sr.raw("q1"), "q1");
      site.q2 = jplate_from_json(sr.raw("q2"), "q2");
      stage.sites.push_back(site);
    }
    return stage;
  }
  throw ConfigError("unknown element_type '" + type + "'");
}

json compile(const RunConfig& config, bool verify_train) {
  if (config.kind != WalkKind::kSsqw && config.kind != WalkKind::kGeneralized) {
    throw ConfigError("optical compilation supports ssqw and generalized walks, not " +
                      std::string(to_string(config.kind)));
  }
  WalkSpec spec = resolve(config, config.seed);
  validate(spec);

  CompiledStep block;
  json doc = header(config);
  if (spec.kind == WalkKind::kSsqw) {
    block = compile_ssqw(u2_matrix(spec.table1->at(0)), u2_matrix(spec.table2->at(0)));
    doc["first_plate_constant"] = "(gamma1+pi)/2";
  } else {
    WalkSpec one = spec;
    one.steps = 1;
    block = compile_generalized(one).front();
  }
  doc["global_phase"] = block.global_phase;

  json blocks = json::array();
  for (int t = 1; t <= spec.steps; ++t) {
    json elements = json::array();
    for (std::size_t i = 0; i < block.elements.size(); ++i) {
      const auto& e = block.elements[i];
      elements.push_back({{"order", i + 1},
                          {"element_type", std::string(element_type(e.element))},
                          {"parameters", to_json(e.element)},
                          {"provenance", e.provenance}});
    }
    blocks.push_back(
        {{"step", t}, {"global_phase", block.global_phase}, {"elements", std::move(elements)}});
  }
  doc["step_blocks"] = std::move(blocks);

  if (verify_train) {
    const LatticeOperator reference = step_reference(spec);
    const VerificationReport report = verify(block, reference);
    json v = report_json(report, spec.half_width);
    if (spec.kind == WalkKind::kSsqw) {
      // Same train with (gamma2 + pi)/2 on the last plate, for comparison.
      const auto params =
          ssqw_parameters(u2_matrix(spec.table1->at(0)), u2_matrix(spec.table2->at(0)));
      const auto variant = build_ssqw_train(params, (params.euler.gamma2 + kPi) / 2.0);
      v["gamma2_constant_fidelity"] = verify(variant, reference).fidelity;
    }
    doc["verification"] = std::move(v);
    if (!report.passed) {
      throw VerificationError("compiled train failed verification (fidelity " +
                                  format_real(report.fidelity) + ")",
                              report.fidelity);
    }
  }
  return doc;
}

std::vector<CompiledStep> read_parts_list(const json& doc) {
  if (!doc.is_object() || !doc.contains("step_blocks") || !doc["step_blocks"].is_array()) {
    throw ConfigError("parts list needs a step_blocks array");
  }
  std::vector<CompiledStep> out;
  for (const auto& b : doc["step_blocks"]) {
    ObjectReader r(b, "step block", {"step", "global_phase", "elements"});
    CompiledStep step;
    step.global_phase = r.real("global_phase");
    const json& elements = r.raw("elements");
    if (!elements.is_array()) throw ConfigError("step block elements must be an array");
    for (const auto& e : elements) {
      step.elements.push_back({element_from_json(e), e.value("provenance", std::string())});
    }
    out.push_back(std::move(step));
  }
  return out;
}

// -------------------------------------------------------------- localize

json localize(const RunConfig& config, int members) {
  if (config.kind != WalkKind::kGeneralized) {
    throw ConfigError("localization ensembles need a generalized walk");
  }
  if (members < 1) throw ConfigError("ensemble size must be at least 1");

  std::vector<std::future<std::vector<double>>> jobs;
  jobs.reserve(static_cast<std::size_t>(members));
  for (int i = 0; i < members; ++i) {
    const WalkSpec spec = resolve(config, config.seed + static_cast<std::uint64_t>(i));
    validate(spec);
    jobs.push_back(std::async(std::launch::async, [spec] { return sigma_series(spec); }));
  }

  json ensemble = json::array();
  std::vector<double> mean(static_cast<std::size_t>(config.steps) + 1, 0.0);
  for (int i = 0; i < members; ++i) {
    const auto sigma = jobs[static_cast<std::size_t>(i)].get();
    for (std::size_t t = 0; t < sigma.size(); ++t) mean[t] += sigma[t] / members;
    ensemble.push_back({{"seed", config.seed + static_cast<std::uint64_t>(i)}, {"sigma", sigma}});
  }

  RunConfig ballistic = config;
  ballistic.coin1 = TableSource{TableSource::Kind::kHomogeneous, CoinParams{0, 0, 0, kPi / 4}, {}};
  ballistic.coin2 = ballistic.coin1;

  json doc = header(config);
  doc["members"] = members;
  doc["ensemble"] = std::move(ensemble);
  doc["ensemble_mean_sigma"] = mean;
  doc["baseline"] = {{"coins", "homogeneous theta=pi/4"},
                     {"sigma", sigma_series(resolve(ballistic, config.seed))}};
  return doc;
}

}  // namespace qwalk
