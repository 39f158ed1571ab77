#include "qwalk/walk_core.hpp"

#include "qwalk/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qwalk {

namespace {

constexpr cd kI{0.0, 1.0};

std::size_t site_index(int x, int half_width) {
  return static_cast<std::size_t>(x + half_width);
}

void check_half_width(int half_width) {
  if (half_width < 1) {
    throw std::invalid_argument("lattice half-width must be at least 1, got " +
                                std::to_string(half_width));
  }
}

// e^{i a s2} = cos a I + i sin a s2
Mat2 exp_i_sigma2(double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  Mat2 m;
  m << c, s, -s, c;
  return m;
}

Mat2 exp_i_sigma3(double a) {
  Mat2 m;
  m << std::polar(1.0, a), 0.0, 0.0, std::polar(1.0, -a);
  return m;
}

// Moves component `comp` by `offset` sites; the other component stays put.
WalkerState shift_component(const WalkerState& state, int comp, int offset, EdgePolicy policy,
                            const char* name) {
  const int half = state.half_width();
  std::vector<Vec2> out(static_cast<std::size_t>(state.num_sites()), Vec2::Zero());
  const auto in = state.amplitudes();
  for (int x = -half; x <= half; ++x) {
    const Vec2& a = in[site_index(x, half)];
    out[site_index(x, half)][1 - comp] += a[1 - comp];
    const int dest = x + offset;
    if (state.contains(dest)) {
      out[site_index(dest, half)][comp] += a[comp];
    } else if (policy == EdgePolicy::kGuard && std::abs(a[comp]) > kGuardTolerance) {
      throw GuardViolation(std::string(name) + ": amplitude " + std::to_string(std::abs(a[comp])) +
                               " at site " + std::to_string(x) + " would leave the lattice [" +
                               std::to_string(-half) + ", " + std::to_string(half) + "]",
                           half + 1);
    }
  }
  return WalkerState(half, std::move(out));
}

}  // namespace

// ---------------------------------------------------------------- WalkerState

WalkerState WalkerState::zeros(int half_width) {
  check_half_width(half_width);
  return WalkerState(half_width,
                     std::vector<Vec2>(static_cast<std::size_t>(2 * half_width + 1), Vec2::Zero()));
}

WalkerState::WalkerState(int half_width, std::vector<Vec2> amplitudes)
    : half_width_(half_width), amplitudes_(std::move(amplitudes)) {
  check_half_width(half_width);
  if (amplitudes_.size() != static_cast<std::size_t>(2 * half_width + 1)) {
    throw DimensionMismatch("expected " + std::to_string(2 * half_width + 1) +
                            " amplitude pairs, got " + std::to_string(amplitudes_.size()));
  }
}

const Vec2& WalkerState::at(int x) const {
  if (!contains(x)) {
    throw std::out_of_range("site " + std::to_string(x) + " outside lattice");
  }
  return amplitudes_[site_index(x, half_width_)];
}

double WalkerState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += a.squaredNorm();
  return total;
}

// ------------------------------------------------------------------ CoinTable

CoinTable::CoinTable(int half_width, std::vector<CoinParams> sites)
    : half_width_(half_width), sites_(std::move(sites)) {
  check_half_width(half_width);
  if (sites_.size() != static_cast<std::size_t>(2 * half_width + 1)) {
    throw DimensionMismatch("coin table needs " + std::to_string(2 * half_width + 1) +
                            " entries, got " + std::to_string(sites_.size()));
  }
  for (const auto& p : sites_) {
    if (!std::isfinite(p.chi) || !std::isfinite(p.xi) || !std::isfinite(p.eta) ||
        !std::isfinite(p.theta)) {
      throw std::invalid_argument("coin angles must be finite");
    }
  }
}

CoinTable CoinTable::homogeneous(const CoinParams& params, int half_width) {
  check_half_width(half_width);
  return CoinTable(half_width,
                   std::vector<CoinParams>(static_cast<std::size_t>(2 * half_width + 1), params));
}

CoinTable CoinTable::random_theta(int half_width, std::mt19937_64& rng) {
  check_half_width(half_width);
  std::vector<CoinParams> sites;
  sites.reserve(static_cast<std::size_t>(2 * half_width + 1));
  for (int x = -half_width; x <= half_width; ++x) {
    sites.push_back(CoinParams{0.0, 0.0, 0.0, uniform_angle(rng)});
  }
  return CoinTable(half_width, std::move(sites));
}

const CoinParams& CoinTable::at(int x) const {
  if (x < -half_width_ || x > half_width_) {
    throw std::out_of_range("coin table has no entry for site " + std::to_string(x));
  }
  return sites_[site_index(x, half_width_)];
}

CoinTable theta_table(double theta, int half_width) {
  return CoinTable::homogeneous(CoinParams{0.0, 0.0, 0.0, theta}, half_width);
}

bool is_homogeneous(const CoinTable& table) {
  const auto sites = table.sites();
  for (const auto& p : sites) {
    if (!(p == sites.front())) return false;
  }
  return true;
}

double uniform_angle(std::mt19937_64& rng) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return kTwoPi * unit;
}

// ------------------------------------------------------------------- WalkKind

std::string_view to_string(WalkKind kind) {
  switch (kind) {
    case WalkKind::kDtqw: return "dtqw";
    case WalkKind::kSsqw: return "ssqw";
    case WalkKind::kGeneralized: return "generalized";
    case WalkKind::kElectricDtqw: return "electric-dtqw";
  }
  return "unknown";
}

std::optional<WalkKind> parse_walk_kind(std::string_view name) {
  for (auto kind : {WalkKind::kDtqw, WalkKind::kSsqw, WalkKind::kGeneralized,
                    WalkKind::kElectricDtqw}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- validation

int required_half_width(int steps, int start_site) {
  return std::abs(start_site) + steps + 2;
}

void validate(const WalkSpec& spec) {
  if (spec.steps < 0) throw ConfigError("steps must be non-negative");
  if (spec.half_width < 1) throw ConfigError("half_width must be at least 1");
  if (std::abs(spec.start_site) >= spec.half_width) {
    throw ConfigError("start site " + std::to_string(spec.start_site) + " outside lattice");
  }
  if (std::abs(spec.initial_coin.squaredNorm() - 1.0) > kNormTolerance) {
    throw ConfigError("initial coin vector is not normalized");
  }
  if (!std::isfinite(spec.electric_phase)) throw ConfigError("electric phase must be finite");
  const bool needs_second = spec.kind == WalkKind::kSsqw || spec.kind == WalkKind::kGeneralized;
  if (!spec.table1 || (needs_second && !spec.table2)) {
    throw ConfigError(std::string(to_string(spec.kind)) + " walk is missing a coin table");
  }
  for (const auto* table : {&spec.table1, &spec.table2}) {
    if (*table && (*table)->half_width() != spec.half_width) {
      throw ConfigError("coin tables do not cover the walk lattice");
    }
  }
  if (spec.kind == WalkKind::kSsqw &&
      (!is_homogeneous(*spec.table1) || !is_homogeneous(*spec.table2))) {
    throw ConfigError("ssqw coins must be position independent; use a generalized walk");
  }
  const int needed = required_half_width(spec.steps, spec.start_site);
  if (spec.half_width < needed) {
    throw GuardViolation("lattice half-width " + std::to_string(spec.half_width) +
                             " is too small for " + std::to_string(spec.steps) +
                             " steps from site " + std::to_string(spec.start_site) +
                             "; need half_width >= " + std::to_string(needed),
                         needed);
  }
}

// ----------------------------------------------------------------- operations

WalkerState make_state(const Vec2& coin, int start_site, int half_width) {
  check_half_width(half_width);
  if (std::abs(coin.squaredNorm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("coin vector is not normalized");
  }
  if (std::abs(start_site) >= half_width) {
    throw std::invalid_argument("start site " + std::to_string(start_site) +
                                " outside lattice of half-width " + std::to_string(half_width));
  }
  auto amps = std::vector<Vec2>(static_cast<std::size_t>(2 * half_width + 1), Vec2::Zero());
  amps[site_index(start_site, half_width)] = coin;
  return WalkerState(half_width, std::move(amps));
}

Mat2 coin_matrix(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 m;
  m << c, -kI * s, -kI * s, c;
  return m;
}

Mat2 u2_matrix(const CoinParams& p) {
  return std::polar(1.0, p.chi) * exp_i_sigma2(p.xi) * exp_i_sigma3(p.eta) *
         exp_i_sigma2(p.theta);
}

WalkerState apply_coin(const WalkerState& state, const Mat2& coin) {
  std::vector<Vec2> out(state.amplitudes().begin(), state.amplitudes().end());
  for (auto& a : out) a = coin * a;
  return WalkerState(state.half_width(), std::move(out));
}

WalkerState apply_coin(const WalkerState& state, const CoinTable& table) {
  if (table.half_width() != state.half_width()) {
    throw DimensionMismatch("coin table half-width " + std::to_string(table.half_width()) +
                            " does not match state half-width " +
                            std::to_string(state.half_width()));
  }
  std::vector<Vec2> out(state.amplitudes().begin(), state.amplitudes().end());
  for (int x = state.lattice_min(); x <= state.lattice_max(); ++x) {
    auto& a = out[site_index(x, state.half_width())];
    a = u2_matrix(table.at(x)) * a;
  }
  return WalkerState(state.half_width(), std::move(out));
}

WalkerState shift_full(const WalkerState& state, EdgePolicy policy) {
  return shift_plus(shift_minus(state, policy), policy);
}

WalkerState shift_minus(const WalkerState& state, EdgePolicy policy) {
  return shift_component(state, 0, -1, policy, "shift_minus");
}

WalkerState shift_plus(const WalkerState& state, EdgePolicy policy) {
  return shift_component(state, 1, +1, policy, "shift_plus");
}

WalkerState electric_phase(const WalkerState& state, double phi) {
  const double reduced = std::remainder(phi, 2.0 * std::numbers::pi);
  std::vector<Vec2> out(state.amplitudes().begin(), state.amplitudes().end());
  for (int x = state.lattice_min(); x <= state.lattice_max(); ++x) {
    out[site_index(x, state.half_width())] *= std::polar(1.0, reduced * x);
  }
  return WalkerState(state.half_width(), std::move(out));
}

WalkerState step(const WalkerState& state, const WalkSpec& spec) {
  auto table = [&](const std::optional<CoinTable>& t) -> const CoinTable& {
    if (!t) throw ConfigError(std::string(to_string(spec.kind)) + " walk is missing a coin table");
    return *t;
  };
  switch (spec.kind) {
    case WalkKind::kDtqw:
      return shift_full(apply_coin(state, table(spec.table1)));
    case WalkKind::kSsqw:
    case WalkKind::kGeneralized: {
      auto half = shift_minus(apply_coin(state, table(spec.table1)));
      return shift_plus(apply_coin(half, table(spec.table2)));
    }
    case WalkKind::kElectricDtqw:
      return electric_phase(shift_full(apply_coin(state, table(spec.table1))),
                            spec.electric_phase);
  }
  throw ConfigError("unknown walk kind");
}

std::vector<WalkerState> evolve(const WalkSpec& spec) {
  validate(spec);
  std::vector<WalkerState> trajectory;
  trajectory.reserve(static_cast<std::size_t>(spec.steps) + 1);
  trajectory.push_back(make_state(spec.initial_coin, spec.start_site, spec.half_width));
  for (int t = 0; t < spec.steps; ++t) {
    trajectory.push_back(step(trajectory.back(), spec));
  }
  return trajectory;
}

// --------------------------------------------------------------- Distribution

Distribution::Distribution(int half_width, std::vector<double> probabilities)
    : half_width_(half_width), values_(std::move(probabilities)) {
  if (values_.size() != static_cast<std::size_t>(2 * half_width + 1)) {
    throw DimensionMismatch("distribution size does not match lattice");
  }
}

double Distribution::at(int x) const {
  if (x < -half_width_ || x > half_width_) {
    throw std::out_of_range("site " + std::to_string(x) + " outside lattice");
  }
  return values_[site_index(x, half_width_)];
}

double Distribution::total() const {
  double sum = 0.0;
  for (double p : values_) sum += p;
  return sum;
}

Distribution probability(const WalkerState& state) {
  std::vector<double> p;
  p.reserve(state.amplitudes().size());
  for (const auto& a : state.amplitudes()) p.push_back(std::norm(a[0]) + std::norm(a[1]));
  return Distribution(state.half_width(), std::move(p));
}

Moments moments(const Distribution& dist) {
  const int half = dist.half_width();
  double mean = 0.0;
  for (int x = -half; x <= half; ++x) mean += x * dist.at(x);
  double variance = 0.0;
  for (int x = -half; x <= half; ++x) {
    const double d = x - mean;
    variance += d * d * dist.at(x);
  }
  return {mean, variance};
}

}  // namespace qwalk
