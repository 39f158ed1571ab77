// walk_core.hpp
// Walker states on a truncated integer lattice and the discrete-time,
// split-step, generalized (position-dependent coin) and electric walk steps.
//
// Coin basis: index 0 is the left-moving component (|0>, horizontal
// polarization), index 1 the right-moving one (|1>, vertical).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace qwalk {

using cd = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kGuardTolerance = 1e-12;

/// Amplitude pairs (psi_l, psi_r) on the sites -L..L.
class WalkerState {
 public:
  /// All-zero state. Not normalized; used as an accumulator.
  static WalkerState zeros(int half_width);

  WalkerState(int half_width, std::vector<Vec2> amplitudes);

  int half_width() const noexcept { return half_width_; }
  int lattice_min() const noexcept { return -half_width_; }
  int lattice_max() const noexcept { return half_width_; }
  int num_sites() const noexcept { return 2 * half_width_ + 1; }
  bool contains(int x) const noexcept { return x >= -half_width_ && x <= half_width_; }

  const Vec2& at(int x) const;
  std::span<const Vec2> amplitudes() const noexcept { return amplitudes_; }

  double norm_squared() const;

  bool operator==(const WalkerState&) const = default;

 private:
  int half_width_;
  std::vector<Vec2> amplitudes_;
};

/// Angles of one U(2) coin e^{i chi} e^{i xi s2} e^{i eta s3} e^{i theta s2}.
struct CoinParams {
  double chi = 0.0;
  double xi = 0.0;
  double eta = 0.0;
  double theta = 0.0;

  bool operator==(const CoinParams&) const = default;
};

/// Position-dependent coin parameters covering every site of a lattice.
class CoinTable {
 public:
  CoinTable(int half_width, std::vector<CoinParams> sites);

  static CoinTable homogeneous(const CoinParams& params, int half_width);

  /// theta(x) uniform in [0, 2 pi), other angles zero; one draw per site in
  /// ascending x.
  static CoinTable random_theta(int half_width, std::mt19937_64& rng);

  int half_width() const noexcept { return half_width_; }
  const CoinParams& at(int x) const;
  std::span<const CoinParams> sites() const noexcept { return sites_; }

  bool operator==(const CoinTable&) const = default;

 private:
  int half_width_;
  std::vector<CoinParams> sites_;
};

/// Uniform draw in [0, 2 pi) that depends only on the 64-bit engine output,
/// so tables are identical across standard library implementations.
double uniform_angle(std::mt19937_64& rng);

enum class WalkKind { kDtqw, kSsqw, kGeneralized, kElectricDtqw };

std::string_view to_string(WalkKind kind);
std::optional<WalkKind> parse_walk_kind(std::string_view name);

/// Everything needed to reproduce one trajectory.
///
/// Every kind takes its coins from position-dependent tables: dtqw and
/// electric-dtqw use table1; ssqw and generalized use table1 then table2
/// (homogeneous tables for ssqw). A plain walk with bias theta is the
/// homogeneous table {0, 0, 0, theta}, see theta_table().
struct WalkSpec {
  WalkKind kind = WalkKind::kDtqw;
  int steps = 0;
  Vec2 initial_coin = Vec2(1.0, 0.0);
  int start_site = 0;
  int half_width = 2;
  std::optional<CoinTable> table1;
  std::optional<CoinTable> table2;
  double electric_phase = 0.0;
  std::uint64_t seed = 0;
};

/// Homogeneous table whose only non-zero angle is theta: coin e^{i theta s2}.
CoinTable theta_table(double theta, int half_width);

/// True when every site of the table carries the same parameters.
bool is_homogeneous(const CoinTable& table);

/// Smallest half-width for which a walk of `steps` steps from `start_site`
/// never touches the boundary sites.
int required_half_width(int steps, int start_site);

/// Throws ConfigError on malformed specs and GuardViolation when the lattice
/// is too small for the requested number of steps.
void validate(const WalkSpec& spec);

WalkerState make_state(const Vec2& coin, int start_site, int half_width);

/// [[cos t, -i sin t], [-i sin t, cos t]]
Mat2 coin_matrix(double theta);

/// e^{i chi} e^{i xi s2} e^{i eta s3} e^{i theta s2}, multiplied in that order.
Mat2 u2_matrix(const CoinParams& params);

/// The same 2x2 matrix at every site.
WalkerState apply_coin(const WalkerState& state, const Mat2& coin);
WalkerState apply_coin(const WalkerState& state, const CoinTable& table);

/// What to do with amplitude that a shift would move past the last site.
/// kGuard throws GuardViolation above kGuardTolerance; kDrop discards it,
/// which is the truncated-operator semantics used when assembling dense
/// lattice operators column by column.
enum class EdgePolicy { kGuard, kDrop };

/// psi_l moves to x-1, psi_r to x+1.
WalkerState shift_full(const WalkerState& state, EdgePolicy policy = EdgePolicy::kGuard);
/// Only psi_l moves (to x-1).
WalkerState shift_minus(const WalkerState& state, EdgePolicy policy = EdgePolicy::kGuard);
/// Only psi_r moves (to x+1).
WalkerState shift_plus(const WalkerState& state, EdgePolicy policy = EdgePolicy::kGuard);

/// Multiplies the pair at site x by e^{i phi x}. phi is reduced modulo 2 pi
/// first, so phi and phi + 2 pi give bit-identical results whenever the sum
/// is exactly representable.
WalkerState electric_phase(const WalkerState& state, double phi);

WalkerState step(const WalkerState& state, const WalkSpec& spec);

/// States for t = 0..steps.
std::vector<WalkerState> evolve(const WalkSpec& spec);

/// P(x) = |psi_l|^2 + |psi_r|^2 on -L..L.
class Distribution {
 public:
  Distribution(int half_width, std::vector<double> probabilities);

  int half_width() const noexcept { return half_width_; }
  double at(int x) const;
  std::span<const double> values() const noexcept { return values_; }
  double total() const;

 private:
  int half_width_;
  std::vector<double> values_;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Distribution probability(const WalkerState& state);
Moments moments(const Distribution& dist);

}  // namespace qwalk
