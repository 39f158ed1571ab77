#include "qwalk/continuum.hpp"

#include "qwalk/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qwalk {

namespace {
constexpr cd kI{0.0, 1.0};
constexpr double kMinWidth = 4.0;
}  // namespace

int wavepacket_half_width(const WavepacketSpec& spec) {
  // |psi|^2 ~ exp(-d^2 / (2 w^2)) < 1e-30 at d = 12 w
  return std::abs(spec.center) + static_cast<int>(std::ceil(12.0 * spec.width)) + 2;
}

WalkerState make_wavepacket(const WavepacketSpec& spec, int half_width) {
  if (!(spec.width >= kMinWidth)) {
    throw std::invalid_argument("wavepacket width must be at least 4 sites");
  }
  if (std::abs(spec.coin.squaredNorm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("wavepacket coin vector is not normalized");
  }
  std::vector<Vec2> amps;
  amps.reserve(static_cast<std::size_t>(2 * half_width + 1));
  double norm2 = 0.0;
  for (int x = -half_width; x <= half_width; ++x) {
    const double d = x - spec.center;
    const double envelope = std::exp(-d * d / (4.0 * spec.width * spec.width));
    amps.push_back(spec.coin * std::polar(envelope, spec.momentum * x));
    norm2 += envelope * envelope;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= scale;
  WalkerState state(half_width, std::move(amps));
  for (int x : {state.lattice_min(), state.lattice_max()}) {
    if (state.at(x).norm() > kGuardTolerance) {
      throw GuardViolation("wavepacket reaches the lattice boundary",
                           wavepacket_half_width(spec));
    }
  }
  return state;
}

Mat2 transport_matrix(double theta1) {
  const double c = std::cos(theta1);
  const double s = std::sin(theta1);
  Mat2 m;
  m << c, -kI * s, kI * s, -c;
  return m;
}

Mat2 mass_matrix(double theta1, double theta2) {
  const double c = std::cos(theta1 + theta2) - 1.0;
  const double s = std::sin(theta1 + theta2);
  Mat2 m;
  m << c, -kI * s, -kI * s, c;
  return m;
}

std::vector<Vec2> dirac_rhs(const WalkerState& state, double theta1, double theta2) {
  const int half = state.half_width();
  for (int x : {-half, half}) {
    if (state.at(x).norm() > kGuardTolerance) {
      throw GuardViolation("derivative stencil at site " + std::to_string(x) +
                               " would read outside the lattice",
                           half + 1);
    }
  }
  const Mat2 transport = std::cos(theta2) * transport_matrix(theta1);
  const Mat2 mass = mass_matrix(theta1, theta2);
  auto value = [&](int x) -> Vec2 { return state.contains(x) ? state.at(x) : Vec2::Zero(); };

  std::vector<Vec2> out;
  out.reserve(state.amplitudes().size());
  for (int x = -half; x <= half; ++x) {
    const Vec2 derivative = (value(x + 1) - value(x - 1)) / 2.0;
    out.push_back(transport * derivative + mass * value(x));
  }
  return out;
}

double continuum_residual(double theta1, double theta2, const WavepacketSpec& packet) {
  const int half = wavepacket_half_width(packet);
  const WalkerState psi = make_wavepacket(packet, half);

  const WalkerState half_step = shift_minus(apply_coin(psi, coin_matrix(theta1)));
  const WalkerState next = shift_plus(apply_coin(half_step, coin_matrix(theta2)));
  const auto rhs = dirac_rhs(psi, theta1, theta2);

  double err2 = 0.0;
  double norm2 = 0.0;
  for (int x = -half; x <= half; ++x) {
    const auto i = static_cast<std::size_t>(x + half);
    err2 += ((next.at(x) - psi.at(x)) - rhs[i]).squaredNorm();
    norm2 += psi.at(x).squaredNorm();
  }
  return std::sqrt(err2 / norm2);
}

}  // namespace qwalk
