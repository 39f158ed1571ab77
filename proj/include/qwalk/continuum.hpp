// continuum.hpp
// Long-wavelength check of the split-step walk: compares one discrete step
// against the first-order Dirac-type generator
//   d/dt psi = cos(t2) M1 d/dx psi + M2 psi.

#pragma once

#include "qwalk/walk_core.hpp"

#include <vector>

namespace qwalk {

/// Gaussian envelope exp(-(x - center)^2 / (4 width^2)) e^{i momentum x}
/// times a fixed coin vector, normalized.
struct WavepacketSpec {
  int center = 0;
  double width = 10.0;
  double momentum = 0.0;
  Vec2 coin = Vec2(1.0, 0.0);
};

/// Half-width that keeps the envelope below the boundary guard.
int wavepacket_half_width(const WavepacketSpec& spec);

/// Throws std::invalid_argument for width < 4 or an unnormalized coin.
WalkerState make_wavepacket(const WavepacketSpec& spec, int half_width);

/// [[cos t1, -i sin t1], [i sin t1, -cos t1]]
Mat2 transport_matrix(double theta1);
/// [[cos(t1+t2) - 1, -i sin(t1+t2)], [-i sin(t1+t2), cos(t1+t2) - 1]]
Mat2 mass_matrix(double theta1, double theta2);

/// cos(t2) M1 dpsi/dx + M2 psi per site, central differences. Throws
/// GuardViolation if the boundary sites carry amplitude, since the stencil
/// would read past the lattice.
std::vector<Vec2> dirac_rhs(const WalkerState& state, double theta1, double theta2);

/// |(W_ss psi - psi) - dirac_rhs(psi)|_2 / |psi|_2 for the packet, with
/// W_ss = S+ C(theta2) S- C(theta1) built from coin_matrix().
double continuum_residual(double theta1, double theta2, const WavepacketSpec& packet);

}  // namespace qwalk
