// optics.hpp
// Jones calculus for idealized J-plates and waveplates, lifted to operators
// on polarization (coin) x OAM (lattice site) space.
//
// An OAM mode |l> is identified with lattice site x = l. A J-plate whose
// phase profile on one eigenpolarization is m*phi + c shifts that component
// by m OAM units and multiplies it by e^{i c}.

#pragma once

#include "qwalk/walk_core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <variant>
#include <vector>

namespace qwalk {

using JonesMatrix = Mat2;

/// R_{-angle} diag(e^{i dx}, e^{i dy}) R_{angle}, with R_a = e^{-i a s2}.
JonesMatrix jplate_pointwise(double delta_x, double delta_y, double angle);

/// sigma_3 = diag(1, -1)
JonesMatrix sigma3();

/// Phase profiles m_x*phi + c_x and m_y*phi + c_y on the two eigenpolarizations
/// of a plate rotated by `angle`.
struct JPlateSpec {
  int m_x = 0;
  double c_x = 0.0;
  int m_y = 0;
  double c_y = 0.0;
  double angle = 0.0;

  bool operator==(const JPlateSpec&) const = default;
};

/// Builds a JPlateSpec from real-valued OAM multipliers; only integer vortex
/// charges map onto the OAM basis, anything else throws std::invalid_argument.
JPlateSpec make_jplate(double m_x, double c_x, double m_y, double c_y, double angle);

/// [[cos 2r, sin 2r], [sin 2r, -cos 2r]] for fast-axis angle r.
struct HalfWavePlate {
  double fast_axis = 0.0;
  bool operator==(const HalfWavePlate&) const = default;
};

/// e^{i zeta s3 / 2}
struct VariableWavePlate {
  double retardance = 0.0;
  bool operator==(const VariableWavePlate&) const = default;
};

/// One site's coin realization inside an OAM-sorted stage: the HWP acts
/// first, then plate q1, then plate q2. Both plates have zero vortex charge.
struct PdcSite {
  JPlateSpec q2;
  JPlateSpec q1;
  HalfWavePlate hwp;
  bool operator==(const PdcSite&) const = default;
};

/// Position-dependent coin stage: modes are sorted, each site gets its own
/// q2 * q1 * hwp, modes are recombined. Covers sites -L..L.
struct PdcStage {
  int half_width = 0;
  std::vector<PdcSite> sites;
  bool operator==(const PdcStage&) const = default;
};

using OpticalElement = std::variant<JPlateSpec, HalfWavePlate, VariableWavePlate, PdcStage>;
using ElementList = std::vector<OpticalElement>;

std::string_view element_type(const OpticalElement& element);

JonesMatrix jones(const JPlateSpec& plate);  // ignores vortex charge
JonesMatrix jones(const HalfWavePlate& plate);
JonesMatrix jones(const VariableWavePlate& plate);
JonesMatrix jones(const PdcSite& site);

/// Dense operator on coin x lattice, basis index = coin * (2L+1) + (x + L).
class LatticeOperator {
 public:
  LatticeOperator(int half_width, Eigen::MatrixXcd matrix);

  static LatticeOperator identity(int half_width);

  /// Column-by-column image of every basis state under `action`.
  static LatticeOperator from_action(int half_width,
                                     const std::function<WalkerState(const WalkerState&)>& action);

  int half_width() const noexcept { return half_width_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

  static Eigen::Index index(int coin, int x, int half_width);

  /// this * rhs, i.e. rhs acts first.
  LatticeOperator operator*(const LatticeOperator& rhs) const;

  WalkerState apply(const WalkerState& state) const;

 private:
  int half_width_;
  Eigen::MatrixXcd matrix_;
};

/// Throws DimensionMismatch for a PdcStage that does not cover the lattice.
LatticeOperator lift(const OpticalElement& element, int half_width);

/// Product of lifted elements; elements[0] is applied first.
LatticeOperator compose(const ElementList& elements, int half_width);

struct PhaseComparison {
  bool equal = false;
  double fidelity = 0.0;  // |tr(A^dag B)| / (|A|_F |B|_F), i.e. /dim for unitaries
  double phase = 0.0;     // arg tr(A^dag B); B ~ e^{i phase} A
  double residual = 0.0;  // min over global phase of |A - e^{i p} B|_F / |A|_F
};

/// Equality up to a global phase. Throws DimensionMismatch.
PhaseComparison equal_up_to_phase(const LatticeOperator& a, const LatticeOperator& b,
                                  double tolerance);

}  // namespace qwalk
