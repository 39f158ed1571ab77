// compiler.hpp
// Maps split-step and generalized split-step walk steps onto trains of
// J-plates and waveplates, and checks each train against the abstract walk
// operator up to global phase.

#pragma once

#include "qwalk/optics.hpp"
#include "qwalk/walk_core.hpp"

#include <string>
#include <vector>

namespace qwalk {

inline constexpr double kVerifyTolerance = 1e-10;

/// U = e^{i phase} special with det(special) = 1.
struct PhaseSplit {
  double phase = 0.0;
  Mat2 special;
};

/// Throws std::invalid_argument if `u` is not unitary within 1e-10.
PhaseSplit split_global_phase(const Mat2& u);

/// U = e^{i g1 s3/2} e^{i g2 s2/2} e^{i g3 s3/2}, g2 in [0, pi]. When g2 is 0
/// or pi the split between g1 and g3 is fixed by g3 = 0.
struct EulerAngles {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
};

/// Requires det U = 1 within 1e-10; throws std::invalid_argument otherwise.
EulerAngles euler_decompose(const Mat2& u);
Mat2 euler_compose(const EulerAngles& angles);

/// First column of C1^dag written projectively as (cos a, e^{i b} sin a),
/// a in [0, pi/2], b in [0, 2 pi); b = 0 when either component vanishes.
struct ColumnParams {
  double alpha = 0.0;
  double beta = 0.0;
};

ColumnParams column_params(const Mat2& c1);

/// Per-site HWP(0), J(0, pi, (theta+xi)/2), J(chi+eta, chi-eta, xi).
PdcStage compile_pdc(const CoinTable& table);

struct CompiledElement {
  OpticalElement element;
  std::string provenance;
};

/// One walk step as an optical train. The walk operator equals
/// e^{i global_phase} times the composed train.
struct CompiledStep {
  std::vector<CompiledElement> elements;
  double global_phase = 0.0;

  ElementList element_list() const;
};

/// Angles the split-step recipe is built from.
struct SsqwParameters {
  ColumnParams column;  // of the SU(2) part of C1
  EulerAngles euler;    // of the SU(2) part of C2 C1
  double coin_phase = 0.0;  // sum of the stripped U(2) determinant phases
};

SsqwParameters ssqw_parameters(const Mat2& c1, const Mat2& c2);

/// The five-element train with an explicit constant on the final J-plate,
/// J(k, phi - k, 0). The walk needs k = (gamma1 + pi)/2; no verification.
CompiledStep build_ssqw_train(const SsqwParameters& params, double shift_constant);

/// Split-step train for S+ C2 S- C1 in application order:
/// VWP, J-plate J(-phi, 0, alpha), VWP, HWP, J-plate carrying S+ and the
/// gamma1 Euler phase. U(2) inputs have their determinant phase folded into
/// global_phase. Self-checks on a small lattice and throws VerificationError
/// if the train does not reproduce the walk.
CompiledStep compile_ssqw(const Mat2& c1, const Mat2& c2);

/// Generalized step: coin stage 1, S- plate, coin stage 2, S+ plate; one
/// block per walk step. Verified against the walk operator on the spec's
/// lattice; throws VerificationError or ConfigError.
std::vector<CompiledStep> compile_generalized(const WalkSpec& spec);

/// One step of an ssqw or generalized spec as a lattice operator, assembled
/// from walk_core's state-level operations with truncating shifts.
LatticeOperator step_reference(const WalkSpec& spec);

/// S+ C2 S- C1 assembled from walk_core's state-level operations.
LatticeOperator ssqw_reference(const Mat2& c1, const Mat2& c2, int half_width);
LatticeOperator generalized_reference(const CoinTable& table1, const CoinTable& table2);

struct FactorDiagnostic {
  std::size_t order = 0;
  std::string type;
  /// Largest |1 - column norm| over basis states whose image stays on the
  /// lattice.
  double unitarity_defect = 0.0;
};

struct VerificationReport {
  double fidelity = 0.0;
  double phase = 0.0;
  double residual = 0.0;
  bool passed = false;
  std::vector<FactorDiagnostic> factors;
};

/// Compares the composed train with `reference`; passes iff they agree up to
/// global phase at kVerifyTolerance.
VerificationReport verify(const CompiledStep& step, const LatticeOperator& reference);

}  // namespace qwalk
