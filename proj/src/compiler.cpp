#include "qwalk/compiler.hpp"

#include "qwalk/errors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qwalk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kUnitaryTolerance = 1e-10;
constexpr double kVanishing = 1e-14;
// Homogeneous split-step operators are translation invariant, so a small
// lattice exercises every matrix entry pattern.
constexpr int kSsqwCheckHalfWidth = 4;

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

int vortex_margin(const OpticalElement& e) {
  if (const auto* plate = std::get_if<JPlateSpec>(&e)) {
    return std::max(std::abs(plate->m_x), std::abs(plate->m_y));
  }
  return 0;
}

void require_unitary(const Mat2& u) {
  if (!u.allFinite() || (u.adjoint() * u - Mat2::Identity()).norm() > kUnitaryTolerance) {
    throw std::invalid_argument("coin matrix is not unitary");
  }
}

}  // namespace

PhaseSplit split_global_phase(const Mat2& u) {
  require_unitary(u);
  const double phase = std::arg(u.determinant()) / 2.0;
  return {phase, std::polar(1.0, -phase) * u};
}

EulerAngles euler_decompose(const Mat2& u) {
  require_unitary(u);
  if (std::abs(u.determinant() - cd{1.0, 0.0}) > 1e-10) {
    throw std::invalid_argument("Euler decomposition needs det U = 1");
  }
  // U = [[e^{i(g1+g3)/2} c, e^{i(g1-g3)/2} s], [-e^{-i(g1-g3)/2} s, e^{-i(g1+g3)/2} c]]
  const cd a = u(0, 0);
  const cd b = u(0, 1);
  EulerAngles out;
  out.gamma2 = 2.0 * std::atan2(std::abs(b), std::abs(a));
  if (std::abs(b) < kVanishing) {
    out.gamma2 = 0.0;
    out.gamma1 = 2.0 * std::arg(a);
  } else if (std::abs(a) < kVanishing) {
    out.gamma2 = kPi;
    out.gamma1 = 2.0 * std::arg(b);
  } else {
    out.gamma1 = std::arg(a) + std::arg(b);
    out.gamma3 = std::arg(a) - std::arg(b);
  }
  return out;
}

Mat2 euler_compose(const EulerAngles& g) {
  auto z = [](double angle) {
    Mat2 m = Mat2::Zero();
    m(0, 0) = std::polar(1.0, angle / 2.0);
    m(1, 1) = std::polar(1.0, -angle / 2.0);
    return m;
  };
  const double c = std::cos(g.gamma2 / 2.0);
  const double s = std::sin(g.gamma2 / 2.0);
  Mat2 y;
  y << c, s, -s, c;
  return z(g.gamma1) * y * z(g.gamma3);
}

ColumnParams column_params(const Mat2& c1) {
  // first column of C1^dag is the conjugated first row of C1
  const cd u0 = std::conj(c1(0, 0));
  const cd u1 = std::conj(c1(0, 1));
  ColumnParams out;
  out.alpha = std::atan2(std::abs(u1), std::abs(u0));
  if (std::abs(u0) < kVanishing || std::abs(u1) < kVanishing) {
    out.beta = 0.0;
  } else {
    out.beta = std::fmod(std::arg(u1) - std::arg(u0), 2.0 * kPi);
    if (out.beta < 0.0) out.beta += 2.0 * kPi;
  }
  return out;
}

PdcStage compile_pdc(const CoinTable& table) {
  PdcStage stage;
  stage.half_width = table.half_width();
  stage.sites.reserve(table.sites().size());
  for (const auto& p : table.sites()) {
    PdcSite site;
    site.hwp = HalfWavePlate{0.0};
    site.q1 = JPlateSpec{0, 0.0, 0, kPi, (p.theta + p.xi) / 2.0};
    site.q2 = JPlateSpec{0, p.chi + p.eta, 0, p.chi - p.eta, p.xi};
    stage.sites.push_back(site);
  }
  return stage;
}

ElementList CompiledStep::element_list() const {
  ElementList out;
  out.reserve(elements.size());
  for (const auto& e : elements) out.push_back(e.element);
  return out;
}

LatticeOperator step_reference(const WalkSpec& spec) {
  if (spec.kind != WalkKind::kSsqw && spec.kind != WalkKind::kGeneralized) {
    throw ConfigError("no optical recipe for walk kind " + std::string(to_string(spec.kind)));
  }
  if (!spec.table1 || !spec.table2) throw ConfigError("split-step walk needs two coin tables");
  return generalized_reference(*spec.table1, *spec.table2);
}

LatticeOperator ssqw_reference(const Mat2& c1, const Mat2& c2, int half_width) {
  return LatticeOperator::from_action(half_width, [&](const WalkerState& s) {
    auto half = shift_minus(apply_coin(s, c1), EdgePolicy::kDrop);
    return shift_plus(apply_coin(half, c2), EdgePolicy::kDrop);
  });
}

LatticeOperator generalized_reference(const CoinTable& table1, const CoinTable& table2) {
  if (table1.half_width() != table2.half_width()) {
    throw DimensionMismatch("coin tables cover different lattices");
  }
  return LatticeOperator::from_action(table1.half_width(), [&](const WalkerState& s) {
    auto half = shift_minus(apply_coin(s, table1), EdgePolicy::kDrop);
    return shift_plus(apply_coin(half, table2), EdgePolicy::kDrop);
  });
}

SsqwParameters ssqw_parameters(const Mat2& c1, const Mat2& c2) {
  const PhaseSplit first = split_global_phase(c1);
  const PhaseSplit second = split_global_phase(c2);
  return {column_params(first.special), euler_decompose(second.special * first.special),
          first.phase + second.phase};
}

CompiledStep build_ssqw_train(const SsqwParameters& params, double shift_constant) {
  const double frame = kPi - params.column.beta;
  const auto& euler = params.euler;

  CompiledStep out;
  out.elements = {
      {VariableWavePlate{-frame}, "VWP: rotate into the eigenframe of C1^dag S- C1"},
      {JPlateSpec{-1, 0.0, 0, 0.0, params.column.alpha},
       "J-plate J(-phi, 0, alpha): left half-shift along the first column of C1^dag"},
      {VariableWavePlate{frame + euler.gamma3}, "VWP: leave the eigenframe, Euler phase gamma3"},
      {HalfWavePlate{euler.gamma2 / 4.0}, "HWP at gamma2/4: Euler rotation of C2 C1"},
      {JPlateSpec{0, shift_constant, 1, -shift_constant, 0.0},
       "J-plate J((gamma1+pi)/2, phi-(gamma1+pi)/2, 0): right half-shift with Euler phase "
       "gamma1"},
  };
  // (-i) from folding e^{i pi s3/2} into the HWP, plus the stripped U(2) phases
  out.global_phase = wrap_angle(params.coin_phase - kPi / 2.0);
  return out;
}

CompiledStep compile_ssqw(const Mat2& c1, const Mat2& c2) {
  const SsqwParameters params = ssqw_parameters(c1, c2);
  CompiledStep out = build_ssqw_train(params, (params.euler.gamma1 + kPi) / 2.0);
  const auto report = verify(out, ssqw_reference(c1, c2, kSsqwCheckHalfWidth));
  if (!report.passed) {
    throw VerificationError("split-step train does not reproduce S+ C2 S- C1 (fidelity " +
                                std::to_string(report.fidelity) + ")",
                            report.fidelity);
  }
  return out;
}

std::vector<CompiledStep> compile_generalized(const WalkSpec& spec) {
  if (spec.kind != WalkKind::kGeneralized) {
    throw ConfigError("compile_generalized needs a generalized walk");
  }
  if (!spec.table1 || !spec.table2) throw ConfigError("generalized walk needs two coin tables");

  CompiledStep block;
  block.elements = {
      {compile_pdc(*spec.table1), "coin stage C1(x): per-mode HWP, Q1, Q2 between OAM sorters"},
      {JPlateSpec{-1, 0.0, 0, 0.0, 0.0}, "J-plate J(-phi, 0, 0): S-"},
      {compile_pdc(*spec.table2), "coin stage C2(x): per-mode HWP, Q1, Q2 between OAM sorters"},
      {JPlateSpec{0, 0.0, 1, 0.0, 0.0}, "J-plate J(0, phi, 0): S+"},
  };
  block.global_phase = 0.0;

  // Tables are static, so every step is the same block.
  const auto report = verify(block, generalized_reference(*spec.table1, *spec.table2));
  if (!report.passed) {
    throw VerificationError("generalized step train does not reproduce the walk (fidelity " +
                                std::to_string(report.fidelity) + ")",
                            report.fidelity);
  }
  return std::vector<CompiledStep>(static_cast<std::size_t>(spec.steps), block);
}

VerificationReport verify(const CompiledStep& step, const LatticeOperator& reference) {
  const int half = reference.half_width();
  const auto cmp = equal_up_to_phase(compose(step.element_list(), half), reference,
                                     kVerifyTolerance);
  VerificationReport report;
  report.fidelity = cmp.fidelity;
  report.phase = cmp.phase;
  report.residual = cmp.residual;
  report.passed = cmp.equal;

  for (std::size_t i = 0; i < step.elements.size(); ++i) {
    const auto& element = step.elements[i].element;
    const auto lifted = lift(element, half);
    const int margin = vortex_margin(element);
    double defect = 0.0;
    for (int coin = 0; coin < 2; ++coin) {
      for (int x = -half + margin; x <= half - margin; ++x) {
        const auto col = LatticeOperator::index(coin, x, half);
        defect = std::max(defect, std::abs(1.0 - lifted.matrix().col(col).norm()));
      }
    }
    report.factors.push_back({i + 1, std::string(element_type(element)), defect});
  }
  return report;
}

}  // namespace qwalk
