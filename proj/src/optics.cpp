#include "qwalk/optics.hpp"

#include "qwalk/errors.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qwalk {

namespace {

using SparseOp = Eigen::SparseMatrix<cd>;
using Triplet = Eigen::Triplet<cd>;

// R_a = e^{-i a s2}
Mat2 rotation(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

Eigen::Index sites(int half_width) { return 2 * half_width + 1; }

// local (x) I over the lattice
SparseOp lift_local(const Mat2& local, int half_width) {
  const Eigen::Index n = sites(half_width);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(4 * n));
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (local(i, j) == cd{0.0, 0.0}) continue;
      for (Eigen::Index k = 0; k < n; ++k) entries.emplace_back(i * n + k, j * n + k, local(i, j));
    }
  }
  SparseOp op(2 * n, 2 * n);
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

// (R_{-a} (x) I) (e^{i c_x}|H><H| (x) T^{m_x} + e^{i c_y}|V><V| (x) T^{m_y}) (R_a (x) I)
// Block (i, j) is sum_k R_{-a}[i,k] R_a[k,j] e^{i c_k} T^{m_k}.
SparseOp lift_jplate(const JPlateSpec& plate, int half_width) {
  const Eigen::Index n = sites(half_width);
  const Mat2 left = rotation(-plate.angle);
  const Mat2 right = rotation(plate.angle);
  const int shift[2] = {plate.m_x, plate.m_y};
  const cd phase[2] = {std::polar(1.0, plate.c_x), std::polar(1.0, plate.c_y)};

  std::vector<Triplet> entries;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const cd coeff = left(i, k) * right(k, j) * phase[k];
        if (coeff == cd{0.0, 0.0}) continue;
        for (int x = -half_width; x <= half_width; ++x) {
          const int dest = x + shift[k];
          if (dest < -half_width || dest > half_width) continue;  // truncated
          entries.emplace_back(i * n + dest + half_width, j * n + x + half_width, coeff);
        }
      }
    }
  }
  SparseOp op(2 * n, 2 * n);
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

SparseOp lift_pdc(const PdcStage& stage, int half_width) {
  if (stage.half_width != half_width ||
      stage.sites.size() != static_cast<std::size_t>(sites(half_width))) {
    throw DimensionMismatch("coin stage covers half-width " +
                                std::to_string(stage.half_width) + ", lattice has " +
                                std::to_string(half_width));
  }
  const Eigen::Index n = sites(half_width);
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(4 * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Mat2 m = jones(stage.sites[static_cast<std::size_t>(k)]);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) entries.emplace_back(i * n + k, j * n + k, m(i, j));
    }
  }
  SparseOp op(2 * n, 2 * n);
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

SparseOp sparse_lift(const OpticalElement& element, int half_width) {
  return std::visit(
      [half_width](const auto& e) -> SparseOp {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, JPlateSpec>) {
          return lift_jplate(e, half_width);
        } else if constexpr (std::is_same_v<T, PdcStage>) {
          return lift_pdc(e, half_width);
        } else {
          return lift_local(jones(e), half_width);
        }
      },
      element);
}

}  // namespace

JonesMatrix jplate_pointwise(double delta_x, double delta_y, double angle) {
  Mat2 phases = Mat2::Zero();
  phases(0, 0) = std::polar(1.0, delta_x);
  phases(1, 1) = std::polar(1.0, delta_y);
  return rotation(-angle) * phases * rotation(angle);
}

JonesMatrix sigma3() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

JPlateSpec make_jplate(double m_x, double c_x, double m_y, double c_y, double angle) {
  auto to_charge = [](double m, const char* which) {
    if (!std::isfinite(m) || m != std::round(m)) {
      throw std::invalid_argument(std::string("J-plate OAM multiplier ") + which +
                                  " must be an integer, got " + std::to_string(m));
    }
    return static_cast<int>(m);
  };
  return JPlateSpec{to_charge(m_x, "m_x"), c_x, to_charge(m_y, "m_y"), c_y, angle};
}

std::string_view element_type(const OpticalElement& element) {
  return std::visit(
      [](const auto& e) -> std::string_view {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, JPlateSpec>) return "jplate";
        else if constexpr (std::is_same_v<T, HalfWavePlate>) return "hwp";
        else if constexpr (std::is_same_v<T, VariableWavePlate>) return "vwp";
        else return "pdc_stage";
      },
      element);
}

JonesMatrix jones(const JPlateSpec& plate) {
  return jplate_pointwise(plate.c_x, plate.c_y, plate.angle);
}

JonesMatrix jones(const HalfWavePlate& plate) {
  const double c = std::cos(2.0 * plate.fast_axis);
  const double s = std::sin(2.0 * plate.fast_axis);
  Mat2 m;
  m << c, s, s, -c;
  return m;
}

JonesMatrix jones(const VariableWavePlate& plate) {
  Mat2 m = Mat2::Zero();
  m(0, 0) = std::polar(1.0, plate.retardance / 2.0);
  m(1, 1) = std::polar(1.0, -plate.retardance / 2.0);
  return m;
}

JonesMatrix jones(const PdcSite& site) {
  return jones(site.q2) * jones(site.q1) * jones(site.hwp);
}

// ------------------------------------------------------------ LatticeOperator

LatticeOperator::LatticeOperator(int half_width, Eigen::MatrixXcd matrix)
    : half_width_(half_width), matrix_(std::move(matrix)) {
  const Eigen::Index d = 2 * sites(half_width);
  if (half_width < 1 || matrix_.rows() != d || matrix_.cols() != d) {
    throw DimensionMismatch("lattice operator must be " + std::to_string(d) + "x" +
                            std::to_string(d));
  }
}

LatticeOperator LatticeOperator::identity(int half_width) {
  const Eigen::Index d = 2 * sites(half_width);
  return LatticeOperator(half_width, Eigen::MatrixXcd::Identity(d, d));
}

Eigen::Index LatticeOperator::index(int coin, int x, int half_width) {
  return coin * sites(half_width) + x + half_width;
}

LatticeOperator LatticeOperator::from_action(
    int half_width, const std::function<WalkerState(const WalkerState&)>& action) {
  const Eigen::Index d = 2 * sites(half_width);
  Eigen::MatrixXcd m(d, d);
  for (int coin = 0; coin < 2; ++coin) {
    for (int x = -half_width; x <= half_width; ++x) {
      std::vector<Vec2> amps(static_cast<std::size_t>(sites(half_width)), Vec2::Zero());
      amps[static_cast<std::size_t>(x + half_width)][coin] = 1.0;
      const WalkerState image = action(WalkerState(half_width, std::move(amps)));
      if (image.half_width() != half_width) {
        throw DimensionMismatch("action changed the lattice size");
      }
      const Eigen::Index col = index(coin, x, half_width);
      for (int y = -half_width; y <= half_width; ++y) {
        const Vec2& a = image.at(y);
        m(index(0, y, half_width), col) = a[0];
        m(index(1, y, half_width), col) = a[1];
      }
    }
  }
  return LatticeOperator(half_width, std::move(m));
}

LatticeOperator LatticeOperator::operator*(const LatticeOperator& rhs) const {
  if (rhs.half_width_ != half_width_) throw DimensionMismatch("operator lattices differ");
  return LatticeOperator(half_width_, matrix_ * rhs.matrix_);
}

WalkerState LatticeOperator::apply(const WalkerState& state) const {
  if (state.half_width() != half_width_) throw DimensionMismatch("state lattice differs");
  const Eigen::Index n = sites(half_width_);
  Eigen::VectorXcd v(2 * n);
  for (int x = -half_width_; x <= half_width_; ++x) {
    v(index(0, x, half_width_)) = state.at(x)[0];
    v(index(1, x, half_width_)) = state.at(x)[1];
  }
  const Eigen::VectorXcd w = matrix_ * v;
  std::vector<Vec2> out(static_cast<std::size_t>(n));
  for (int x = -half_width_; x <= half_width_; ++x) {
    out[static_cast<std::size_t>(x + half_width_)] =
        Vec2(w(index(0, x, half_width_)), w(index(1, x, half_width_)));
  }
  return WalkerState(half_width_, std::move(out));
}

// ---------------------------------------------------------------- lift/compose

LatticeOperator lift(const OpticalElement& element, int half_width) {
  return LatticeOperator(half_width, Eigen::MatrixXcd(sparse_lift(element, half_width)));
}

LatticeOperator compose(const ElementList& elements, int half_width) {
  Eigen::MatrixXcd acc = LatticeOperator::identity(half_width).matrix();
  for (const auto& e : elements) acc = sparse_lift(e, half_width) * acc;
  return LatticeOperator(half_width, std::move(acc));
}

PhaseComparison equal_up_to_phase(const LatticeOperator& a, const LatticeOperator& b,
                                  double tolerance) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("cannot compare operators of dimension " + std::to_string(a.dim()) +
                            " and " + std::to_string(b.dim()));
  }
  const cd overlap = a.matrix().conjugate().cwiseProduct(b.matrix()).sum();  // tr(A^dag B)
  PhaseComparison out;
  const double scale = a.matrix().norm();
  const double norms = scale * b.matrix().norm();
  out.fidelity = norms > 0.0 ? std::abs(overlap) / norms : 0.0;
  out.phase = std::arg(overlap);
  // Direct evaluation; |A|^2 + |B|^2 - 2|tr| cancels catastrophically.
  const Eigen::MatrixXcd diff = a.matrix() - std::polar(1.0, -out.phase) * b.matrix();
  out.residual = scale > 0.0 ? diff.norm() / scale : b.matrix().norm();
  out.equal = out.residual <= tolerance;
  return out;
}

}  // namespace qwalk
