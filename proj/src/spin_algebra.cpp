#include "nvsim/spin_algebra.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace nvsim {

HilbertLayout::HilbertLayout(std::vector<Subsystem> subsystems)
    : subsystems_(std::move(subsystems)) {
  if (subsystems_.empty())
    throw std::invalid_argument("HilbertLayout: empty subsystem list");
  total_dim_ = 1;
  for (const auto& s : subsystems_) {
    if (s.dim < 2)
      throw std::invalid_argument("HilbertLayout: subsystem '" + s.label +
                                  "' has dimension < 2");
    total_dim_ *= s.dim;
  }
}

int HilbertLayout::dim(int slot) const {
  if (slot < 0 || slot >= slot_count())
    throw std::out_of_range("HilbertLayout: slot " + std::to_string(slot));
  return subsystems_[slot].dim;
}

const std::string& HilbertLayout::label(int slot) const {
  if (slot < 0 || slot >= slot_count())
    throw std::out_of_range("HilbertLayout: slot " + std::to_string(slot));
  return subsystems_[slot].label;
}

int HilbertLayout::trailing_dim(int slot) const {
  int d = 1;
  for (int i = slot + 1; i < slot_count(); ++i) d *= subsystems_[i].dim;
  return d;
}

bool HilbertLayout::operator==(const HilbertLayout& other) const {
  if (slot_count() != other.slot_count()) return false;
  for (int i = 0; i < slot_count(); ++i)
    if (subsystems_[i].dim != other.subsystems_[i].dim) return false;
  return true;
}

Mat spin_half_x() {
  Mat m(2, 2);
  m << 0.0, 0.5, 0.5, 0.0;
  return m;
}

Mat spin_half_y() {
  Mat m(2, 2);
  m << 0.0, cplx(0, -0.5), cplx(0, 0.5), 0.0;
  return m;
}

Mat spin_half_z() {
  Mat m(2, 2);
  m << 0.5, 0.0, 0.0, -0.5;
  return m;
}

Mat spin_one_x() {
  Mat m = Mat::Zero(3, 3);
  const double r = 1.0 / std::sqrt(2.0);
  m(0, 1) = r; m(1, 0) = r; m(1, 2) = r; m(2, 1) = r;
  return m;
}

Mat spin_one_z() {
  Mat m = Mat::Zero(3, 3);
  m(0, 0) = 1.0; m(2, 2) = -1.0;
  return m;
}

Vec ket_plus() {
  Vec v(2); v << 1.0, 0.0; return v;
}

Vec ket_minus() {
  Vec v(2); v << 0.0, 1.0; return v;
}

Vec ket_x_plus() {
  Vec v(2); v << 1.0, 1.0; return v / std::sqrt(2.0);
}

Vec ket_x_minus() {
  Vec v(2); v << 1.0, -1.0; return v / std::sqrt(2.0);
}

Mat projector(const Vec& ket) { return ket * ket.adjoint(); }

Mat embed(const Mat& local_op, int slot, const HilbertLayout& layout) {
  if (slot < 0 || slot >= layout.slot_count())
    throw std::invalid_argument("embed: slot " + std::to_string(slot) +
                                " outside layout");
  if (local_op.rows() != local_op.cols() ||
      local_op.rows() != layout.dim(slot))
    throw std::invalid_argument(
        "embed: operator dimension " + std::to_string(local_op.rows()) +
        " does not match subsystem " + std::to_string(slot) + " (dim " +
        std::to_string(layout.dim(slot)) + ")");

  const int left = layout.total_dim() / (layout.dim(slot) * layout.trailing_dim(slot));
  const int right = layout.trailing_dim(slot);
  const int d = layout.dim(slot);
  Mat out = Mat::Zero(layout.total_dim(), layout.total_dim());
  for (int l = 0; l < left; ++l)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        const cplx v = local_op(a, b);
        if (v == cplx(0, 0)) continue;
        const int row0 = (l * d + a) * right;
        const int col0 = (l * d + b) * right;
        for (int r = 0; r < right; ++r) out(row0 + r, col0 + r) = v;
      }
  return out;
}

HilbertLayout reduced_layout(const HilbertLayout& layout,
                             const std::vector<int>& keep) {
  std::vector<Subsystem> subs;
  for (int slot : keep) subs.push_back({layout.label(slot), layout.dim(slot)});
  return HilbertLayout(subs);
}

Mat partial_trace(const Mat& rho, const std::vector<int>& keep,
                  const HilbertLayout& layout) {
  if (keep.empty())
    throw std::invalid_argument("partial_trace: empty keep set");
  if (rho.rows() != layout.total_dim() || rho.cols() != layout.total_dim())
    throw std::invalid_argument("partial_trace: state does not match layout");
  const int n = layout.slot_count();
  std::vector<bool> kept(n, false);
  for (int slot : keep) {
    if (slot < 0 || slot >= n)
      throw std::invalid_argument("partial_trace: slot " +
                                  std::to_string(slot) + " outside layout");
    if (kept[slot])
      throw std::invalid_argument("partial_trace: duplicate slot in keep set");
    kept[slot] = true;
  }
  // keep must be given in layout order for the reduced indexing below
  for (size_t i = 1; i < keep.size(); ++i)
    if (keep[i] <= keep[i - 1])
      throw std::invalid_argument("partial_trace: keep set must be ordered");

  std::vector<int> traced;
  for (int i = 0; i < n; ++i)
    if (!kept[i]) traced.push_back(i);

  int dk = 1, dt = 1;
  for (int slot : keep) dk *= layout.dim(slot);
  for (int slot : traced) dt *= layout.dim(slot);

  // strides of each slot in the full index
  std::vector<int> stride(n);
  for (int i = 0; i < n; ++i) stride[i] = layout.trailing_dim(i);

  auto full_index = [&](int ik, int it) {
    int idx = 0;
    int rk = ik;
    for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
      const int d = layout.dim(keep[i]);
      idx += (rk % d) * stride[keep[i]];
      rk /= d;
    }
    int rt = it;
    for (int i = static_cast<int>(traced.size()) - 1; i >= 0; --i) {
      const int d = layout.dim(traced[i]);
      idx += (rt % d) * stride[traced[i]];
      rt /= d;
    }
    return idx;
  };

  Mat out = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cplx acc(0, 0);
      for (int t = 0; t < dt; ++t)
        acc += rho(full_index(a, t), full_index(b, t));
      out(a, b) = acc;
    }
  return out;
}

void DensityCheck::absorb(const DensityCheck& other) {
  trace_dev = std::max(trace_dev, other.trace_dev);
  herm_dev = std::max(herm_dev, other.herm_dev);
  min_eig = std::min(min_eig, other.min_eig);
}

bool DensityCheck::ok(double trace_tol, double herm_tol,
                      double eig_floor) const {
  return trace_dev < trace_tol && herm_dev < herm_tol && min_eig >= eig_floor;
}

double hermiticity_deviation(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat& m) {
  const Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityCheck check_density(const Mat& rho) {
  DensityCheck c;
  c.trace_dev = std::abs(rho.trace() - cplx(1.0, 0.0));
  c.herm_dev = hermiticity_deviation(rho);
  c.min_eig = min_eigenvalue(rho);
  return c;
}

double state_fidelity(const Mat& rho, const Vec& psi) {
  if (rho.rows() != psi.size())
    throw std::invalid_argument("state_fidelity: dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("state_fidelity: state vector not normalized");
  const cplx f = psi.adjoint() * rho * psi;
  return f.real();
}

Mat channel_choi(const std::function<Mat(const Mat&)>& channel, int d) {
  Mat choi = Mat::Zero(d * d, d * d);
  Mat unit = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      unit.setZero();
      unit(i, j) = 1.0;
      const Mat eij = channel(unit);
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          choi(m * d + i, n * d + j) = eij(m, n) / static_cast<double>(d);
    }
  return choi;
}

Mat superop_choi(const Mat& superop) {
  const int d2 = static_cast<int>(superop.rows());
  const int d = static_cast<int>(std::lround(std::sqrt(double(d2))));
  if (d * d != d2 || superop.cols() != d2)
    throw std::invalid_argument("superop_choi: not a square superoperator");
  Mat choi(d2, d2);
  // column-stacking: E(|i><j|)_{mn} = S_{m + d n, i + d j}
  for (int m = 0; m < d; ++m)
    for (int i = 0; i < d; ++i)
      for (int n = 0; n < d; ++n)
        for (int j = 0; j < d; ++j)
          choi(m * d + i, n * d + j) =
              superop(m + d * n, i + d * j) / static_cast<double>(d);
  return choi;
}

double choi_trace_preservation_deviation(const Mat& choi) {
  const int d2 = static_cast<int>(choi.rows());
  const int d = static_cast<int>(std::lround(std::sqrt(double(d2))));
  Mat tr_out = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx acc(0, 0);
      for (int m = 0; m < d; ++m) acc += choi(m * d + i, m * d + j);
      tr_out(i, j) = acc * static_cast<double>(d);
    }
  return (tr_out - Mat::Identity(d, d)).cwiseAbs().maxCoeff();
}

double choi_process_fidelity(const Mat& choi, const Mat& target_unitary,
                             double tp_tol) {
  const int d = static_cast<int>(target_unitary.rows());
  if (choi.rows() != d * d)
    throw std::invalid_argument("choi_process_fidelity: dimension mismatch");
  const double tp_dev = choi_trace_preservation_deviation(choi);
  if (tp_dev > tp_tol)
    throw std::invalid_argument(
        "choi_process_fidelity: channel not trace preserving (deviation " +
        std::to_string(tp_dev) + ")");
  const Mat uu = target_unitary * target_unitary.adjoint();
  if ((uu - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("choi_process_fidelity: target not unitary");

  Vec phi_u = Vec::Zero(d * d);
  const double r = 1.0 / std::sqrt(static_cast<double>(d));
  for (int m = 0; m < d; ++m)
    for (int i = 0; i < d; ++i) phi_u(m * d + i) += target_unitary(m, i) * r;
  const cplx f = phi_u.adjoint() * choi * phi_u;
  return f.real();
}

}  // namespace nvsim
