#ifndef NVSIM_SPIN_ALGEBRA_HPP
#define NVSIM_SPIN_ALGEBRA_HPP

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nvsim {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// ---------------------------------------------------------------------------
// Hilbert-space layout of a multi-spin register
// ---------------------------------------------------------------------------

struct Subsystem {
  std::string label;
  int dim = 2;
};

// Ordered tensor factors of the register. When the register contains the NV,
// slot 0 is the dressed electron qubit.
class HilbertLayout {
 public:
  HilbertLayout() = default;
  explicit HilbertLayout(std::vector<Subsystem> subsystems);

  int slot_count() const { return static_cast<int>(subsystems_.size()); }
  int dim(int slot) const;
  const std::string& label(int slot) const;
  int total_dim() const { return total_dim_; }
  // dimension of the factors strictly after `slot`
  int trailing_dim(int slot) const;

  bool operator==(const HilbertLayout& other) const;

 private:
  std::vector<Subsystem> subsystems_;
  int total_dim_ = 1;
};

// ---------------------------------------------------------------------------
// Elementary spin operators (eigenvalues +-1/2 for spin-1/2)
// ---------------------------------------------------------------------------

Mat spin_half_x();
Mat spin_half_y();
Mat spin_half_z();
Mat spin_one_x();   // 3x3, basis (|+1>, |0>, |-1>)
Mat spin_one_z();

// dressed electron basis kets: |+> = e0, |-> = e1
Vec ket_plus();
Vec ket_minus();
// nuclear x eigenstates |+-_i> = (|up> +- |down>)/sqrt(2)
Vec ket_x_plus();
Vec ket_x_minus();

Mat projector(const Vec& ket);

// identity (x) ... (x) local_op (x) ... (x) identity
Mat embed(const Mat& local_op, int slot, const HilbertLayout& layout);

// reduced density operator on the kept subsystems (kept in layout order)
Mat partial_trace(const Mat& rho, const std::vector<int>& keep,
                  const HilbertLayout& layout);
HilbertLayout reduced_layout(const HilbertLayout& layout,
                             const std::vector<int>& keep);

// ---------------------------------------------------------------------------
// State checks and fidelities
// ---------------------------------------------------------------------------

struct DensityCheck {
  double trace_dev = 0.0;  // |tr(rho) - 1|
  double herm_dev = 0.0;   // max |rho - rho^dag|
  double min_eig = 1.0;    // smallest eigenvalue of (rho + rho^dag)/2

  void absorb(const DensityCheck& other);
  bool ok(double trace_tol = 1e-9, double herm_tol = 1e-10,
          double eig_floor = -1e-9) const;
};

DensityCheck check_density(const Mat& rho);
double hermiticity_deviation(const Mat& m);
double min_eigenvalue(const Mat& m);  // of the Hermitian part

// <psi| rho |psi>; psi must be normalized to 1e-10
double state_fidelity(const Mat& rho, const Vec& psi);

// ---------------------------------------------------------------------------
// Choi matrices and process fidelity
// ---------------------------------------------------------------------------

// Choi state (C (x) id)(|Phi><Phi|), |Phi> = sum_i |ii>/sqrt(d), built by
// feeding the d^2 matrix units through the channel.
Mat channel_choi(const std::function<Mat(const Mat&)>& channel, int d);

// same, for a channel given as a column-stacking superoperator (d^2 x d^2)
Mat superop_choi(const Mat& superop);

// max elementwise |d * Tr_out(choi) - I|
double choi_trace_preservation_deviation(const Mat& choi);

// F = <Phi_U| choi |Phi_U> with |Phi_U> = (U (x) I)|Phi>.
// Rejects non-trace-preserving channels (tp_tol) and non-unitary targets.
double choi_process_fidelity(const Mat& choi, const Mat& target_unitary,
                             double tp_tol = 1e-6);

}  // namespace nvsim

#endif
