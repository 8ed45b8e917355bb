#ifndef NVSIM_EFFECTIVE_HPP
#define NVSIM_EFFECTIVE_HPP

#include <utility>

#include "nvsim/model.hpp"
#include "nvsim/spin_algebra.hpp"

namespace nvsim {

// Second-order block reduction of H0 + V onto the dressed electron states:
//   <a|He|b> = <a|V|b> + (1/2) sum_i [ <a|V|i><i|V|b>/(Ea-Ei)
//                                     - <a|V|i><i|V|b>/(Ei-Eb) ]
// H0 must be diagonal in the dressed basis (electron slot 0) with the
// electron energies independent of the nuclear state. Returns the nuclear
// operators of the |+> and |-> blocks; the first-order diagonal part of V is
// retained. Degenerate electron energies are rejected.
struct SwBlocks {
  Mat plus_block;
  Mat minus_block;
  double e_plus = 0.0;
  double e_minus = 0.0;
  double perturbation_ratio = 0.0;  // ||V|| / |E+ - E-|
};

SwBlocks sw_second_order(const Mat& h0, const Mat& v,
                         const HilbertLayout& layout);

// g_e = a1 a2 / (2 Omega) and g'_e = Omega a1 a2 / (2 (Omega^2 + g_r^2/4))
// for the designated gate-target pair.
std::pair<double, double> effective_couplings(const SpinRegister& reg,
                                              const DissipationSpec& dspec,
                                              int target1 = 0, int target2 = 1);

// quasi-steady electron polarization magnitude p = exp(-t_re / T1rho)
double quasi_steady_polarization(double t_reset, double t1rho);

struct EffectiveModel {
  double g_e = 0.0;        // rad/s
  double g_e_prime = 0.0;  // rad/s
  double p = 0.0;          // polarization magnitude, in (0,1]
  double gamma_r = 0.0;    // 1/s
  double gamma_n = 0.0;    // 1/s
  double validity_ratio = 0.0;  // gamma_n / (p g'_e)
  bool gate_capable = false;
  // sign of <2 sz_e> in the stabilized channel: -1 for resets to |->. The
  // ZZ term of h_nuclear carries zz_sign * p * g'_e.
  double zz_sign = -1.0;
  Mat h_nuclear;  // nuclear-only Hamiltonian (drives, detunings, ZZ)
  Mat l_nuclear;  // collective jump sum_k sqrt(p g_r) a_k/(Omega - i g_r/2) Iz_k
};

// Effective nuclear master-equation ingredients for the reset protocol.
// Requires a reset period in `dspec`.
EffectiveModel effective_nuclear_model(const SpinRegister& reg,
                                       const DissipationSpec& dspec,
                                       int target1 = 0, int target2 = 1);

struct SensitivityEstimate {
  double coupling_form = 0.0;  // p g'_e sqrt(gamma_n), rad/s per sqrt(s)
  double proxy_form = 0.0;     // (a_par/4)/sqrt(T1rho)
  double ratio = 0.0;          // coupling_form / proxy_form
};

SensitivityEstimate sensitivity_estimate(const EffectiveModel& model,
                                         double a_par_target, double t1rho);

}  // namespace nvsim

#endif
