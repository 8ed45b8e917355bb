#ifndef NVSIM_MODEL_HPP
#define NVSIM_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "nvsim/spin_algebra.hpp"

namespace nvsim {

// How a nuclear spin's RF drive frequency is determined.
enum class RfTuning {
  resonant,  // rf_freq pinned to larmor + a_par/2
  fixed,     // rf_freq as given
  swept,     // rf_freq supplied per sweep point by the experiment
};

struct NuclearSpinSpec {
  std::string label;      // species tag, e.g. "13C", "29Si", "1H"
  double larmor = 0.0;    // gamma_n * B, rad/s
  double a_par = 0.0;     // hyperfine parallel component, rad/s
  double a_perp = 0.0;    // hyperfine perpendicular component, rad/s
  double rf_rabi = 0.0;   // RF Rabi frequency, rad/s
  double rf_freq = 0.0;   // RF drive frequency, rad/s (ignored if resonant)
  bool rf_enabled = false;
  RfTuning tuning = RfTuning::resonant;

  double resonance() const { return larmor + 0.5 * a_par; }
  // detuning of the spin's resonance from its drive, rad/s
  double rf_detuning() const;
  void validate(int index) const;
};

struct DriveSpec {
  double mw_rabi = 0.0;        // Omega, rad/s
  double mw_detuning = 0.0;    // deviation from omega = D - gamma_e B, rad/s
  double mw_rabi_error = 0.0;  // fractional amplitude error
  double zero_field_d = 0.0;   // D, rad/s
  double electron_zeeman = 0.0;  // gamma_e B, rad/s
};

struct DissipationSpec {
  double t1rho = 0.0;                 // NV dressed-frame lifetime, s
  std::optional<double> t_reset;      // reset period t_re, s
  std::vector<std::optional<double>> target_t2;  // per-nucleus T2, s

  double gamma_e() const { return 1.0 / t1rho; }
  double gamma_r() const;  // 1/T1rho + 1/t_re when a reset period is set
  void validate() const;
};

struct SpinRegister {
  DriveSpec drive;
  std::vector<NuclearSpinSpec> spins;

  int nuclear_count() const { return static_cast<int>(spins.size()); }
  HilbertLayout layout() const;          // dressed electron (2) + nuclei
  HilbertLayout nuclear_layout() const;  // nuclei only
  HilbertLayout lab_layout() const;      // spin-1 electron (3) + nuclei
  void validate() const;
};

// Perturbative-regime bookkeeping: a_par << Omega << omega_rf.
struct RegimeReport {
  double apar_over_rabi = 0.0;  // max_i a_par_i / Omega
  double rabi_over_rf = 0.0;    // Omega / min_i omega_rf_i
  bool within(double threshold = 0.1) const {
    return apar_over_rabi < threshold && rabi_over_rf < threshold;
  }
};

RegimeReport validity_regime(const SpinRegister& reg);

// ---------------------------------------------------------------------------
// Hamiltonians at the three fidelity levels
// ---------------------------------------------------------------------------

// RWA level (time independent, main simulation level):
//   H = Omega(1+eps) sz_e - delta_mw sx_e
//       + sum_i [ Orf_i Ix_i + delta_i Iz_i + a_par_i sx_e Iz_i ]
// delta_i is each driven spin's RF detuning; the bare |-1><-1| population
// operator behind delta_mw turns into -sx_e in the dressed basis.
Mat build_rwa_hamiltonian(const SpinRegister& reg);

// Rotating frame of H0 = (D - gamma_e B)|-1><-1| (time dependent, before the
// nuclear-Zeeman rotation and the RWA):
//   H = Omega(1+eps) sz_e - delta_mw sx_e
//       + sum_i [ (larmor_i + a_par_i/2) Iz_i + a_par_i sx_e Iz_i
//                 + a_perp_i sx_e Ix_i + 2 Orf_i cos(w_rf_i t) Ix_i ]
Mat build_rf_frame_hamiltonian(const SpinRegister& reg, double t);

// Lab frame with the full spin-1 electron; `scale` multiplies D and
// gamma_e B to keep the integration step count tractable:
//   H = D' Sz^2 + gB' Sz + sqrt(2) Omega cos(w t) Sx
//       + sum_i [ larmor_i Iz_i + Sz (a_par_i Iz_i + a_perp_i Ix_i)
//                 + 2 Orf_i cos(w_rf_i t) Ix_i ],   w = D' - gB' - delta_mw
Mat build_lab_hamiltonian(const SpinRegister& reg, double t, double scale);

// Nuclear-only effective Hamiltonian with explicit per-spin RF detunings and
// a ZZ coupling between the two target spins (signed coupling supplied by the
// caller, normally +- p g'_e from the effective model):
//   H = sum_i [ Orf_i Ix_i + delta_i Iz_i ] + zz_coupling Iz_t1 Iz_t2
Mat build_detuned_effective(const SpinRegister& reg,
                            const std::vector<double>& rf_detunings,
                            double zz_coupling, int target1 = 0,
                            int target2 = 1);

// ---------------------------------------------------------------------------
// Jump operators
// ---------------------------------------------------------------------------

enum class ElectronChannel {
  // T1rho as dressed-state depolarization: sqrt(gamma_e/2)|-><+| and
  // sqrt(gamma_e/2)|+><-|, so <2 sz_e> decays as exp(-t/T1rho). Used for the
  // physical simulation modes.
  depolarizing,
  // single reset-augmented decay sqrt(gamma_r)|-><+|, the literal generator
  // of the effective-model derivation
  reset_augmented,
};

// electron relaxation (per `channel`) plus per-target dephasing
// sqrt(2/T2) Iz for every nucleus with a T2 entry, all on the full register
std::vector<Mat> build_dissipators(const SpinRegister& reg,
                                   const DissipationSpec& dspec,
                                   ElectronChannel channel);

}  // namespace nvsim

#endif
