#ifndef NVSIM_EXPERIMENTS_HPP
#define NVSIM_EXPERIMENTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "nvsim/effective.hpp"
#include "nvsim/model.hpp"
#include "nvsim/propagation.hpp"

namespace nvsim {

struct ResetScheduleSpec {
  double t_reset = 0.0;
};

struct ExperimentSpec {
  SpinRegister reg;
  DissipationSpec dissipation;
  std::optional<ResetScheduleSpec> schedule;
  // one character per nucleus: '+', '-' (dressed x states), 'u', 'd'
  // (z eigenstates), 'm' (maximally mixed)
  std::string initial_state;
  double duration = 0.0;
  double sample_every = 0.0;
  int threads = 1;

  double t_reset_or_throw() const;
};

// nuclear density operator for the named preparation
Mat prepare_nuclear_state(const std::string& code, int nspins);

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis;
  std::vector<std::pair<std::string, std::vector<double>>> series;
  DensityCheck hygiene;
  ChannelReport worst_channel;

  void note_channel(const ChannelReport& rep);
};

// ---------------------------------------------------------------------------
// State transfer (population curves)
// ---------------------------------------------------------------------------

enum class TransferMode {
  ideal,             // closed evolution under the RWA Hamiltonian
  ideal_effective,   // closed evolution under the second-order three-body form
  decay_no_reset,    // RWA Hamiltonian + electron relaxation, no resets
  reset_exact,       // relaxation between resets + periodic reset map
  reset_effective,   // effective nuclear master equation
  eq10,              // reset-augmented continuous decay, no reset map
};

TransferMode transfer_mode_from_string(const std::string& name);
std::string to_string(TransferMode mode);

// populations of the four dressed nuclear products vs time
// (columns P_pp, P_pm, P_mp, P_mm)
TimeSeries run_state_transfer(const ExperimentSpec& spec, TransferMode mode);

// ---------------------------------------------------------------------------
// Process-fidelity map (MW detuning x Rabi error)
// ---------------------------------------------------------------------------

// default gate time: ZZ pi-phase of the reset protocol
double default_gate_time(const EffectiveModel& model);

// Choi infidelity of the reset-exact two-spin gate against the
// dissipation-free target exp(-i (drives + zz_sign g'_e ZZ) t).
// One series per epsilon value, axis = MW detuning.
SweepResult run_fidelity_map(const ExperimentSpec& spec,
                             const std::vector<double>& mw_detunings,
                             const std::vector<double>& rabi_errors,
                             double gate_time = 0.0);

// ---------------------------------------------------------------------------
// RF sweep spectroscopy / analytic populations
// ---------------------------------------------------------------------------

enum class PopulationVariant { as_printed, secular };

// Sensor |+> population under the detuned effective two-level reduction.
// `g` is the stabilized coupling p g'_e; Delta the dressed-Rabi mismatch;
// theta the drive tilt with cos(theta) = Orf / Obar.
double analytic_population(double delta, double theta, double g, double t,
                           PopulationVariant variant);

// Sweeps the RF frequency of every spin marked `swept`; sensor spins stay
// resonant. Columns: exact reset simulation plus both analytic variants
// evaluated for the (sensor, first-swept) pair.
SweepResult run_rf_sweep(const ExperimentSpec& spec,
                         const std::vector<double>& rf_freqs, double t_evolve);

// closed-system propagation of the detuned effective Hamiltonian, as the
// independent check of the analytic formula
double detuned_effective_population(const ExperimentSpec& spec,
                                    double rf_freq_swept, double t_evolve);

// ---------------------------------------------------------------------------
// Third-spin selectivity
// ---------------------------------------------------------------------------

// Register must hold three spins; targets are 1,2 and the third is the
// spectator whose coupling follows a_par3 = a_par2 - 2 delta3 and whose RF
// detuning is -delta3 (same drive as spin 2). Series: Choi process fidelity
// of the two-target gate after tracing the spectator.
SweepResult run_selectivity(const ExperimentSpec& spec,
                            const std::vector<double>& delta3_values,
                            double gate_time = 0.0);

// ---------------------------------------------------------------------------
// Nuclear-sensor spectroscopy (mixed targets)
// ---------------------------------------------------------------------------

// Sensor spin 1 prepared per `initial_state`, swept RF applied to all spins
// marked `swept`; targets may carry T2 dephasing. Series: sensor |+>
// population at t_evolve.
SweepResult run_sensing(const ExperimentSpec& spec,
                        const std::vector<double>& rf_freqs, double t_evolve);

// ---------------------------------------------------------------------------
// Gate pipeline (P, M, Y_theta, N resets)
// ---------------------------------------------------------------------------

struct PipelineResult {
  Mat nuclear_state;                           // after readout rotations
  std::vector<std::pair<std::string, double>> populations;  // z-basis record
  double parity = 0.0;                         // <Z1 Z2 ... Zn>
};

enum class PipelineMode { ideal, reset_exact };

// theta_prep/theta_read: one rotation angle per nucleus about the axis
// cos(phi) X + sin(phi) Y (phi = read_axis_phase for the readout pulses,
// 0 for preparation). Gate evolution is exp(-i H_N t) in ideal mode or the
// reset-exact channel in physical mode.
PipelineResult run_gate_pipeline(const ExperimentSpec& spec,
                                 const std::vector<double>& theta_prep,
                                 const std::vector<double>& theta_read,
                                 double gate_time, PipelineMode mode,
                                 double read_axis_phase = 0.0);

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

// reset-exact channel on the nuclear space: embeds |-><-|_e, runs the
// physical reset protocol for `duration`, traces out the electron
Mat gate_channel_apply(const ExperimentSpec& spec, const Mat& rho_n,
                       double duration, ChannelReport* report = nullptr);

// run `n` independent jobs on `threads` workers, results slotted by index
void parallel_for_index(int n, int threads,
                        const std::function<void(int)>& body);

}  // namespace nvsim

#endif
