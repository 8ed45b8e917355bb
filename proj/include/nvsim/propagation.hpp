#ifndef NVSIM_PROPAGATION_HPP
#define NVSIM_PROPAGATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "nvsim/spin_algebra.hpp"

namespace nvsim {

// Lindblad generator dr/dt = -i[H, r] + sum_j ( L r L+ - {L+L, r}/2 )
struct LindbladGenerator {
  Mat hamiltonian;
  std::vector<Mat> jumps;

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

// column-stacking superoperator of the generator; dim capped at 64
Mat liouvillian(const LindbladGenerator& gen);

// direct evaluation of the master-equation right-hand side
Mat lindblad_rhs(const LindbladGenerator& gen, const Mat& rho);

Mat apply_superop(const Mat& superop, const Mat& rho);

struct Propagator {
  Mat superop;
  double duration = 0.0;
};

// exp(L t) by scaling and squaring
Propagator make_propagator(const Mat& liouv, double t);

struct ChannelReport {
  double tp_dev = 0.0;        // max deviation from trace preservation
  double herm_dev = 0.0;      // max deviation from hermiticity preservation
  double choi_min_eig = 0.0;  // smallest Choi eigenvalue

  bool ok(double tp_tol = 1e-9, double cp_floor = -1e-8) const {
    return tp_dev < tp_tol && choi_min_eig >= cp_floor;
  }
};

ChannelReport validate_channel(const Propagator& prop);

// ---------------------------------------------------------------------------
// Sampled runs
// ---------------------------------------------------------------------------

struct Observable {
  std::string name;
  Mat op;
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[k] is the k-th column
  Mat final_state;
  DensityCheck hygiene;

  const std::vector<double>& column(const std::string& name) const;
};

TimeSeries propagate_static(const LindbladGenerator& gen, const Mat& rho0,
                            double t, double sample_every,
                            const std::vector<Observable>& obs);

// time-dependent Hamiltonian source for the validation levels
struct TimeDepHamiltonian {
  std::function<Mat(double)> at;
  double max_angular_frequency = 0.0;
};

// fixed-step 4th-order integration of the von Neumann / Lindblad equation
// with H(t) sampled at the substep nodes; dt must satisfy
// dt <= (2 pi / max_angular_frequency) / 50
TimeSeries propagate_timedep(const TimeDepHamiltonian& ham,
                             const std::vector<Mat>& jumps, const Mat& rho0,
                             double t, double dt, double sample_every,
                             const std::vector<Observable>& obs);

// ---------------------------------------------------------------------------
// Periodic electron reset
// ---------------------------------------------------------------------------

struct ResetSchedule {
  double t_reset = 0.0;
  int n_cycles = 1;
  Vec reset_state;  // electron pure state; defaults to |->_e when empty
};

// trace out the electron (slot 0) and re-tensor it in `reset_state`
Mat reset_apply(const Mat& rho, const HilbertLayout& layout,
                const Vec& reset_state);

// Evolve rho_n (x) |reset><reset| under `gen` with the electron re-prepared
// every t_reset; `sample_every` must divide t_reset. Samples cover
// n_cycles * t_reset; the segment sub-propagator is computed once and reused.
// Appends the segment propagator's report to `segment_report` when non-null.
TimeSeries reset_evolve(const LindbladGenerator& gen,
                        const HilbertLayout& layout, const Mat& rho_n0,
                        const ResetSchedule& schedule, double sample_every,
                        const std::vector<Observable>& obs,
                        ChannelReport* segment_report = nullptr);

// Final state only, for an arbitrary duration (resets at multiples of
// t_reset, trailing partial segment propagated without a reset).
Mat reset_evolve_to(const LindbladGenerator& gen, const HilbertLayout& layout,
                    const Mat& rho_full0, double duration, double t_reset,
                    const Vec& reset_state,
                    ChannelReport* segment_report = nullptr);

}  // namespace nvsim

#endif
