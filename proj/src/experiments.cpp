#include "nvsim/experiments.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace nvsim {

double ExperimentSpec::t_reset_or_throw() const {
  if (schedule && schedule->t_reset > 0.0) return schedule->t_reset;
  if (dissipation.t_reset) return *dissipation.t_reset;
  throw std::invalid_argument("experiment: reset schedule required");
}

Mat prepare_nuclear_state(const std::string& code, int nspins) {
  if (static_cast<int>(code.size()) != nspins)
    throw std::invalid_argument(
        "initial_state: expected one character per nuclear spin, got '" +
        code + "' for " + std::to_string(nspins) + " spins");
  Mat rho = Mat::Identity(1, 1);
  for (char c : code) {
    Mat factor;
    switch (c) {
      case '+': factor = projector(ket_x_plus()); break;
      case '-': factor = projector(ket_x_minus()); break;
      case 'u': factor = projector(ket_plus()); break;   // |up> = e0
      case 'd': factor = projector(ket_minus()); break;  // |down> = e1
      case 'm': factor = 0.5 * Mat::Identity(2, 2); break;
      default:
        throw std::invalid_argument(
            std::string("initial_state: unknown preparation '") + c + "'");
    }
    rho = Eigen::kroneckerProduct(rho, factor).eval();
  }
  return rho;
}

void SweepResult::note_channel(const ChannelReport& rep) {
  worst_channel.tp_dev = std::max(worst_channel.tp_dev, rep.tp_dev);
  worst_channel.herm_dev = std::max(worst_channel.herm_dev, rep.herm_dev);
  worst_channel.choi_min_eig =
      std::min(worst_channel.choi_min_eig, rep.choi_min_eig);
}

void parallel_for_index(int n, int threads,
                        const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

TransferMode transfer_mode_from_string(const std::string& name) {
  if (name == "ideal") return TransferMode::ideal;
  if (name == "ideal-effective") return TransferMode::ideal_effective;
  if (name == "decay-no-reset") return TransferMode::decay_no_reset;
  if (name == "reset-exact") return TransferMode::reset_exact;
  if (name == "reset-effective") return TransferMode::reset_effective;
  if (name == "eq10") return TransferMode::eq10;
  throw std::invalid_argument("transfer: unknown mode '" + name + "'");
}

std::string to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::ideal: return "ideal";
    case TransferMode::ideal_effective: return "ideal-effective";
    case TransferMode::decay_no_reset: return "decay-no-reset";
    case TransferMode::reset_exact: return "reset-exact";
    case TransferMode::reset_effective: return "reset-effective";
    case TransferMode::eq10: return "eq10";
  }
  return "?";
}

namespace {

// projectors onto the dressed products |s1 s2> of the two gate targets,
// on the given layout (nuclear slots at `offset`)
std::vector<Observable> dressed_product_observables(const HilbertLayout& lay,
                                                    int offset) {
  const Vec xp = ket_x_plus();
  const Vec xm = ket_x_minus();
  std::vector<Observable> obs;
  const char* names[4] = {"P_pp", "P_pm", "P_mp", "P_mm"};
  const Vec* s1[4] = {&xp, &xp, &xm, &xm};
  const Vec* s2[4] = {&xp, &xm, &xp, &xm};
  for (int k = 0; k < 4; ++k)
    obs.push_back({names[k],
                   embed(projector(*s1[k]), offset, lay) *
                       embed(projector(*s2[k]), offset + 1, lay)});
  return obs;
}

// three-body second-order form: drives + g_e Iz Iz (x) (|+><+| - |-><-|)_e
Mat three_body_effective(const SpinRegister& reg, double g_e) {
  const HilbertLayout lay = reg.layout();
  Mat h = Mat::Zero(lay.total_dim(), lay.total_dim());
  for (int i = 0; i < reg.nuclear_count(); ++i) {
    const auto& s = reg.spins[i];
    if (s.rf_enabled && s.rf_rabi != 0.0)
      h += s.rf_rabi * embed(spin_half_x(), i + 1, lay);
    const double det = s.rf_enabled ? s.rf_detuning() : 0.0;
    if (det != 0.0) h += det * embed(spin_half_z(), i + 1, lay);
  }
  Mat pauli_z(2, 2);
  pauli_z << 1.0, 0.0, 0.0, -1.0;
  h += g_e * (embed(pauli_z, 0, lay) * embed(spin_half_z(), 1, lay) *
              embed(spin_half_z(), 2, lay));
  return h;
}

}  // namespace

TimeSeries run_state_transfer(const ExperimentSpec& spec, TransferMode mode) {
  const SpinRegister& reg = spec.reg;
  if (reg.nuclear_count() < 2)
    throw std::invalid_argument("transfer: two gate targets required");
  const std::string init =
      spec.initial_state.empty() ? std::string(reg.nuclear_count(), '-')
                                 : spec.initial_state;
  const Mat rho_n = prepare_nuclear_state(init, reg.nuclear_count());

  if (mode == TransferMode::reset_effective) {
    const EffectiveModel model =
        effective_nuclear_model(reg, spec.dissipation);
    LindbladGenerator gen{model.h_nuclear, {model.l_nuclear}};
    return propagate_static(gen, rho_n, spec.duration, spec.sample_every,
                            dressed_product_observables(reg.nuclear_layout(), 0));
  }

  const HilbertLayout lay = reg.layout();
  const Mat rho_full =
      Eigen::kroneckerProduct(projector(ket_minus()), rho_n).eval();
  const auto obs = dressed_product_observables(lay, 1);

  switch (mode) {
    case TransferMode::ideal: {
      LindbladGenerator gen{build_rwa_hamiltonian(reg), {}};
      return propagate_static(gen, rho_full, spec.duration, spec.sample_every,
                              obs);
    }
    case TransferMode::ideal_effective: {
      auto [g_e, g_ep] = effective_couplings(reg, spec.dissipation);
      (void)g_ep;
      LindbladGenerator gen{three_body_effective(reg, g_e), {}};
      return propagate_static(gen, rho_full, spec.duration, spec.sample_every,
                              obs);
    }
    case TransferMode::decay_no_reset: {
      LindbladGenerator gen{
          build_rwa_hamiltonian(reg),
          build_dissipators(reg, spec.dissipation,
                            ElectronChannel::depolarizing)};
      return propagate_static(gen, rho_full, spec.duration, spec.sample_every,
                              obs);
    }
    case TransferMode::eq10: {
      LindbladGenerator gen{
          build_rwa_hamiltonian(reg),
          build_dissipators(reg, spec.dissipation,
                            ElectronChannel::reset_augmented)};
      return propagate_static(gen, rho_full, spec.duration, spec.sample_every,
                              obs);
    }
    case TransferMode::reset_exact: {
      const double t_re = spec.t_reset_or_throw();
      LindbladGenerator gen{
          build_rwa_hamiltonian(reg),
          build_dissipators(reg, spec.dissipation,
                            ElectronChannel::depolarizing)};
      ResetSchedule sched;
      sched.t_reset = t_re;
      sched.n_cycles = static_cast<int>(std::round(spec.duration / t_re));
      sched.reset_state = ket_minus();
      return reset_evolve(gen, lay, rho_n, sched, spec.sample_every, obs);
    }
    default:
      throw std::invalid_argument("transfer: unhandled mode");
  }
}

// ---------------------------------------------------------------------------
// gate channel and fidelity map
// ---------------------------------------------------------------------------

double default_gate_time(const EffectiveModel& model) {
  return M_PI / (model.p * model.g_e_prime);
}

namespace {

// reset protocol over a fixed duration, with the segment propagator built
// once and shared across channel inputs
struct ResetChannel {
  HilbertLayout lay;
  Mat segment;
  Mat remainder;
  bool has_remainder = false;
  int n_cycles = 0;
  Vec reset_state;
  ChannelReport report;

  Mat apply_full(Mat rho) const {
    for (int k = 0; k < n_cycles; ++k) {
      rho = apply_superop(segment, rho);
      rho = reset_apply(rho, lay, reset_state);
    }
    if (has_remainder) rho = apply_superop(remainder, rho);
    return rho;
  }

  Mat apply_nuclear(const Mat& rho_n) const {
    const Mat rho0 =
        Eigen::kroneckerProduct(projector(reset_state), rho_n).eval();
    const Mat rho_t = apply_full(rho0);
    std::vector<int> keep;
    for (int i = 1; i < lay.slot_count(); ++i) keep.push_back(i);
    return partial_trace(rho_t, keep, lay);
  }
};

ResetChannel make_reset_channel(const SpinRegister& reg,
                                const DissipationSpec& dspec, double t_reset,
                                double duration) {
  ResetChannel ch;
  ch.lay = reg.layout();
  ch.reset_state = ket_minus();
  LindbladGenerator gen{
      build_rwa_hamiltonian(reg),
      build_dissipators(reg, dspec, ElectronChannel::depolarizing)};
  const Mat l = liouvillian(gen);
  const Propagator seg = make_propagator(l, t_reset);
  ch.segment = seg.superop;
  ch.report = validate_channel(seg);
  ch.n_cycles = static_cast<int>(std::floor(duration / t_reset + 1e-9));
  const double rem = duration - ch.n_cycles * t_reset;
  if (rem > 1e-12 * std::max(duration, t_reset)) {
    ch.remainder = make_propagator(l, rem).superop;
    ch.has_remainder = true;
  }
  return ch;
}

}  // namespace

Mat gate_channel_apply(const ExperimentSpec& spec, const Mat& rho_n,
                       double duration, ChannelReport* report) {
  const ResetChannel ch = make_reset_channel(
      spec.reg, spec.dissipation, spec.t_reset_or_throw(), duration);
  if (report) *report = ch.report;
  return ch.apply_nuclear(rho_n);
}

namespace {

// dissipation-free two-target gate: exp(-i (drives + zz_sign g'_e ZZ) t)
Mat ideal_gate_unitary(const SpinRegister& reg, const EffectiveModel& model,
                       double gate_time, int target1 = 0, int target2 = 1) {
  std::vector<double> detunings(reg.nuclear_count(), 0.0);
  for (int i = 0; i < reg.nuclear_count(); ++i)
    detunings[i] = reg.spins[i].rf_enabled ? reg.spins[i].rf_detuning() : 0.0;
  const Mat h = build_detuned_effective(
      reg, detunings, model.zz_sign * model.g_e_prime, target1, target2);
  return (cplx(0, -1) * gate_time * h).exp();
}

}  // namespace

SweepResult run_fidelity_map(const ExperimentSpec& spec,
                             const std::vector<double>& mw_detunings,
                             const std::vector<double>& rabi_errors,
                             double gate_time) {
  if (mw_detunings.empty() || rabi_errors.empty())
    throw std::invalid_argument("fidelity-map: empty grid");
  if (spec.reg.nuclear_count() != 2)
    throw std::invalid_argument("fidelity-map: exactly two spins expected");
  const EffectiveModel model =
      effective_nuclear_model(spec.reg, spec.dissipation);
  if (gate_time <= 0.0) gate_time = default_gate_time(model);
  const Mat target = ideal_gate_unitary(spec.reg, model, gate_time);

  SweepResult out;
  out.axis_name = "delta_mw_kHz";
  out.axis = mw_detunings;
  const int nd = static_cast<int>(mw_detunings.size());
  const int ne = static_cast<int>(rabi_errors.size());
  std::vector<std::vector<double>> grid(ne, std::vector<double>(nd, 0.0));
  std::vector<ChannelReport> reports(nd * ne);

  parallel_for_index(nd * ne, spec.threads, [&](int idx) {
    const int ie = idx / nd;
    const int id = idx % nd;
    SpinRegister reg = spec.reg;
    reg.drive.mw_detuning = mw_detunings[id];
    reg.drive.mw_rabi_error = rabi_errors[ie];
    const ResetChannel ch = make_reset_channel(
        reg, spec.dissipation, spec.t_reset_or_throw(), gate_time);
    const Mat choi = channel_choi(
        [&](const Mat& rho_n) { return ch.apply_nuclear(rho_n); }, 4);
    reports[idx] = ch.report;
    grid[ie][id] = 1.0 - choi_process_fidelity(choi, target);
  });

  for (int ie = 0; ie < ne; ++ie) {
    char name[64];
    std::snprintf(name, sizeof(name), "infidelity_eps_%+.4f",
                  rabi_errors[ie]);
    out.series.emplace_back(name, grid[ie]);
  }
  for (const auto& rep : reports) out.note_channel(rep);
  return out;
}

// ---------------------------------------------------------------------------
// RF sweep and analytic populations
// ---------------------------------------------------------------------------

double analytic_population(double delta, double theta, double g, double t,
                           PopulationVariant variant) {
  const double gc = g * std::cos(theta);
  if (variant == PopulationVariant::as_printed) {
    const double r2 = gc * gc + delta * delta;
    if (r2 == 0.0) return 1.0;
    const double s = std::sin(0.5 * t * std::sqrt(r2));
    return 1.0 - gc * gc * s * s / r2;
  }
  const double kappa = gc / 4.0;
  const double r2 = kappa * kappa + 0.25 * delta * delta;
  if (r2 == 0.0) return 1.0;
  const double s = std::sin(t * std::sqrt(r2));
  return 1.0 - kappa * kappa * s * s / r2;
}

namespace {

int first_swept_spin(const SpinRegister& reg) {
  for (int i = 0; i < reg.nuclear_count(); ++i)
    if (reg.spins[i].tuning == RfTuning::swept) return i;
  throw std::invalid_argument("sweep: no spin marked 'swept' in the register");
}

int first_sensor_spin(const SpinRegister& reg) {
  for (int i = 0; i < reg.nuclear_count(); ++i)
    if (reg.spins[i].tuning != RfTuning::swept) return i;
  throw std::invalid_argument("sweep: no resonant sensor spin in the register");
}

SpinRegister with_swept_freq(const SpinRegister& reg, double rf_freq) {
  SpinRegister out = reg;
  for (auto& s : out.spins)
    if (s.tuning == RfTuning::swept) {
      s.rf_freq = rf_freq;
      s.tuning = RfTuning::fixed;
    }
  return out;
}

}  // namespace

double detuned_effective_population(const ExperimentSpec& spec,
                                    double rf_freq_swept, double t_evolve) {
  const SpinRegister reg = with_swept_freq(spec.reg, rf_freq_swept);
  const EffectiveModel model =
      effective_nuclear_model(reg, spec.dissipation);
  const int sensor = first_sensor_spin(spec.reg);
  const Mat u = ideal_gate_unitary(reg, model, t_evolve);
  // ZZ coupling at the stabilized weight for the closed-system check
  std::vector<double> detunings(reg.nuclear_count(), 0.0);
  for (int i = 0; i < reg.nuclear_count(); ++i)
    detunings[i] = reg.spins[i].rf_enabled ? reg.spins[i].rf_detuning() : 0.0;
  const Mat h = build_detuned_effective(
      reg, detunings, model.zz_sign * model.p * model.g_e_prime);
  const Mat u_p = (cplx(0, -1) * t_evolve * h).exp();
  (void)u;
  const std::string init = spec.initial_state.empty()
                               ? std::string(reg.nuclear_count(), '-')
                               : spec.initial_state;
  const Mat rho0 = prepare_nuclear_state(init, reg.nuclear_count());
  const Mat rho_t = u_p * rho0 * u_p.adjoint();
  const HilbertLayout nlay = reg.nuclear_layout();
  const Mat pop = embed(projector(ket_x_plus()), sensor, nlay);
  return (pop * rho_t).trace().real();
}

SweepResult run_rf_sweep(const ExperimentSpec& spec,
                         const std::vector<double>& rf_freqs,
                         double t_evolve) {
  if (rf_freqs.empty()) throw std::invalid_argument("sweep-rf: empty grid");
  const int sensor = first_sensor_spin(spec.reg);
  const int swept = first_swept_spin(spec.reg);
  if (!spec.reg.spins[sensor].rf_enabled || !spec.reg.spins[swept].rf_enabled)
    throw std::invalid_argument("sweep-rf: sensor and swept RF must be enabled");

  const int n = static_cast<int>(rf_freqs.size());
  std::vector<double> exact(n), secular(n), printed(n);
  std::vector<ChannelReport> reports(n);
  DensityCheck hygiene;
  std::vector<DensityCheck> checks(n);

  const EffectiveModel base_model =
      effective_nuclear_model(spec.reg, spec.dissipation, sensor, swept);
  const double g = base_model.p * base_model.g_e_prime;
  const double orf_sensor = spec.reg.spins[sensor].rf_rabi;
  const double orf_swept = spec.reg.spins[swept].rf_rabi;
  const double resonance = spec.reg.spins[swept].resonance();
  const HilbertLayout lay = spec.reg.layout();
  const Mat pop_sensor = embed(projector(ket_x_plus()), sensor + 1, lay);
  const std::string init = spec.initial_state.empty()
                               ? std::string(spec.reg.nuclear_count(), '-')
                               : spec.initial_state;
  const Mat rho_n0 = prepare_nuclear_state(init, spec.reg.nuclear_count());

  parallel_for_index(n, spec.threads, [&](int i) {
    const SpinRegister reg = with_swept_freq(spec.reg, rf_freqs[i]);
    ExperimentSpec local = spec;
    local.reg = reg;
    LindbladGenerator gen{
        build_rwa_hamiltonian(reg),
        build_dissipators(reg, spec.dissipation,
                          ElectronChannel::depolarizing)};
    const Mat rho0 =
        Eigen::kroneckerProduct(projector(ket_minus()), rho_n0).eval();
    const Mat rho_t =
        reset_evolve_to(gen, lay, rho0, t_evolve, spec.t_reset_or_throw(),
                        ket_minus(), &reports[i]);
    checks[i] = check_density(rho_t);
    exact[i] = (pop_sensor * rho_t).trace().real();

    const double delta2 = resonance - rf_freqs[i];
    const double obar = std::hypot(delta2, orf_swept);
    const double theta = std::acos(orf_swept / obar);
    const double mismatch = obar - orf_sensor;
    secular[i] = analytic_population(mismatch, theta, g, t_evolve,
                                     PopulationVariant::secular);
    printed[i] = analytic_population(mismatch, theta, g, t_evolve,
                                     PopulationVariant::as_printed);
  });

  SweepResult out;
  out.axis_name = "omega_rf2_kHz";
  out.axis = rf_freqs;
  out.series.emplace_back("P_plus_exact", exact);
  out.series.emplace_back("P_plus_analytic_secular", secular);
  out.series.emplace_back("P_plus_analytic_printed", printed);
  for (const auto& rep : reports) out.note_channel(rep);
  for (const auto& c : checks) hygiene.absorb(c);
  out.hygiene = hygiene;
  return out;
}

// ---------------------------------------------------------------------------
// selectivity
// ---------------------------------------------------------------------------

SweepResult run_selectivity(const ExperimentSpec& spec,
                            const std::vector<double>& delta3_values,
                            double gate_time) {
  if (spec.reg.nuclear_count() != 3)
    throw std::invalid_argument("selectivity: three nuclear spins required");
  const EffectiveModel model =
      effective_nuclear_model(spec.reg, spec.dissipation, 0, 1);
  if (gate_time <= 0.0) gate_time = default_gate_time(model);

  // two-target ideal gate on the (spin1, spin2) subregister
  SpinRegister pair_reg = spec.reg;
  pair_reg.spins.resize(2);
  const Mat target = [&] {
    std::vector<double> det(2, 0.0);
    const Mat h = build_detuned_effective(pair_reg, det,
                                          model.zz_sign * model.g_e_prime);
    return ((cplx(0, -1) * gate_time * h).exp()).eval();
  }();

  const int n = static_cast<int>(delta3_values.size());
  std::vector<double> fid(n);
  std::vector<ChannelReport> reports(n);

  parallel_for_index(n, spec.threads, [&](int i) {
    const double d3 = delta3_values[i];
    ExperimentSpec local = spec;
    auto& spectator = local.reg.spins[2];
    spectator.a_par = local.reg.spins[1].a_par - 2.0 * d3;
    spectator.rf_rabi = local.reg.spins[1].rf_rabi;
    spectator.rf_enabled = true;
    spectator.tuning = RfTuning::fixed;
    // same drive as spin 2, so the spectator detuning is -(delta3)
    spectator.rf_freq = spectator.resonance() + d3;

    const Mat rho_spec = projector(ket_x_minus());
    ChannelReport rep;
    const Mat choi = channel_choi(
        [&](const Mat& rho12) {
          const Mat rho_n = Eigen::kroneckerProduct(rho12, rho_spec).eval();
          const Mat out3 =
              gate_channel_apply(local, rho_n, gate_time,
                                 rep.tp_dev == 0.0 ? &rep : nullptr);
          return partial_trace(out3, {0, 1}, local.reg.nuclear_layout());
        },
        4);
    reports[i] = rep;
    fid[i] = choi_process_fidelity(choi, target);
  });

  SweepResult out;
  out.axis_name = "delta3_kHz";
  out.axis = delta3_values;
  out.series.emplace_back("gate_fidelity", fid);
  std::vector<double> infid(n);
  for (int i = 0; i < n; ++i) infid[i] = 1.0 - fid[i];
  out.series.emplace_back("gate_infidelity", infid);
  for (const auto& rep : reports) out.note_channel(rep);
  return out;
}

// ---------------------------------------------------------------------------
// sensing
// ---------------------------------------------------------------------------

SweepResult run_sensing(const ExperimentSpec& spec,
                        const std::vector<double>& rf_freqs,
                        double t_evolve) {
  if (rf_freqs.empty()) throw std::invalid_argument("sense: empty grid");
  const int sensor = first_sensor_spin(spec.reg);
  const HilbertLayout lay = spec.reg.layout();
  const Mat pop_sensor = embed(projector(ket_x_plus()), sensor + 1, lay);
  const Mat rho_n0 =
      prepare_nuclear_state(spec.initial_state, spec.reg.nuclear_count());

  const int n = static_cast<int>(rf_freqs.size());
  std::vector<double> pplus(n);
  std::vector<ChannelReport> reports(n);
  std::vector<DensityCheck> checks(n);

  parallel_for_index(n, spec.threads, [&](int i) {
    const SpinRegister reg = with_swept_freq(spec.reg, rf_freqs[i]);
    LindbladGenerator gen{
        build_rwa_hamiltonian(reg),
        build_dissipators(reg, spec.dissipation,
                          ElectronChannel::depolarizing)};
    const Mat rho0 =
        Eigen::kroneckerProduct(projector(ket_minus()), rho_n0).eval();
    const Mat rho_t =
        reset_evolve_to(gen, lay, rho0, t_evolve, spec.t_reset_or_throw(),
                        ket_minus(), &reports[i]);
    checks[i] = check_density(rho_t);
    pplus[i] = (pop_sensor * rho_t).trace().real();
  });

  SweepResult out;
  out.axis_name = "omega_rf_kHz";
  out.axis = rf_freqs;
  out.series.emplace_back("P_plus", pplus);
  for (const auto& rep : reports) out.note_channel(rep);
  for (const auto& c : checks) out.hygiene.absorb(c);
  return out;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

namespace {

Mat rotation_about_phi_axis(double theta, double phi) {
  const Mat axis = std::cos(phi) * spin_half_x() + std::sin(phi) * spin_half_y();
  return (cplx(0, -1) * theta * axis).exp();
}

Mat nuclear_rotation(const std::vector<double>& thetas, double phi,
                     const HilbertLayout& nlay) {
  Mat u = Mat::Identity(nlay.total_dim(), nlay.total_dim());
  for (int i = 0; i < nlay.slot_count(); ++i)
    u = embed(rotation_about_phi_axis(thetas[i], phi), i, nlay) * u;
  return u;
}

}  // namespace

PipelineResult run_gate_pipeline(const ExperimentSpec& spec,
                                 const std::vector<double>& theta_prep,
                                 const std::vector<double>& theta_read,
                                 double gate_time, PipelineMode mode,
                                 double read_axis_phase) {
  const int nn = spec.reg.nuclear_count();
  if (static_cast<int>(theta_prep.size()) != nn ||
      static_cast<int>(theta_read.size()) != nn)
    throw std::invalid_argument("pipeline: one angle per nuclear spin");
  const HilbertLayout nlay = spec.reg.nuclear_layout();

  // P/M polarization: |up...up>, then Y_theta preparation rotations
  Mat rho = Mat::Zero(nlay.total_dim(), nlay.total_dim());
  rho(0, 0) = 1.0;
  const Mat uprep = nuclear_rotation(theta_prep, M_PI / 2.0, nlay);
  rho = uprep * rho * uprep.adjoint();

  if (gate_time > 0.0) {
    if (mode == PipelineMode::ideal) {
      const EffectiveModel model =
          effective_nuclear_model(spec.reg, spec.dissipation);
      const Mat u = (cplx(0, -1) * gate_time * model.h_nuclear).exp();
      rho = u * rho * u.adjoint();
    } else {
      rho = gate_channel_apply(spec, rho, gate_time, nullptr);
    }
  }

  const Mat uread = nuclear_rotation(theta_read, read_axis_phase, nlay);
  rho = uread * rho * uread.adjoint();

  PipelineResult out;
  out.nuclear_state = rho;
  const int d = nlay.total_dim();
  for (int k = 0; k < d; ++k) {
    std::string label = "P_";
    for (int i = nn - 1, bit = k; i >= 0; --i)
      label += ((bit >> i) & 1) ? 'd' : 'u';
    out.populations.emplace_back(label, rho(k, k).real());
  }
  Mat par = Mat::Identity(d, d);
  for (int i = 0; i < nn; ++i)
    par = par * (2.0 * embed(spin_half_z(), i, nlay));
  out.parity = (par * rho).trace().real();
  return out;
}

}  // namespace nvsim
