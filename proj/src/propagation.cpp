#include "nvsim/propagation.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace nvsim {

Mat liouvillian(const LindbladGenerator& gen) {
  const int d = gen.dim();
  if (d > 64)
    throw std::invalid_argument(
        "liouvillian: dimension " + std::to_string(d) +
        " exceeds the 64 cap; reduce the register");
  const Mat id = Mat::Identity(d, d);
  Mat l = cplx(0, -1) * (Eigen::kroneckerProduct(id, gen.hamiltonian) -
                         Eigen::kroneckerProduct(gen.hamiltonian.transpose(), id))
                            .eval();
  for (const Mat& j : gen.jumps) {
    const Mat jdj = j.adjoint() * j;
    l += Eigen::kroneckerProduct(j.conjugate(), j).eval();
    l -= 0.5 * Eigen::kroneckerProduct(id, jdj).eval();
    l -= 0.5 * Eigen::kroneckerProduct(jdj.transpose(), id).eval();
  }
  return l;
}

Mat lindblad_rhs(const LindbladGenerator& gen, const Mat& rho) {
  Mat out = cplx(0, -1) * (gen.hamiltonian * rho - rho * gen.hamiltonian);
  for (const Mat& j : gen.jumps) {
    const Mat jdj = j.adjoint() * j;
    out += j * rho * j.adjoint() - 0.5 * (jdj * rho + rho * jdj);
  }
  return out;
}

Mat apply_superop(const Mat& superop, const Mat& rho) {
  const int d = static_cast<int>(rho.rows());
  Eigen::Map<const Vec> v(rho.data(), d * d);
  Vec w = superop * v;
  return Eigen::Map<const Mat>(w.data(), d, d);
}

Propagator make_propagator(const Mat& liouv, double t) {
  Propagator p;
  p.superop = (liouv * t).exp();
  p.duration = t;
  return p;
}

ChannelReport validate_channel(const Propagator& prop) {
  const int d2 = static_cast<int>(prop.superop.rows());
  const int d = static_cast<int>(std::lround(std::sqrt(double(d2))));
  ChannelReport rep;
  // trace preservation: tr E(|i><j|) = delta_ij
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      cplx tr(0, 0);
      for (int m = 0; m < d; ++m) tr += prop.superop(m + d * m, i + d * j);
      rep.tp_dev = std::max(rep.tp_dev, std::abs(tr - (i == j ? 1.0 : 0.0)));
    }
  // hermiticity preservation: S_{(m,n),(i,j)} = conj(S_{(n,m),(j,i)})
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const cplx a = prop.superop(m + d * n, i + d * j);
          const cplx b = std::conj(prop.superop(n + d * m, j + d * i));
          rep.herm_dev = std::max(rep.herm_dev, std::abs(a - b));
        }
  rep.choi_min_eig = min_eigenvalue(superop_choi(prop.superop));
  return rep;
}

const std::vector<double>& TimeSeries::column(const std::string& name) const {
  for (size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return values[k];
  throw std::out_of_range("TimeSeries: no column named '" + name + "'");
}

namespace {

void init_series(TimeSeries& ts, const std::vector<Observable>& obs) {
  for (const auto& o : obs) {
    ts.names.push_back(o.name);
    ts.values.emplace_back();
  }
}

void record_sample(TimeSeries& ts, double t, const Mat& rho,
                   const std::vector<Observable>& obs) {
  ts.times.push_back(t);
  for (size_t k = 0; k < obs.size(); ++k)
    ts.values[k].push_back((obs[k].op * rho).trace().real());
  ts.hygiene.absorb(check_density(rho));
}

}  // namespace

TimeSeries propagate_static(const LindbladGenerator& gen, const Mat& rho0,
                            double t, double sample_every,
                            const std::vector<Observable>& obs) {
  if (t <= 0.0)
    throw std::invalid_argument("propagate_static: t must be positive");
  if (sample_every <= 0.0)
    throw std::invalid_argument("propagate_static: sample_every must be positive");
  const Mat l = liouvillian(gen);
  const Propagator step = make_propagator(l, sample_every);
  TimeSeries ts;
  init_series(ts, obs);
  Mat rho = rho0;
  record_sample(ts, 0.0, rho, obs);
  const int n = static_cast<int>(std::floor(t / sample_every + 1e-9));
  for (int k = 1; k <= n; ++k) {
    rho = apply_superop(step.superop, rho);
    record_sample(ts, k * sample_every, rho, obs);
  }
  const double rem = t - n * sample_every;
  if (rem > 1e-12 * t) {
    rho = apply_superop(make_propagator(l, rem).superop, rho);
    record_sample(ts, t, rho, obs);
  }
  ts.final_state = rho;
  return ts;
}

TimeSeries propagate_timedep(const TimeDepHamiltonian& ham,
                             const std::vector<Mat>& jumps, const Mat& rho0,
                             double t, double dt, double sample_every,
                             const std::vector<Observable>& obs) {
  if (t <= 0.0)
    throw std::invalid_argument("propagate_timedep: t must be positive");
  const double dt_max =
      (2.0 * M_PI / ham.max_angular_frequency) / 50.0;
  if (dt > dt_max)
    throw std::invalid_argument(
        "propagate_timedep: dt too coarse; required dt <= " +
        std::to_string(dt_max) + " s");
  // substeps land exactly on the sample grid
  const int m = std::max(1, static_cast<int>(std::ceil(sample_every / dt)));
  const double h = sample_every / m;
  const int nsamp = static_cast<int>(std::round(t / sample_every));
  if (std::abs(nsamp * sample_every - t) > 1e-9 * t)
    throw std::invalid_argument(
        "propagate_timedep: t must be a multiple of sample_every");

  auto rhs = [&](double tau, const Mat& rho) {
    Mat out = cplx(0, -1) * (ham.at(tau) * rho - rho * ham.at(tau));
    for (const Mat& j : jumps) {
      const Mat jdj = j.adjoint() * j;
      out += j * rho * j.adjoint() - 0.5 * (jdj * rho + rho * jdj);
    }
    return out;
  };

  TimeSeries ts;
  init_series(ts, obs);
  Mat rho = rho0;
  record_sample(ts, 0.0, rho, obs);
  double tau = 0.0;
  for (int s = 1; s <= nsamp; ++s) {
    for (int k = 0; k < m; ++k) {
      const Mat k1 = rhs(tau, rho);
      const Mat k2 = rhs(tau + h / 2, rho + (h / 2) * k1);
      const Mat k3 = rhs(tau + h / 2, rho + (h / 2) * k2);
      const Mat k4 = rhs(tau + h, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      tau += h;
    }
    tau = s * sample_every;  // suppress accumulation drift
    record_sample(ts, tau, rho, obs);
  }
  ts.final_state = rho;
  return ts;
}

Mat reset_apply(const Mat& rho, const HilbertLayout& layout,
                const Vec& reset_state) {
  const int de = layout.dim(0);
  const int dn = layout.total_dim() / de;
  if (reset_state.size() != de)
    throw std::invalid_argument("reset_apply: reset state dimension mismatch");
  Mat rn = Mat::Zero(dn, dn);
  for (int e = 0; e < de; ++e)
    rn += rho.block(e * dn, e * dn, dn, dn);
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (int a = 0; a < de; ++a)
    for (int b = 0; b < de; ++b) {
      const cplx w = reset_state(a) * std::conj(reset_state(b));
      if (w != cplx(0, 0)) out.block(a * dn, b * dn, dn, dn) = w * rn;
    }
  return out;
}

namespace {

Vec default_reset_state(const ResetSchedule& schedule) {
  return schedule.reset_state.size() == 0 ? ket_minus() : schedule.reset_state;
}

}  // namespace

TimeSeries reset_evolve(const LindbladGenerator& gen,
                        const HilbertLayout& layout, const Mat& rho_n0,
                        const ResetSchedule& schedule, double sample_every,
                        const std::vector<Observable>& obs,
                        ChannelReport* segment_report) {
  if (schedule.t_reset <= 0.0)
    throw std::invalid_argument("reset_evolve: t_reset must be positive");
  if (schedule.n_cycles < 1)
    throw std::invalid_argument("reset_evolve: n_cycles must be >= 1");
  const int m = static_cast<int>(std::round(schedule.t_reset / sample_every));
  if (m < 1 || std::abs(m * sample_every - schedule.t_reset) >
                   1e-9 * schedule.t_reset)
    throw std::invalid_argument(
        "reset_evolve: sample_every must divide t_reset");

  const Vec reset = default_reset_state(schedule);
  const Mat l = liouvillian(gen);
  const Propagator sub = make_propagator(l, sample_every);
  if (segment_report) *segment_report = validate_channel(sub);

  TimeSeries ts;
  init_series(ts, obs);
  Mat rho = Eigen::kroneckerProduct(projector(reset), rho_n0).eval();
  record_sample(ts, 0.0, rho, obs);
  for (int cyc = 0; cyc < schedule.n_cycles; ++cyc) {
    for (int k = 0; k < m; ++k) {
      rho = apply_superop(sub.superop, rho);
      record_sample(ts, cyc * schedule.t_reset + (k + 1) * sample_every, rho,
                    obs);
    }
    rho = reset_apply(rho, layout, reset);
  }
  ts.final_state = rho;
  return ts;
}

Mat reset_evolve_to(const LindbladGenerator& gen, const HilbertLayout& layout,
                    const Mat& rho_full0, double duration, double t_reset,
                    const Vec& reset_state,
                    ChannelReport* segment_report) {
  if (t_reset <= 0.0)
    throw std::invalid_argument("reset_evolve_to: t_reset must be positive");
  const Mat l = liouvillian(gen);
  const Propagator seg = make_propagator(l, t_reset);
  if (segment_report) *segment_report = validate_channel(seg);
  const int n = static_cast<int>(std::floor(duration / t_reset + 1e-9));
  Mat rho = rho_full0;
  for (int k = 0; k < n; ++k) {
    rho = apply_superop(seg.superop, rho);
    rho = reset_apply(rho, layout, reset_state);
  }
  const double rem = duration - n * t_reset;
  if (rem > 1e-12 * std::max(duration, t_reset))
    rho = apply_superop(make_propagator(l, rem).superop, rho);
  return rho;
}

}  // namespace nvsim
