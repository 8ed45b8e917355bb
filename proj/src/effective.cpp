#include "nvsim/effective.hpp"

#include <cmath>
#include <stdexcept>

namespace nvsim {

namespace {

// nuclear-space block <a| M |b> for electron slot 0
Mat electron_block(const Mat& m, int a, int b, int dn) {
  return m.block(a * dn, b * dn, dn, dn);
}

}  // namespace

SwBlocks sw_second_order(const Mat& h0, const Mat& v,
                         const HilbertLayout& layout) {
  if (layout.dim(0) != 2)
    throw std::invalid_argument("sw_second_order: electron slot must be 2-dim");
  const int dn = layout.total_dim() / 2;
  const Mat idn = Mat::Identity(dn, dn);

  // H0 must be electron-diagonal with scalar block energies
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (a == b) continue;
      if (electron_block(h0, a, b, dn).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument(
            "sw_second_order: H0 not diagonal in the dressed basis");
    }
  const Mat b_pp = electron_block(h0, 0, 0, dn);
  const Mat b_mm = electron_block(h0, 1, 1, dn);
  const double e_plus = b_pp.trace().real() / dn;
  const double e_minus = b_mm.trace().real() / dn;
  if ((b_pp - e_plus * idn).cwiseAbs().maxCoeff() > 1e-9 ||
      (b_mm - e_minus * idn).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument(
        "sw_second_order: electron energies depend on the nuclear state");
  const double gap = e_plus - e_minus;
  if (std::abs(gap) < 1e-12 * std::max(1.0, std::abs(e_plus)))
    throw std::invalid_argument(
        "sw_second_order: degenerate electron eigenvalues");

  const Mat v_pp = electron_block(v, 0, 0, dn);
  const Mat v_mm = electron_block(v, 1, 1, dn);
  const Mat v_pm = electron_block(v, 0, 1, dn);
  const Mat v_mp = electron_block(v, 1, 0, dn);

  SwBlocks out;
  out.e_plus = e_plus;
  out.e_minus = e_minus;
  out.perturbation_ratio = v.norm() / std::abs(gap);
  out.plus_block = v_pp + (v_pm * v_mp) / gap;
  out.minus_block = v_mm - (v_mp * v_pm) / gap;
  return out;
}

std::pair<double, double> effective_couplings(const SpinRegister& reg,
                                              const DissipationSpec& dspec,
                                              int target1, int target2) {
  if (reg.nuclear_count() < 2)
    throw std::invalid_argument(
        "effective_couplings: two gate-target spins required");
  if (target1 == target2 || target1 < 0 || target2 < 0 ||
      target1 >= reg.nuclear_count() || target2 >= reg.nuclear_count())
    throw std::invalid_argument("effective_couplings: bad target pair");
  const double om = reg.drive.mw_rabi;
  const double a1 = reg.spins[target1].a_par;
  const double a2 = reg.spins[target2].a_par;
  const double g_e = a1 * a2 / (2.0 * om);
  const double gr = dspec.gamma_r();
  const double g_ep = om * a1 * a2 / (2.0 * (om * om + gr * gr / 4.0));
  return {g_e, g_ep};
}

double quasi_steady_polarization(double t_reset, double t1rho) {
  if (t_reset <= 0.0 || t1rho <= 0.0)
    throw std::invalid_argument(
        "quasi_steady_polarization: times must be positive");
  return std::exp(-t_reset / t1rho);
}

EffectiveModel effective_nuclear_model(const SpinRegister& reg,
                                       const DissipationSpec& dspec,
                                       int target1, int target2) {
  if (!dspec.t_reset)
    throw std::invalid_argument(
        "effective_nuclear_model: reset period required (the effective model "
        "describes the reset protocol)");
  dspec.validate();

  EffectiveModel m;
  auto [g_e, g_ep] = effective_couplings(reg, dspec, target1, target2);
  m.g_e = g_e;
  m.g_e_prime = g_ep;
  m.p = quasi_steady_polarization(*dspec.t_reset, dspec.t1rho);
  m.gamma_r = dspec.gamma_r();
  m.zz_sign = -1.0;  // resets to |->_e give <2 sz_e> = -p

  const double om = reg.drive.mw_rabi;
  const double denom = om * om + m.gamma_r * m.gamma_r / 4.0;
  double apar_sum = 0.0;
  for (const auto& s : reg.spins) apar_sum += s.a_par;
  m.gamma_n = m.p * m.gamma_r * apar_sum * apar_sum / denom;
  m.validity_ratio = m.gamma_n / (m.p * m.g_e_prime);
  m.gate_capable = m.validity_ratio < 1.0;

  std::vector<double> detunings;
  for (const auto& s : reg.spins)
    detunings.push_back(s.rf_enabled ? s.rf_detuning() : 0.0);
  m.h_nuclear = build_detuned_effective(reg, detunings,
                                        m.zz_sign * m.p * m.g_e_prime,
                                        target1, target2);

  const HilbertLayout nlay = reg.nuclear_layout();
  const cplx pole(om, -0.5 * m.gamma_r);
  Mat ln = Mat::Zero(nlay.total_dim(), nlay.total_dim());
  for (int k = 0; k < reg.nuclear_count(); ++k) {
    const cplx coef = std::sqrt(m.p * m.gamma_r) * reg.spins[k].a_par / pole;
    ln += coef * embed(spin_half_z(), k, nlay);
  }
  m.l_nuclear = ln;
  return m;
}

SensitivityEstimate sensitivity_estimate(const EffectiveModel& model,
                                         double a_par_target, double t1rho) {
  SensitivityEstimate s;
  s.coupling_form = model.p * model.g_e_prime * std::sqrt(model.gamma_n);
  s.proxy_form = (a_par_target / 4.0) / std::sqrt(t1rho);
  s.ratio = s.coupling_form / s.proxy_form;
  return s;
}

}  // namespace nvsim
