#include "nvsim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace nvsim {

double NuclearSpinSpec::rf_detuning() const {
  if (tuning == RfTuning::resonant) return 0.0;
  return resonance() - rf_freq;
}

void NuclearSpinSpec::validate(int index) const {
  const std::string who = "spin " + std::to_string(index + 1);
  if (a_perp < 0.0)
    throw std::invalid_argument(who + ": a_perp must be >= 0");
  if (rf_rabi < 0.0)
    throw std::invalid_argument(who + ": rf_rabi must be >= 0");
  if (rf_enabled && tuning == RfTuning::resonant) {
    // a resonant drive must sit at larmor + a_par/2; rf_freq == 0 means
    // "derive it", anything else has to match
    if (rf_freq != 0.0 &&
        std::abs(rf_freq - resonance()) > 1e-9 * std::abs(resonance()))
      throw std::invalid_argument(who +
                                  ": rf_freq conflicts with resonant tuning");
  }
}

double DissipationSpec::gamma_r() const {
  if (!t_reset) return gamma_e();
  return 1.0 / t1rho + 1.0 / *t_reset;
}

void DissipationSpec::validate() const {
  if (t1rho <= 0.0)
    throw std::invalid_argument("dissipation: t1rho must be positive");
  if (t_reset) {
    if (*t_reset <= 0.0)
      throw std::invalid_argument("dissipation: t_reset must be positive");
    if (*t_reset >= 10.0 * t1rho)
      throw std::invalid_argument("dissipation: t_reset must be < 10*t1rho");
  }
}

HilbertLayout SpinRegister::layout() const {
  std::vector<Subsystem> subs{{"e", 2}};
  for (const auto& s : spins) subs.push_back({s.label, 2});
  return HilbertLayout(subs);
}

HilbertLayout SpinRegister::nuclear_layout() const {
  if (spins.empty())
    throw std::invalid_argument("register has no nuclear spins");
  std::vector<Subsystem> subs;
  for (const auto& s : spins) subs.push_back({s.label, 2});
  return HilbertLayout(subs);
}

HilbertLayout SpinRegister::lab_layout() const {
  std::vector<Subsystem> subs{{"e", 3}};
  for (const auto& s : spins) subs.push_back({s.label, 2});
  return HilbertLayout(subs);
}

void SpinRegister::validate() const {
  if (drive.mw_rabi <= 0.0)
    throw std::invalid_argument("drive: mw_rabi must be positive");
  for (int i = 0; i < nuclear_count(); ++i) spins[i].validate(i);
}

RegimeReport validity_regime(const SpinRegister& reg) {
  RegimeReport rep;
  for (const auto& s : reg.spins) {
    rep.apar_over_rabi =
        std::max(rep.apar_over_rabi, std::abs(s.a_par) / reg.drive.mw_rabi);
    if (s.rf_enabled) {
      const double w = s.tuning == RfTuning::resonant ? s.resonance() : s.rf_freq;
      if (w > 0.0)
        rep.rabi_over_rf = std::max(rep.rabi_over_rf, reg.drive.mw_rabi / w);
    }
  }
  return rep;
}

namespace {

// electron term Omega(1+eps) sz - delta_mw sx on the given layout (slot 0)
Mat electron_drive_term(const SpinRegister& reg, const HilbertLayout& lay) {
  const double om = reg.drive.mw_rabi * (1.0 + reg.drive.mw_rabi_error);
  Mat h = om * embed(spin_half_z(), 0, lay);
  if (reg.drive.mw_detuning != 0.0)
    h -= reg.drive.mw_detuning * embed(spin_half_x(), 0, lay);
  return h;
}

}  // namespace

Mat build_rwa_hamiltonian(const SpinRegister& reg) {
  if (reg.spins.empty())
    throw std::invalid_argument("build_rwa_hamiltonian: empty register");
  reg.validate();
  const HilbertLayout lay = reg.layout();
  Mat h = electron_drive_term(reg, lay);
  const Mat sxe = embed(spin_half_x(), 0, lay);
  for (int i = 0; i < reg.nuclear_count(); ++i) {
    const auto& s = reg.spins[i];
    const int slot = i + 1;
    if (s.rf_enabled && s.rf_rabi != 0.0)
      h += s.rf_rabi * embed(spin_half_x(), slot, lay);
    const double det = s.rf_enabled ? s.rf_detuning() : 0.0;
    if (det != 0.0) h += det * embed(spin_half_z(), slot, lay);
    if (s.a_par != 0.0) h += s.a_par * (sxe * embed(spin_half_z(), slot, lay));
  }
  return h;
}

Mat build_rf_frame_hamiltonian(const SpinRegister& reg, double t) {
  if (t < 0.0)
    throw std::invalid_argument("build_rf_frame_hamiltonian: t must be >= 0");
  if (reg.spins.empty())
    throw std::invalid_argument("build_rf_frame_hamiltonian: empty register");
  const HilbertLayout lay = reg.layout();
  Mat h = electron_drive_term(reg, lay);
  const Mat sxe = embed(spin_half_x(), 0, lay);
  for (int i = 0; i < reg.nuclear_count(); ++i) {
    const auto& s = reg.spins[i];
    const int slot = i + 1;
    h += s.resonance() * embed(spin_half_z(), slot, lay);
    if (s.a_par != 0.0) h += s.a_par * (sxe * embed(spin_half_z(), slot, lay));
    if (s.a_perp != 0.0)
      h += s.a_perp * (sxe * embed(spin_half_x(), slot, lay));
    if (s.rf_enabled && s.rf_rabi != 0.0) {
      const double w = s.tuning == RfTuning::resonant ? s.resonance() : s.rf_freq;
      h += 2.0 * s.rf_rabi * std::cos(w * t) * embed(spin_half_x(), slot, lay);
    }
  }
  return h;
}

Mat build_lab_hamiltonian(const SpinRegister& reg, double t, double scale) {
  if (scale <= 0.0 || scale > 1.0)
    throw std::invalid_argument("build_lab_hamiltonian: scale must be in (0,1]");
  const HilbertLayout lay = reg.lab_layout();
  const double d_sc = reg.drive.zero_field_d * scale;
  const double gb_sc = reg.drive.electron_zeeman * scale;
  const double w_mw = d_sc - gb_sc - reg.drive.mw_detuning;
  const Mat sz1 = spin_one_z();
  Mat h = d_sc * embed(sz1 * sz1, 0, lay) + gb_sc * embed(sz1, 0, lay);
  const double om = reg.drive.mw_rabi * (1.0 + reg.drive.mw_rabi_error);
  h += std::sqrt(2.0) * om * std::cos(w_mw * t) * embed(spin_one_x(), 0, lay);
  const Mat sze = embed(sz1, 0, lay);
  for (int i = 0; i < reg.nuclear_count(); ++i) {
    const auto& s = reg.spins[i];
    const int slot = i + 1;
    if (s.larmor != 0.0) h += s.larmor * embed(spin_half_z(), slot, lay);
    if (s.a_par != 0.0) h += s.a_par * (sze * embed(spin_half_z(), slot, lay));
    if (s.a_perp != 0.0)
      h += s.a_perp * (sze * embed(spin_half_x(), slot, lay));
    if (s.rf_enabled && s.rf_rabi != 0.0) {
      const double w = s.tuning == RfTuning::resonant ? s.resonance() : s.rf_freq;
      h += 2.0 * s.rf_rabi * std::cos(w * t) * embed(spin_half_x(), slot, lay);
    }
  }
  return h;
}

Mat build_detuned_effective(const SpinRegister& reg,
                            const std::vector<double>& rf_detunings,
                            double zz_coupling, int target1, int target2) {
  const HilbertLayout lay = reg.nuclear_layout();
  if (rf_detunings.size() != reg.spins.size())
    throw std::invalid_argument(
        "build_detuned_effective: one detuning per nuclear spin required");
  if (target1 == target2 || target1 < 0 || target2 < 0 ||
      target1 >= reg.nuclear_count() || target2 >= reg.nuclear_count())
    throw std::invalid_argument("build_detuned_effective: bad target pair");
  Mat h = Mat::Zero(lay.total_dim(), lay.total_dim());
  for (int i = 0; i < reg.nuclear_count(); ++i) {
    const auto& s = reg.spins[i];
    if (s.rf_enabled && s.rf_rabi != 0.0)
      h += s.rf_rabi * embed(spin_half_x(), i, lay);
    if (rf_detunings[i] != 0.0)
      h += rf_detunings[i] * embed(spin_half_z(), i, lay);
  }
  h += zz_coupling * (embed(spin_half_z(), target1, lay) *
                      embed(spin_half_z(), target2, lay));
  return h;
}

std::vector<Mat> build_dissipators(const SpinRegister& reg,
                                   const DissipationSpec& dspec,
                                   ElectronChannel channel) {
  dspec.validate();
  const HilbertLayout lay = reg.layout();
  std::vector<Mat> jumps;
  const Mat down = ket_minus() * ket_plus().adjoint();
  const Mat up = ket_plus() * ket_minus().adjoint();
  if (channel == ElectronChannel::depolarizing) {
    const double r = dspec.gamma_e() / 2.0;
    jumps.push_back(std::sqrt(r) * embed(down, 0, lay));
    jumps.push_back(std::sqrt(r) * embed(up, 0, lay));
  } else {
    jumps.push_back(std::sqrt(dspec.gamma_r()) * embed(down, 0, lay));
  }
  for (size_t i = 0; i < dspec.target_t2.size() && i < reg.spins.size(); ++i) {
    if (!dspec.target_t2[i]) continue;
    const double t2 = *dspec.target_t2[i];
    if (t2 <= 0.0)
      throw std::invalid_argument("dissipation: target T2 must be positive");
    jumps.push_back(std::sqrt(2.0 / t2) *
                    embed(spin_half_z(), static_cast<int>(i) + 1, lay));
  }
  return jumps;
}

}  // namespace nvsim
