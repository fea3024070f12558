#include "rydsim/effective.hpp"

#include "json.hpp"

namespace rydsim {

EffectiveTwoLevel effective_from_stage(const StageParams& s) {
  if (s.delta1 <= 0.0 || s.delta2 <= 0.0 || s.delta1 == s.delta2)
    throw std::invalid_argument("effective_from_stage: bad detunings");
  EffectiveTwoLevel e;
  e.n_atoms = s.n_atoms;
  std::tie(e.site_left, e.site_right) = stage_sites(s);
  std::tie(e.ground_left, e.ground_right) = stage_ground_levels(s);

  const double inv = 1.0 / s.delta2 - 1.0 / s.delta1;
  auto in_stage = [t0 = s.t_start, t1 = s.t_end](double t) {
    return t >= t0 && t < t1;
  };
  e.omega_eff = [op = s.omega_primary, inv, in_stage](double t) {
    if (!op || !in_stage(t)) return 0.0;
    const double o = op(t);
    return o * o * inv;
  };
  e.delta_r = [od = s.omega_dressing, sgn = s.dressing_sign, dd = s.delta_d,
               V = s.V, in_stage](double t) {
    if (!od || !in_stage(t)) return 0.0;
    const double o = od(t);
    return o * o / (sgn.sign(t) * dd + V);
  };
  e.delta_g = [od = s.omega_dressing, sgn = s.dressing_sign, dd = s.delta_d,
               in_stage](double t) {
    if (!od || !in_stage(t)) return 0.0;
    const double o = od(t);
    return -o * o / (sgn.sign(t) * dd);
  };
  return e;
}

Eigen::Matrix2cd effective_two_by_two(const EffectiveTwoLevel& e, double t) {
  const double dg = e.delta_g ? e.delta_g(t) : 0.0;
  const double dr = e.delta_r ? e.delta_r(t) : 0.0;
  const double om = e.omega_eff ? e.omega_eff(t) : 0.0;
  Eigen::Matrix2cd h;
  h << dg, om, om, dr;
  return h;
}

Operator effective_hamiltonian_at(const EffectiveTwoLevel& e, double t) {
  const Eigen::Matrix2cd h = effective_two_by_two(e, t);
  DenseOp local = DenseOp::Zero(9, 9);
  const int g = 3 * static_cast<int>(e.ground_left) +
                static_cast<int>(e.ground_right);
  local(g, g) = h(0, 0);
  local(8, 8) = h(1, 1);
  local(8, g) = h(1, 0);
  local(g, 8) = h(0, 1);
  return embed_pair(e.site_left, e.site_right, local, e.n_atoms);
}

DenseOp magnus_effective(const std::function<DenseOp(double)>& h, double t0,
                         double t, int n_intervals) {
  if (n_intervals < 2) n_intervals = 2;
  if (n_intervals % 2) ++n_intervals;
  const double dt = (t - t0) / n_intervals;
  DenseOp acc = h(t0);
  for (int i = 1; i < n_intervals; ++i)
    acc += (i % 2 ? 4.0 : 2.0) * h(t0 + i * dt);
  const DenseOp ht = h(t);
  acc += ht;
  acc *= dt / 3.0;
  return Complex{0.0, -0.5} * commutator(ht, acc);
}

LargeDetuningReport validate_large_detuning(
    const std::vector<DetunedEnvelope>& drives, double t_start, double t_end,
    int samples) {
  if (samples < 2) samples = 2;
  if (samples % 2) ++samples;
  LargeDetuningReport r;
  const double dt = (t_end - t_start) / samples;
  for (const DetunedEnvelope& d : drives) {
    if (!d.omega || d.detuning <= 0.0)
      throw std::invalid_argument("validate_large_detuning: bad drive");
    double integ = 0.0;
    for (int i = 0; i <= samples; ++i) {
      // sample just inside the half-open stage window
      const double t =
          t_start + (i == samples ? (samples - 0.001) : double(i)) * dt;
      const double o = std::abs(d.omega(t));
      r.neglected_scale =
          std::max(r.neglected_scale, o * o / (d.detuning * d.detuning));
      r.ratio = std::max(r.ratio, o / d.detuning);
      const double w = (i == 0 || i == samples) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      integ += w * o * o / d.detuning;
    }
    r.retained_scale += integ * dt / 3.0;
    r.first_order_residual +=
        std::abs(d.omega(t_start + (samples - 0.001) * dt) -
                 d.omega(t_start)) /
        d.detuning;
  }
  r.flagged = r.ratio > 0.1;
  return r;
}

std::string to_json(const LargeDetuningReport& r) {
  nlohmann::json j{{"first_order_residual", r.first_order_residual},
                   {"neglected_scale", r.neglected_scale},
                   {"retained_scale", r.retained_scale},
                   {"ratio", r.ratio},
                   {"flagged", r.flagged}};
  return j.dump();
}

}  // namespace rydsim
