#include "rydsim/drive.hpp"

namespace rydsim {

namespace {

int rr_pair_count(long index, int n_atoms) {
  BasisLabel lb = BasisLabel::from_index(index, n_atoms);
  int count = 0;
  for (int k = 0; k + 1 < n_atoms; ++k)
    if (lb.atoms[k] == Level::ryd && lb.atoms[k + 1] == Level::ryd) ++count;
  return count;
}

}  // namespace

Operator hamiltonian_at(const LabHamiltonian& h, double t) {
  const long dim = dim_for(h.n_atoms);
  Operator H(dim, dim);
  for (const DriveTerm& d : h.drives) {
    const Complex amp =
        d.envelope(t) * std::exp(kI * d.phase(t));
    if (amp == Complex{}) continue;
    Operator A = embed_single(d.site, Level::ryd, d.transition, h.n_atoms);
    H += amp * A;
    H += std::conj(amp) * Operator(A.adjoint());
  }
  for (int k = 0; k + 1 < h.n_atoms; ++k)
    H += h.interaction.V * rr_projector(k, k + 1, h.n_atoms);
  return H;
}

Operator second_rotated_at(const LabHamiltonian& h, double t) {
  const long dim = dim_for(h.n_atoms);
  const double V = h.interaction.V;
  Operator H(dim, dim);
  for (const DriveTerm& d : h.drives) {
    const Complex amp = d.envelope(t) * std::exp(kI * d.phase(t));
    if (amp == Complex{}) continue;
    Operator A = embed_single(d.site, Level::ryd, d.transition, h.n_atoms);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (int k = 0; k < A.outerSize(); ++k) {
      for (Operator::InnerIterator it(A, k); it; ++it) {
        const int m = rr_pair_count(it.row(), h.n_atoms) -
                      rr_pair_count(it.col(), h.n_atoms);
        const Complex v =
            amp * it.value() * std::exp(kI * (V * t * static_cast<double>(m)));
        trips.emplace_back(it.row(), it.col(), v);
      }
    }
    Operator Arot(dim, dim);
    Arot.setFromTriplets(trips.begin(), trips.end());
    H += Arot;
    H += Operator(Arot.adjoint());
  }
  return H;
}

std::pair<Level, Level> stage_ground_levels(const StageParams& s) {
  if (s.stage != 1 && s.stage != 2)
    throw std::invalid_argument("stage_ground_levels: stage must be 1 or 2");
  // Left atom: g0 for Bell stage 1, g1 everywhere else.
  const Level left_level =
      (s.step_k == 1 && s.stage == 1) ? Level::g0 : Level::g1;
  // Right atom: g0 in stage 1, g1 in stage 2.
  const Level right_level = (s.stage == 1) ? Level::g0 : Level::g1;
  return {left_level, right_level};
}

LabHamiltonian stage_hamiltonian(const StageParams& s) {
  if (s.stage != 1 && s.stage != 2)
    throw std::invalid_argument("stage_hamiltonian: stage must be 1 or 2");
  if (s.step_k < 1 || s.step_k > s.n_atoms - 1)
    throw std::invalid_argument("stage_hamiltonian: invalid step");
  const auto [left, right] = stage_sites(s);
  const auto [left_level, right_level] = stage_ground_levels(s);

  auto off_outside = [t0 = s.t_start, t1 = s.t_end](
                         std::function<double(double)> env) {
    return [t0, t1, env = std::move(env)](double t) -> Complex {
      if (t < t0 || t >= t1 || !env) return {};
      return env(t);
    };
  };

  LabHamiltonian h;
  h.n_atoms = s.n_atoms;
  h.interaction.V = s.V;

  DriveTerm primary_left;
  primary_left.site = left;
  primary_left.transition = left_level;
  primary_left.envelope = off_outside(s.omega_primary);
  primary_left.detuning = s.delta1;
  primary_left.frame_sign = +1;
  primary_left.role = DriveRole::primary;
  h.drives.push_back(primary_left);

  DriveTerm primary_right;
  primary_right.site = right;
  primary_right.transition = right_level;
  primary_right.envelope = off_outside(s.omega_primary);
  primary_right.detuning = s.delta2;
  primary_right.frame_sign = -1;
  primary_right.role = DriveRole::primary;
  h.drives.push_back(primary_right);

  if (s.omega_dressing) {
    DriveTerm dressing;
    dressing.site = left;
    dressing.transition = left_level;
    dressing.envelope = off_outside(s.omega_dressing);
    dressing.detuning = s.delta_d;
    dressing.frame_sign = +1;
    dressing.role = DriveRole::dressing;
    dressing.detuning_sign = s.dressing_sign;
    h.drives.push_back(dressing);
  }
  return h;
}

}  // namespace rydsim
