#pragma once

// Time-dependent Hamiltonians of the driven Rydberg chain: one laser term per
// DriveTerm, nearest-neighbor Rydberg interaction, and the second rotating
// frame that absorbs the interaction shift of doubly excited pairs.

#include <functional>
#include <vector>

#include "rydsim/tensor.hpp"

namespace rydsim {

enum class DriveRole { primary, dressing };

// Piecewise-constant sign of a detuning over time. `flips` are sorted
// breakpoints; the sign starts at `initial` and toggles at each breakpoint.
struct SignSchedule {
  double initial = 1.0;
  std::vector<double> flips;

  double sign(double t) const {
    double s = initial;
    for (double f : flips) {
      if (t < f) break;
      s = -s;
    }
    return s;
  }

  // ∫_0^t sign(s) ds
  double integral(double t) const {
    double acc = 0.0, prev = 0.0, s = initial;
    for (double f : flips) {
      if (t < f) break;
      acc += s * (f - prev);
      prev = f;
      s = -s;
    }
    return acc + s * (t - prev);
  }

  bool trivial() const { return flips.empty() && initial == 1.0; }
};

// One laser term: site, coupled ground level, complex envelope, constant
// detuning magnitude with optional sign schedule, and the sign of the
// rotating-frame phase e^{±iΔt}.
struct DriveTerm {
  int site = 0;
  Level transition = Level::g0;  // ground level coupled to |r>
  std::function<Complex(double)> envelope;
  double detuning = 0.0;  // magnitude, rad/s
  int frame_sign = +1;    // +1: e^{+iΔt} (red), -1: e^{-iΔt} (blue)
  DriveRole role = DriveRole::primary;
  SignSchedule detuning_sign{};

  // Accumulated detuning phase frame_sign * Δ * ∫ sign dt.
  double phase(double t) const {
    return frame_sign * detuning *
           (detuning_sign.trivial() ? t : detuning_sign.integral(t));
  }
  double signed_detuning(double t) const {
    return detuning * detuning_sign.sign(t);
  }
};

struct InteractionSpec {
  double V = 0.0;  // rad/s, nearest-neighbor chain
};

struct LabHamiltonian {
  std::vector<DriveTerm> drives;
  InteractionSpec interaction;
  int n_atoms = 2;
};

// H(t) = Σ_j Ω_j(t) e^{i φ_j(t)} |r><n|_site + H.c. + V Σ_k |rr><rr|_{k,k+1}
Operator hamiltonian_at(const LabHamiltonian& h, double t);

// Same Hamiltonian in the frame of exp(-iVt Σ|rr><rr|): matrix elements gain
// e^{iVt m} with m the change in the number of interacting rr pairs.
Operator second_rotated_at(const LabHamiltonian& h, double t);

// Identifies one stage of the protocol: step k (1-based), stage 1 or 2, with
// the stage's detuning magnitudes and synthesized drive envelopes.
struct StageParams {
  int n_atoms = 2;
  int step_k = 1;
  int stage = 1;
  double t_start = 0.0;
  double t_end = 0.0;
  double V = 0.0;
  double delta1 = 0.0;  // primary detuning on the left atom of the pair
  double delta2 = 0.0;  // primary detuning on the right atom; delta2 = delta1 + V
  double delta_d = 0.0;  // dressing detuning magnitude
  std::function<double(double)> omega_primary;   // Ω^{(1)}(t) = Ω^{(2)}(t), real
  std::function<double(double)> omega_dressing;  // Ω^{(d)}(t), real
  SignSchedule dressing_sign{};
};

// Drive configuration for a stage: Bell stage 1 drives g0<->r on both atoms of
// the pair plus dressing on the left one; Bell stage 2 the g1<->r analog;
// steps k>1 drive g1<->r on atom k while atom k+1 is driven on g0<->r
// (stage 1) or g1<->r (stage 2).
LabHamiltonian stage_hamiltonian(const StageParams& stage);

// (left, right) sites of the driven pair, 0-based.
inline std::pair<int, int> stage_sites(const StageParams& s) {
  return {s.step_k - 1, s.step_k};
}

// Ground levels (left, right) addressed by the stage's drives.
std::pair<Level, Level> stage_ground_levels(const StageParams& s);

}  // namespace rydsim
