#pragma once

// Second-order effective Hamiltonians of a driven pair after adiabatic
// elimination of the singly excited states: the bright ground pattern couples
// to |rr> with a two-photon Rabi rate while the dressing field supplies
// tunable light shifts.

#include <functional>
#include <string>

#include "rydsim/drive.hpp"
#include "rydsim/tensor.hpp"

namespace rydsim {

// Two-level reduction of one driven pair: |g~> = |ground_left ground_right>
// coupled to |rr>, with time-dependent shifts and coupling.
struct EffectiveTwoLevel {
  int n_atoms = 2;
  int site_left = 0;
  int site_right = 1;
  Level ground_left = Level::g0;
  Level ground_right = Level::g0;
  std::function<double(double)> delta_r;    // shift of |rr>
  std::function<double(double)> delta_g;    // shift of |g~>
  std::function<double(double)> omega_eff;  // real coupling <rr|H|g~>
};

// Closed-form elimination of the stage's drives:
//   omega_eff = Omega1^2 (1/delta2 - 1/delta1)
//   delta_r   = Omega_d^2 / (delta_d_signed + V)
//   delta_g   = -Omega_d^2 / delta_d_signed
EffectiveTwoLevel effective_from_stage(const StageParams& s);

// H_eff embedded in the 3^N space (identity on spectator atoms).
Operator effective_hamiltonian_at(const EffectiveTwoLevel& e, double t);

// Same Hamiltonian restricted to the {|g~>, |rr>} pair subspace.
Eigen::Matrix2cd effective_two_by_two(const EffectiveTwoLevel& e, double t);

// Second-order Magnus term -(i/2) [H(t), integral_{t0}^{t} H ds] with
// composite-Simpson quadrature (n_intervals rounded up to even).
DenseOp magnus_effective(const std::function<DenseOp(double)>& h, double t0,
                         double t, int n_intervals);

// Scale audit of the adiabatic elimination over one stage.
struct LargeDetuningReport {
  double first_order_residual = 0.0;  // sum_j |Omega_j(t1) - Omega_j(t0)| / delta_j
  double neglected_scale = 0.0;       // max_j sup_t Omega_j^2 / delta_j^2
  double retained_scale = 0.0;        // sum_j \int Omega_j^2 / delta_j dt
  double ratio = 0.0;                 // max_j sup_t |Omega_j| / delta_j
  bool flagged = false;               // ratio > 0.1
};

struct DetunedEnvelope {
  std::function<double(double)> omega;
  double detuning = 0.0;
};

LargeDetuningReport validate_large_detuning(
    const std::vector<DetunedEnvelope>& drives, double t_start, double t_end,
    int samples = 400);

std::string to_json(const LargeDetuningReport& r);

}  // namespace rydsim
