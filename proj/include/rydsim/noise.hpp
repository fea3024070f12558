#pragma once

// Environmental noise channels and systematic-error Hamiltonians: decay and
// dephasing rates, drive-amplitude and phase deviations, and the interaction
// fluctuation induced by atomic distance jitter.

#include "rydsim/drive.hpp"
#include "rydsim/effective.hpp"
#include "rydsim/tensor.hpp"

namespace rydsim {

struct NoiseParams {
  double kappa0 = 0.0;   // |r> -> |0> decay rate, rad/s
  double kappa1 = 0.0;   // |r> -> |1> decay rate, rad/s
  double kappa_z = 0.0;  // dephasing rate, rad/s

  // kappa0 = kappa1 = kappa, kappa_z = 0.1 kappa.
  static NoiseParams from_kappa(double kappa) {
    return {kappa, kappa, 0.1 * kappa};
  }
};

enum class ErrorKind { none, global, local, interaction, phase, combined };

struct VdwGeometry {
  double c6 = 0.0;  // rad/s * um^6
  double d = 0.0;   // um
};

struct ErrorSpec {
  ErrorKind kind = ErrorKind::none;
  double epsilon = 0.0;    // dimensionless drive deviation
  double delta_d = 0.0;    // distance fluctuation, um (with geometry set)
  double delta_phi = 0.0;  // laser phase offset, rad
  VdwGeometry geometry{};  // for delta_d -> delta_V conversion
  double delta_v = 0.0;    // direct interaction shift, rad/s (no geometry)

  // The |rr> energy shift: exact sixth-power difference when a geometry is
  // given, otherwise the directly specified shift.
  double interaction_shift() const;
};

// V = c6 / d^6
double vdw_interaction(const VdwGeometry& g);

// delta_V = c6/(d + delta_d)^6 - c6/d^6, exact and signed.
double interaction_fluctuation(const VdwGeometry& g, double delta_d);

// The perturbation H_e(t) in the frame of hamiltonian_at:
//   global      eps * (all drive terms)
//   local       eps * (drive terms on the left atom, dressing included)
//   interaction delta_V * sum_k |rr><rr|_{k,k+1}
//   phase       (e^{i d_phi} - 1) * (left-atom primary drive term)
//   combined    eps * (all drive terms) + delta_V * sum_k |rr><rr|_{k,k+1}
Operator error_hamiltonian(const ErrorSpec& spec, const LabHamiltonian& h,
                           double t);

// Closed-form consequence for the eliminated pair: global scales all three
// effective terms by (1+eps)^2; local (and phase) scale the shifts by
// (1+eps)^2 but the coupling by (1+eps); interaction shifts delta_r by
// delta_V; combined scales everything by (1+eps) and shifts delta_r.
EffectiveTwoLevel perturbed_effective(const ErrorSpec& spec,
                                      const EffectiveTwoLevel& e);

struct LindbladChannel {
  double rate = 0.0;  // the kappa/2 prefactor of the dissipator
  Operator op;
};

// Per atom j: (kappa0/2, |0>_j<r|), (kappa1/2, |1>_j<r|), (kappa_z/2, sigma_j^z)
// with sigma^z = |0><0| + |1><1| - |r><r|. Zero-rate channels are dropped.
std::vector<LindbladChannel> collapse_operators(const NoiseParams& noise,
                                                int n_atoms);

}  // namespace rydsim
