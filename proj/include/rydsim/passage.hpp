#pragma once

// Nonadiabatic passage synthesis: a piecewise-linear mixing-angle schedule and
// a correction gain are turned into consistent effective controls
// (delta_r, omega_eff) and physical drive envelopes, with diagnostics for the
// transitionless condition and the error-correction criterion.

#include <functional>

#include "rydsim/drive.hpp"
#include "rydsim/tensor.hpp"

namespace rydsim {

using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

// theta(t) = theta0 + rate * (t - t0) on [t0, t1); constant theta0 before,
// zero after the protocol end (fields off).
struct ThetaSchedule {
  double t0 = 0.0;
  double t1 = 0.0;
  double theta0 = 0.0;
  double rate = 0.0;

  double theta(double t) const {
    if (t < t0) return theta0;
    if (t >= t1) return theta0 + rate * (t1 - t0);
    return theta0 + rate * (t - t0);
  }
  double theta_dot(double t) const { return (t >= t0 && t < t1) ? rate : 0.0; }
};

// Mixing-angle schedule for one stage of the protocol. The Bell step ramps
// theta to pi/4 in stage 1 and from pi/2 to pi in stage 2; later steps ramp
// linearly from 0 to pi across both stages.
ThetaSchedule theta_schedule(int protocol_step, int stage, double T);

// The passage parameterization: theta plus the derived relative phase alpha
// and global phase f, with f_dot = lambda * theta_dot and
// cot(alpha) = -lambda * sin(2 theta) on the branch (0, pi).
struct PassageParams {
  ThetaSchedule theta;
  double lambda = 0.0;

  double f(double t) const { return lambda * (theta.theta(t) - theta.theta0); }
  double f_dot(double t) const { return lambda * theta.theta_dot(t); }
  double alpha(double t) const {
    return M_PI_2 + std::atan(lambda * std::sin(2.0 * theta.theta(t)));
  }
  double alpha_dot(double t) const {
    const double s = std::sin(2.0 * theta.theta(t));
    const double c = std::cos(2.0 * theta.theta(t));
    return 2.0 * lambda * theta.theta_dot(t) * c / (1.0 + lambda * lambda * s * s);
  }
};

PassageParams derive_alpha_f(const ThetaSchedule& theta, double lambda);

// Effective controls realizing the passage: omega_eff <= 0 by branch choice.
struct SynthesizedControls {
  PassageParams params;

  double omega_eff(double t) const {
    const double s = std::sin(2.0 * params.theta.theta(t));
    const double td = params.theta.theta_dot(t);
    const double fd = params.f_dot(t);
    return -std::sqrt(td * td + fd * fd * s * s);
  }
  double delta_r(double t) const {
    return params.f_dot(t) * std::cos(2.0 * params.theta.theta(t)) +
           0.5 * params.alpha_dot(t);
  }
};

SynthesizedControls synthesize_effective(const PassageParams& p);

// Stage detuning magnitudes for mapping effective controls onto lasers.
struct StageDetunings {
  double delta1 = 0.0;
  double delta2 = 0.0;  // = delta1 + V
  double delta_d = 0.0;
  double V = 0.0;
};

struct PhysicalEnvelopes {
  std::function<double(double)> omega_primary;
  std::function<double(double)> omega_dressing;
  SignSchedule dressing_sign;
};

// Inverts the effective-control map: the primary Rabi envelope realizes
// omega_eff through the two-photon coupling, the dressing envelope realizes
// delta_r through its light shift. Negative delta_r is realized by flipping
// the dressing detuning sign at the zero crossings of delta_r.
PhysicalEnvelopes synthesize_physical(const SynthesizedControls& s,
                                      const StageDetunings& d);

// Passage basis states in the two-dimensional bright subspace {|g>, |rr>}.
Vector2c passage_state(const PassageParams& p, int which, double t);

// max over a grid of || dPi_1/dt + i [H_eff, Pi_1] || (spectral norm),
// Pi_1 = |mu_1><mu_1|.
double von_neumann_residual(const std::function<Matrix2c(double)>& h_eff,
                            const PassageParams& p, int grid = 400);

// U_0(t) = sum_k exp(i f_k) |mu_k(t)><mu_k(t0)| with the accumulated phases
// f_k = integral of (G_kk - D_kk); unitary on the pair subspace.
Matrix2c transitionless_propagator(const PassageParams& p,
                                   const std::function<Matrix2c(double)>& h_eff,
                                   double t, int quad_points = 2000);

// Leading-order infidelity estimate under a perturbation eps * h_err:
// eps^2 * |∫ <mu_1|h_err|mu_2> e^{-i(f_1 - f_2)} dt|^2.
double correction_diagnostic(const PassageParams& p,
                             const std::function<Matrix2c(double)>& h_err,
                             double eps,
                             const std::function<Matrix2c(double)>& h_eff,
                             int quad_points = 4000);

// Sampled controls row for CSV export.
struct ControlSample {
  double t, theta, alpha, f, delta_r, omega_eff, omega_primary, omega_dressing,
      dressing_sign;
};

std::vector<ControlSample> sample_controls(const SynthesizedControls& s,
                                           const PhysicalEnvelopes& env,
                                           int points);

void write_controls_csv(const std::vector<ControlSample>& rows,
                        const std::string& path);

}  // namespace rydsim
