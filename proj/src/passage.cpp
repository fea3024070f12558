#include "rydsim/passage.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace rydsim {

ThetaSchedule theta_schedule(int protocol_step, int stage, double T) {
  if (protocol_step < 1) throw std::invalid_argument("theta_schedule: step");
  if (stage != 1 && stage != 2) throw std::invalid_argument("theta_schedule: stage");
  if (T <= 0.0) throw std::invalid_argument("theta_schedule: T");
  ThetaSchedule s;
  s.t0 = 2.0 * (protocol_step - 1) * T + (stage == 2 ? T : 0.0);
  s.t1 = s.t0 + T;
  if (protocol_step == 1 && stage == 1) {
    // Bell stage 1 stops at the balanced superposition theta = pi/4.
    s.theta0 = 0.0;
    s.rate = M_PI / (4.0 * T);
  } else {
    s.theta0 = (stage == 1) ? 0.0 : M_PI_2;
    s.rate = M_PI / (2.0 * T);
  }
  return s;
}

PassageParams derive_alpha_f(const ThetaSchedule& theta, double lambda) {
  return PassageParams{theta, lambda};
}

SynthesizedControls synthesize_effective(const PassageParams& p) {
  return SynthesizedControls{p};
}

PhysicalEnvelopes synthesize_physical(const SynthesizedControls& s,
                                      const StageDetunings& d) {
  if (!(d.delta1 > 0.0 && d.delta2 > d.delta1))
    throw std::invalid_argument("synthesize_physical: need 0 < delta1 < delta2");
  const double geom = d.delta1 * d.delta2 / (d.delta2 - d.delta1);

  PhysicalEnvelopes env;
  env.omega_primary = [s, geom](double t) {
    return std::sqrt(std::abs(s.omega_eff(t)) * geom);
  };

  // The dressing detuning sign tracks sign(delta_r); delta_r changes sign only
  // where cos(2 theta) = 0, i.e. theta in {pi/4, 3pi/4} within a stage.
  const ThetaSchedule& th = s.params.theta;
  const double theta_end = th.theta(th.t1);
  const double lo = std::min(th.theta0, theta_end);
  const double hi = std::max(th.theta0, theta_end);
  SignSchedule sgn;
  const double c0 = std::cos(2.0 * th.theta0);
  sgn.initial = (s.params.lambda * th.rate * c0 >= 0.0) ? 1.0 : -1.0;
  for (double crossing : {M_PI / 4.0, 3.0 * M_PI / 4.0}) {
    if (lo < crossing && crossing < hi)
      sgn.flips.push_back(th.t0 + (crossing - th.theta0) / th.rate);
  }

  const bool need_negative =
      s.params.lambda != 0.0 &&
      (sgn.initial < 0.0 || !sgn.flips.empty());
  if (need_negative && d.delta_d <= d.V)
    throw std::invalid_argument(
        "synthesize_physical: delta_d must exceed V to reach delta_r < 0");

  // A single dressing field cannot realize delta_g = -delta_r exactly: it
  // shifts the ground pair by -Omega_d^2/delta_d and |rr> by
  // Omega_d^2/(delta_d + V). Only the traceless part of the pair detuning is
  // dynamically meaningful, so Omega_d is chosen to make
  // (delta_r_real - delta_g_real)/2 equal the designed delta_r.
  env.omega_dressing = [s, sgn, dd = d.delta_d, V = d.V](double t) {
    const double dr = s.delta_r(t);
    const double sd = sgn.sign(t) * dd;
    return std::sqrt(std::abs(2.0 * dr * sd * (sd + V) / (2.0 * sd + V)));
  };
  env.dressing_sign = sgn;
  return env;
}

Vector2c passage_state(const PassageParams& p, int which, double t) {
  const double th = p.theta.theta(t);
  const Complex ep = std::exp(kI * (0.5 * p.alpha(t)));
  const Complex em = std::conj(ep);
  Vector2c v;
  if (which == 1)
    v << std::cos(th) * ep, -std::sin(th) * em;
  else if (which == 2)
    v << std::sin(th) * ep, std::cos(th) * em;
  else
    throw std::invalid_argument("passage_state: which must be 1 or 2");
  return v;
}

namespace {

Vector2c passage_state_dot(const PassageParams& p, int which, double t) {
  const double th = p.theta.theta(t);
  const double td = p.theta.theta_dot(t);
  const double ad2 = 0.5 * p.alpha_dot(t);
  const Complex ep = std::exp(kI * (0.5 * p.alpha(t)));
  const Complex em = std::conj(ep);
  Vector2c v;
  if (which == 1)
    v << (-td * std::sin(th) + kI * ad2 * std::cos(th)) * ep,
        (-td * std::cos(th) + kI * ad2 * std::sin(th)) * em;
  else
    v << (td * std::cos(th) + kI * ad2 * std::sin(th)) * ep,
        (-td * std::sin(th) - kI * ad2 * std::cos(th)) * em;
  return v;
}

// G_kk - D_kk, the integrand of the accumulated passage phase f_k.
double phase_rate(const PassageParams& p,
                  const std::function<Matrix2c(double)>& h_eff, int which,
                  double t) {
  const Vector2c mu = passage_state(p, which, t);
  const Vector2c dmu = passage_state_dot(p, which, t);
  const double g = (kI * mu.dot(dmu)).real();  // dot() conjugates the lhs
  const double d = mu.dot(h_eff(t) * mu).real();
  return g - d;
}

// Keeps quadrature nodes inside the half-open stage window.
double clamp_inside(double t, double t0, double t1) {
  if (t >= t1) return std::nexttoward(t1, t0);
  if (t < t0) return t0;
  return t;
}

}  // namespace

double von_neumann_residual(const std::function<Matrix2c(double)>& h_eff,
                            const PassageParams& p, int grid) {
  const double t0 = p.theta.t0, t1 = p.theta.t1;
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = t0 + (i + 0.5) * (t1 - t0) / grid;
    const Vector2c mu = passage_state(p, 1, t);
    const Vector2c dmu = passage_state_dot(p, 1, t);
    const Matrix2c pi = mu * mu.adjoint();
    const Matrix2c pidot = dmu * mu.adjoint() + mu * dmu.adjoint();
    const Matrix2c r = pidot + kI * commutator(Matrix2c(h_eff(t)), pi);
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(r, Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

Matrix2c transitionless_propagator(const PassageParams& p,
                                   const std::function<Matrix2c(double)>& h_eff,
                                   double t, int quad_points) {
  const double t0 = p.theta.t0;
  if (quad_points < 2) quad_points = 2;
  if (quad_points % 2) ++quad_points;
  const double dt = (t - t0) / quad_points;
  double f[2];
  for (int k = 0; k < 2; ++k) {
    double acc = 0.0;
    for (int i = 0; i <= quad_points; ++i) {
      const double ti = clamp_inside(t0 + i * dt, t0, p.theta.t1);
      const double w =
          (i == 0 || i == quad_points) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * phase_rate(p, h_eff, k + 1, ti);
    }
    f[k] = acc * dt / 3.0;
  }
  Matrix2c u = Matrix2c::Zero();
  for (int k = 0; k < 2; ++k)
    u += std::exp(kI * f[k]) * passage_state(p, k + 1, t) *
         passage_state(p, k + 1, t0).adjoint();
  return u;
}

double correction_diagnostic(const PassageParams& p,
                             const std::function<Matrix2c(double)>& h_err,
                             double eps,
                             const std::function<Matrix2c(double)>& h_eff,
                             int quad_points) {
  const double t0 = p.theta.t0, t1 = p.theta.t1;
  if (quad_points < 4) quad_points = 4;
  if (quad_points % 2) ++quad_points;
  const int n = quad_points;
  const double dt = (t1 - t0) / n;

  // Cumulative phases f_1, f_2 on the node grid (Simpson over node pairs).
  std::vector<double> g1(n + 1), g2(n + 1), f1(n + 1), f2(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double ti = clamp_inside(t0 + i * dt, t0, t1);
    g1[i] = phase_rate(p, h_eff, 1, ti);
    g2[i] = phase_rate(p, h_eff, 2, ti);
  }
  auto cumulate = [&](const std::vector<double>& g, std::vector<double>& f) {
    f[0] = 0.0;
    for (int i = 0; i + 2 <= n; i += 2) {
      f[i + 1] = f[i] + dt / 12.0 * (5.0 * g[i] + 8.0 * g[i + 1] - g[i + 2]);
      f[i + 2] = f[i] + dt / 3.0 * (g[i] + 4.0 * g[i + 1] + g[i + 2]);
    }
  };
  cumulate(g1, f1);
  cumulate(g2, f2);

  Complex integral{};
  for (int i = 0; i <= n; ++i) {
    const double ti = clamp_inside(t0 + i * dt, t0, t1);
    const Complex d12 =
        passage_state(p, 1, ti).dot(h_err(ti) * passage_state(p, 2, ti));
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    integral += w * d12 * std::exp(-kI * (f1[i] - f2[i]));
  }
  integral *= dt / 3.0;
  return eps * eps * std::norm(integral);
}

std::vector<ControlSample> sample_controls(const SynthesizedControls& s,
                                           const PhysicalEnvelopes& env,
                                           int points) {
  const double t0 = s.params.theta.t0, t1 = s.params.theta.t1;
  std::vector<ControlSample> rows;
  rows.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double t = clamp_inside(t0 + i * (t1 - t0) / (points - 1), t0, t1);
    ControlSample r;
    r.t = t;
    r.theta = s.params.theta.theta(t);
    r.alpha = s.params.alpha(t);
    r.f = s.params.f(t);
    r.delta_r = s.delta_r(t);
    r.omega_eff = s.omega_eff(t);
    r.omega_primary = env.omega_primary ? env.omega_primary(t) : 0.0;
    r.omega_dressing = env.omega_dressing ? env.omega_dressing(t) : 0.0;
    r.dressing_sign = env.dressing_sign.sign(t);
    rows.push_back(r);
  }
  return rows;
}

void write_controls_csv(const std::vector<ControlSample>& rows,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_controls_csv: cannot open " + path);
  out << "t,theta,alpha,f,delta_r,omega_eff,omega_primary,omega_dressing,"
         "dressing_sign\n";
  out.precision(12);
  for (const ControlSample& r : rows)
    out << r.t << ',' << r.theta << ',' << r.alpha << ',' << r.f << ','
        << r.delta_r << ',' << r.omega_eff << ',' << r.omega_primary << ','
        << r.omega_dressing << ',' << r.dressing_sign << '\n';
}

}  // namespace rydsim
