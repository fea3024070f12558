#include "rydsim/ghz.hpp"

#include <sstream>

namespace rydsim {

StageProblem build_step(const ProtocolPlan& plan, int k, int stage) {
  if (plan.n_atoms < 2) throw std::invalid_argument("build_step: n_atoms < 2");
  if (k < 1 || k > plan.n_atoms - 1)
    throw std::invalid_argument("build_step: invalid step index");
  const double V = plan.interaction();
  const double delta1 = plan.delta1_over_V * V;
  const double delta2 = delta1 + V;
  const double delta_d = plan.delta_d_over_delta1 * delta1;

  StageProblem sp;
  const ThetaSchedule theta = theta_schedule(k, stage, plan.T);
  sp.controls = synthesize_effective(derive_alpha_f(theta, plan.lambda));
  PhysicalEnvelopes env =
      synthesize_physical(sp.controls, {delta1, delta2, delta_d, V});

  sp.params.n_atoms = plan.n_atoms;
  sp.params.step_k = k;
  sp.params.stage = stage;
  sp.params.t_start = theta.t0;
  sp.params.t_end = theta.t1;
  sp.params.V = V;
  sp.params.delta1 = delta1;
  sp.params.delta2 = delta2;
  sp.params.delta_d = delta_d;
  sp.params.omega_primary = env.omega_primary;
  sp.params.omega_dressing = env.omega_dressing;
  sp.params.dressing_sign = env.dressing_sign;

  sp.effective = effective_from_stage(sp.params);
  return sp;
}

StateVec TargetState::vector() const {
  StateVec v = StateVec::Zero(dim_for(n_atoms));
  v(uniform_label(Level::g0, n_atoms).index()) = 1.0 / std::sqrt(2.0);
  v(uniform_label(Level::g1, n_atoms).index()) =
      std::exp(kI * phi) / std::sqrt(2.0);
  return v;
}

double fidelity(const DenseOp& rho, int n_atoms) {
  const long i0 = uniform_label(Level::g0, n_atoms).index();
  const long i1 = uniform_label(Level::g1, n_atoms).index();
  const double p0 = rho(i0, i0).real();
  const double p1 = rho(i1, i1).real();
  return p0 * p0 + p1 * p1 + 2.0 * std::norm(rho(i0, i1));
}

double overlap_fidelity(const DenseOp& rho, const TargetState& target) {
  const StateVec t = target.vector();
  return std::real(t.dot(rho * t));
}

double aligned_overlap_fidelity(const DenseOp& rho, int n_atoms) {
  const long i0 = uniform_label(Level::g0, n_atoms).index();
  const long i1 = uniform_label(Level::g1, n_atoms).index();
  return 0.5 * (rho(i0, i0).real() + rho(i1, i1).real()) +
         std::abs(rho(i0, i1));
}

std::map<std::string, double> populations(
    const DenseOp& rho, const std::vector<BasisLabel>& labels) {
  std::map<std::string, double> out;
  for (const BasisLabel& lb : labels) {
    std::string name = "P_";
    for (Level lv : lb.atoms)
      name += (lv == Level::ryd) ? 'r' : (lv == Level::g1 ? '1' : '0');
    out[name] = std::abs(rho(lb.index(), lb.index()));
  }
  return out;
}

namespace {

// Per-kind multipliers for the effective-model terms.
struct EffectiveScales {
  double shift = 1.0;     // delta_r, delta_g
  double coupling = 1.0;  // omega_eff
};

EffectiveScales effective_scales(const ErrorSpec& e) {
  const double s1 = 1.0 + e.epsilon;
  switch (e.kind) {
    case ErrorKind::none:
    case ErrorKind::interaction:
      return {1.0, 1.0};
    case ErrorKind::global:
      return {s1 * s1, s1 * s1};
    case ErrorKind::local:
    case ErrorKind::phase:
      return {s1 * s1, s1};
    case ErrorKind::combined:
      return {s1, s1};
  }
  return {1.0, 1.0};
}

bool has_interaction_shift(const ErrorSpec& e) {
  return (e.kind == ErrorKind::interaction || e.kind == ErrorKind::combined) &&
         e.interaction_shift() != 0.0;
}

void add_full_stage(CompiledHamiltonian& ham, const StageProblem& sp,
                    const ErrorSpec& error) {
  const LabHamiltonian lab = stage_hamiltonian(sp.params);
  const int lsite = stage_sites(sp.params).first;
  for (const DriveTerm& d : lab.drives) {
    Complex factor = 1.0;
    if (error.kind == ErrorKind::global ||
        error.kind == ErrorKind::combined) {
      factor = 1.0 + error.epsilon;
    } else if (error.kind == ErrorKind::local && d.site == lsite) {
      factor = 1.0 + error.epsilon;
    } else if (error.kind == ErrorKind::phase && d.site == lsite &&
               d.role == DriveRole::primary &&
               d.transition == Level::g1) {
      factor = std::exp(kI * error.delta_phi);
    }
    Operator a =
        embed_single(d.site, Level::ryd, d.transition, sp.params.n_atoms);
    ham.add(
        [d, factor](double t) -> Complex {
          const Complex env = d.envelope(t);
          if (env == Complex{}) return {};
          return factor * env * std::exp(kI * d.phase(t));
        },
        a, true);
  }
}

void add_effective_stage(CompiledHamiltonian& ham, const StageProblem& sp,
                         const EffectiveScales& sc) {
  const EffectiveTwoLevel& e = sp.effective;
  DenseOp local = DenseOp::Zero(9, 9);
  const int g =
      3 * static_cast<int>(e.ground_left) + static_cast<int>(e.ground_right);
  local(g, g) = 1.0;
  Operator pg = embed_pair(e.site_left, e.site_right, local, e.n_atoms);
  Operator prr = rr_projector(e.site_left, e.site_right, e.n_atoms);
  local.setZero();
  local(8, g) = 1.0;
  Operator coup = embed_pair(e.site_left, e.site_right, local, e.n_atoms);

  ham.add([f = e.delta_g, s = sc.shift](double t) -> Complex { return s * f(t); },
          pg, false);
  ham.add([f = e.delta_r, s = sc.shift](double t) -> Complex { return s * f(t); },
          prr, false);
  ham.add(
      [f = e.omega_eff, s = sc.coupling](double t) -> Complex { return s * f(t); },
      coup, true);
}

}  // namespace

std::shared_ptr<CompiledHamiltonian> protocol_hamiltonian(
    const ProtocolPlan& plan, const ErrorSpec& error) {
  auto ham = std::make_shared<CompiledHamiltonian>(dim_for(plan.n_atoms));
  const EffectiveScales sc = effective_scales(error);
  for (int k = 1; k <= plan.n_atoms - 1; ++k) {
    for (int stage = 1; stage <= 2; ++stage) {
      const StageProblem sp = build_step(plan, k, stage);
      if (plan.model == ModelKind::full)
        add_full_stage(*ham, sp, error);
      else
        add_effective_stage(*ham, sp, sc);
    }
  }
  Operator chain_rr(dim_for(plan.n_atoms), dim_for(plan.n_atoms));
  for (int k = 0; k + 1 < plan.n_atoms; ++k)
    chain_rr += rr_projector(k, k + 1, plan.n_atoms);
  if (plan.model == ModelKind::full)
    ham.get()->add_static(Operator(plan.interaction() * chain_rr));
  if (has_interaction_shift(error))
    ham.get()->add_static(Operator(error.interaction_shift() * chain_rr));
  return ham;
}

namespace {

IntegratorConfig stage_integrator(const ProtocolPlan& plan,
                                  const ProtocolRunConfig& cfg) {
  IntegratorConfig ic;
  ic.method = cfg.method;
  ic.tol = cfg.adaptive_tol;
  if (plan.model == ModelKind::full) {
    const double omega_max = (plan.delta1_over_V + 2.0) * plan.interaction();
    ic.step = 2.0 * M_PI / omega_max / cfg.points_per_fast_period;
  } else {
    ic.step = plan.T / cfg.effective_steps_per_stage;
  }
  return ic;
}

}  // namespace

TargetState target_state(const ProtocolPlan& plan) {
  return target_state(plan, ErrorSpec{});
}

TargetState target_state(const ProtocolPlan& plan, const ErrorSpec& error) {
  auto ham = protocol_hamiltonian(plan, error);
  IntegratorConfig ic = stage_integrator(plan, ProtocolRunConfig{});
  ic.output_points = 2 * (plan.n_atoms - 1) + 1;  // stage breakpoints
  const double t_end = 2.0 * (plan.n_atoms - 1) * plan.T;
  StateVec psi0 = basis_vector(uniform_label(Level::g0, plan.n_atoms));
  // Integrate stage by stage so breakpoints land exactly on grid nodes.
  ClosedResult cr = evolve_closed(*ham, psi0, 0.0, t_end, ic);
  const Complex a0 = cr.final_psi(uniform_label(Level::g0, plan.n_atoms).index());
  const Complex a1 = cr.final_psi(uniform_label(Level::g1, plan.n_atoms).index());
  if (std::abs(a0) < 1e-3 || std::abs(a1) < 1e-3)
    throw std::runtime_error("target_state: encoded amplitudes vanished");
  TargetState t;
  t.n_atoms = plan.n_atoms;
  t.phi = std::arg(a1 / a0);
  return t;
}

RunResult run_protocol(const ProtocolPlan& plan, const NoiseParams& noise,
                       const ErrorSpec& error, const ProtocolRunConfig& cfg) {
  const int n = plan.n_atoms;
  auto ham = protocol_hamiltonian(plan, error);
  const TargetState target = target_state(plan);

  const long i0 = uniform_label(Level::g0, n).index();
  const long i1 = uniform_label(Level::g1, n).index();
  Operator chain_rr(dim_for(n), dim_for(n));
  for (int k = 0; k + 1 < n; ++k) chain_rr += rr_projector(k, k + 1, n);

  std::vector<Observable> obs;
  obs.push_back({"P_00", [i0](double, const DenseOp& rho) {
                   return std::abs(rho(i0, i0));
                 }});
  obs.push_back({"P_rr", [chain_rr](double, const DenseOp& rho) {
                   return std::abs(expectation(rho, chain_rr));
                 }});
  obs.push_back({"P_11", [i1](double, const DenseOp& rho) {
                   return std::abs(rho(i1, i1));
                 }});
  obs.push_back({"F_purity", [n](double, const DenseOp& rho) {
                   return fidelity(rho, n);
                 }});
  obs.push_back({"F_overlap", [n](double, const DenseOp& rho) {
                   return aligned_overlap_fidelity(rho, n);
                 }});

  const IntegratorConfig ic = stage_integrator(plan, cfg);
  std::vector<std::pair<double, double>> spans;
  for (int s = 0; s < 2 * (n - 1); ++s)
    spans.emplace_back(s * plan.T, (s + 1) * plan.T);
  if (plan.hold_time > 0.0)
    spans.emplace_back(2.0 * (n - 1) * plan.T,
                       2.0 * (n - 1) * plan.T + plan.hold_time);

  RunResult all;
  all.columns = {"P_00", "P_rr", "P_11", "F_purity", "F_overlap"};
  all.series.assign(all.columns.size(), {});
  StateVec psi0 = basis_vector(uniform_label(Level::g0, n));
  DenseOp rho = psi0 * psi0.adjoint();
  const auto channels = collapse_operators(noise, n);
  for (const auto& [ta, tb] : spans) {
    EvolutionProblem prob;
    prob.hamiltonian = ham;
    prob.channels = channels;
    prob.initial = rho;
    prob.t0 = ta;
    prob.t1 = tb;
    prob.observables = obs;
    IntegratorConfig sic = ic;
    sic.output_points = std::max(2, cfg.output_points_per_stage);
    RunResult r = evolve(prob, sic);
    const size_t skip = all.times.empty() ? 0 : 1;  // shared boundary point
    all.times.insert(all.times.end(), r.times.begin() + skip, r.times.end());
    for (size_t c = 0; c < all.series.size(); ++c)
      all.series[c].insert(all.series[c].end(), r.series[c].begin() + skip,
                           r.series[c].end());
    all.trace_drift = std::max(all.trace_drift, r.trace_drift);
    all.herm_drift = std::max(all.herm_drift, r.herm_drift);
    all.min_eigenvalue = r.min_eigenvalue;
    rho = r.final_rho;
  }
  all.final_rho = rho;

  std::ostringstream meta;
  all.metadata["n_atoms"] = std::to_string(n);
  all.metadata["model"] =
      plan.model == ModelKind::full ? "full" : "effective";
  meta.precision(12);
  meta << plan.T;
  all.metadata["T_s"] = meta.str();
  meta.str("");
  meta << plan.lambda;
  all.metadata["lambda"] = meta.str();
  meta.str("");
  meta << plan.interaction();
  all.metadata["V_rad_s"] = meta.str();
  meta.str("");
  meta << target.phi;
  all.metadata["target_phi"] = meta.str();
  meta.str("");
  meta << plan.delta1_over_V << " " << plan.delta_d_over_delta1;
  all.metadata["detuning_ratios"] = meta.str();
  return all;
}

}  // namespace rydsim
