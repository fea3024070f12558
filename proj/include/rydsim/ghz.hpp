#pragma once

// The N-1 step GHZ sequencer: each step runs a two-stage passage on one
// nearest-neighbor pair, extending |0...0> + |1...1> coherence by one atom;
// targets, fidelity metrics, and the full/effective evolution assembly.

#include "rydsim/effective.hpp"
#include "rydsim/lindblad.hpp"
#include "rydsim/noise.hpp"
#include "rydsim/passage.hpp"

namespace rydsim {

enum class ModelKind { full, effective };

struct ProtocolPlan {
  int n_atoms = 2;
  double T = 0.0;       // stage duration, s
  double lambda = 0.0;  // correction gain
  ModelKind model = ModelKind::full;
  double V = 0.0;          // rad/s; ignored when geometry.d > 0
  VdwGeometry geometry{};  // optional source of V
  double delta1_over_V = 5.0;
  double delta_d_over_delta1 = 0.5;
  double hold_time = 0.0;  // field-off epoch after the last stage

  double interaction() const {
    return geometry.d > 0.0 ? vdw_interaction(geometry) : V;
  }
  double total_time() const { return 2.0 * (n_atoms - 1) * T + hold_time; }
};

// One stage of one step, fully synthesized.
struct StageProblem {
  StageParams params;            // physical drives
  SynthesizedControls controls;  // effective-level control targets
  EffectiveTwoLevel effective;   // exact elimination of `params`
};

StageProblem build_step(const ProtocolPlan& plan, int k, int stage);

// (|0...0> + e^{i phi} |1...1>) / sqrt(2)
struct TargetState {
  int n_atoms = 2;
  double phi = 0.0;
  StateVec vector() const;
};

// Target phase from the noiseless closed run of the plan's own model,
// projected onto the encoded labels. Systematic errors shift the accumulated
// phase deterministically (the lambda-scaled phase rate multiplies any drive
// miscalibration), so the error-carrying overload predicts the phase of an
// errorful run; the error-free overload is the ideal protocol's phase.
TargetState target_state(const ProtocolPlan& plan, const ErrorSpec& error);
TargetState target_state(const ProtocolPlan& plan);

// Tr[(Pi rho Pi)^2] with Pi projecting on span{|0...0>, |1...1>}; phase-blind.
double fidelity(const DenseOp& rho, int n_atoms);

// <target| rho |target>
double overlap_fidelity(const DenseOp& rho, const TargetState& target);

// max_phi <GHZ(phi)| rho |GHZ(phi)> = (P_0..0 + P_1..1)/2 + |rho_{0..0,1..1}|:
// overlap against the target carrying the phase the run actually accumulated.
double aligned_overlap_fidelity(const DenseOp& rho, int n_atoms);

std::map<std::string, double> populations(
    const DenseOp& rho, const std::vector<BasisLabel>& labels);

struct ProtocolRunConfig {
  IntegratorConfig::Method method = IntegratorConfig::Method::fixed_rk4;
  double adaptive_tol = 1e-9;
  // Full model: fixed step resolves the fastest phase delta2 + V.
  double points_per_fast_period = 40.0;
  // Effective model: fixed step as a fraction of the stage duration.
  double effective_steps_per_stage = 2000.0;
  int output_points_per_stage = 40;
};

// Chains the 2(N-1) stage evolutions plus the hold epoch from |0...0><0...0|.
// Emits columns P_00, P_rr, P_11, F_purity, F_overlap.
RunResult run_protocol(const ProtocolPlan& plan, const NoiseParams& noise,
                       const ErrorSpec& error,
                       const ProtocolRunConfig& cfg = {});

// The compiled Hamiltonian of the whole protocol (all stages), with the
// error terms folded in; exposed for closed-system and oracle runs.
std::shared_ptr<CompiledHamiltonian> protocol_hamiltonian(
    const ProtocolPlan& plan, const ErrorSpec& error);

}  // namespace rydsim
