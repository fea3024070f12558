#include "doctest.h"

#include "rydsim/ghz.hpp"

using namespace rydsim;

namespace {

ProtocolPlan bell_plan(double lambda = 0.0) {
  ProtocolPlan plan;
  plan.n_atoms = 2;
  plan.T = 10e-6;
  plan.lambda = lambda;
  plan.V = 2 * M_PI * 20e6;
  plan.model = ModelKind::effective;
  return plan;
}

}  // namespace

TEST_CASE("build_step fixes the detuning hierarchy and the stage window") {
  const ProtocolPlan plan = bell_plan(2.0);
  const StageProblem sp = build_step(plan, 1, 2);
  CHECK(sp.params.delta1 == doctest::Approx(5.0 * plan.V));
  CHECK(sp.params.delta2 == doctest::Approx(6.0 * plan.V));
  CHECK(sp.params.delta_d == doctest::Approx(2.5 * plan.V));
  CHECK(sp.params.t_start == doctest::Approx(plan.T));
  CHECK(sp.params.t_end == doctest::Approx(2.0 * plan.T));
  CHECK(sp.params.step_k == 1);
  CHECK(sp.params.stage == 2);

  // The exact elimination of the synthesized drives reproduces the designed
  // coupling magnitude mid-stage.
  const double tm = 0.5 * (sp.params.t_start + sp.params.t_end);
  CHECK(std::abs(sp.effective.omega_eff(tm)) ==
        doctest::Approx(std::abs(sp.controls.omega_eff(tm))).epsilon(1e-9));

  CHECK_THROWS_AS(build_step(plan, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_step(plan, 2, 1), std::invalid_argument);
  ProtocolPlan single = plan;
  single.n_atoms = 1;
  CHECK_THROWS_AS(build_step(single, 1, 1), std::invalid_argument);
}

TEST_CASE("plan interaction comes from V or from the geometry") {
  ProtocolPlan plan = bell_plan();
  CHECK(plan.interaction() == doctest::Approx(plan.V));
  plan.geometry = {5.36e3 * 1e9 * 2 * M_PI, 8.030};
  CHECK(plan.interaction() ==
        doctest::Approx(vdw_interaction(plan.geometry)));
  CHECK(plan.total_time() == doctest::Approx(2.0 * plan.T));
  plan.n_atoms = 4;
  plan.hold_time = 1e-6;
  CHECK(plan.total_time() == doctest::Approx(6.0 * plan.T + 1e-6));
}

TEST_CASE("GHZ fidelity metrics on crafted states") {
  const int n = 3;
  const long dim = dim_for(n);
  const long i0 = uniform_label(Level::g0, n).index();
  const long i1 = uniform_label(Level::g1, n).index();

  SUBCASE("pure GHZ state of any phase") {
    for (double phi : {0.0, 1.2, M_PI}) {
      const TargetState t{n, phi};
      const StateVec v = t.vector();
      CHECK(std::abs(v(i0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(std::arg(v(i1)) == doctest::Approx(phi));
      const DenseOp rho = v * v.adjoint();
      CHECK(fidelity(rho, n) == doctest::Approx(1.0));
      CHECK(aligned_overlap_fidelity(rho, n) == doctest::Approx(1.0));
      CHECK(overlap_fidelity(rho, t) == doctest::Approx(1.0));
      // a mismatched target phase lowers the fixed-phase overlap only
      CHECK(overlap_fidelity(rho, TargetState{n, phi + M_PI}) ==
            doctest::Approx(0.0));
    }
  }

  SUBCASE("incoherent mixture of the two code words") {
    DenseOp rho = DenseOp::Zero(dim, dim);
    rho(i0, i0) = 0.5;
    rho(i1, i1) = 0.5;
    CHECK(fidelity(rho, n) == doctest::Approx(0.5));
    CHECK(aligned_overlap_fidelity(rho, n) == doctest::Approx(0.5));
    CHECK(overlap_fidelity(rho, TargetState{n, 0.3}) == doctest::Approx(0.5));
  }

  SUBCASE("partially coherent state") {
    DenseOp rho = DenseOp::Zero(dim, dim);
    rho(i0, i0) = 0.4;
    rho(i1, i1) = 0.4;
    rho(i0, i1) = Complex{0.0, 0.3};
    rho(i1, i0) = Complex{0.0, -0.3};
    rho(4, 4) = 0.2;  // leaked population elsewhere
    CHECK(aligned_overlap_fidelity(rho, n) == doctest::Approx(0.7));
    CHECK(fidelity(rho, n) == doctest::Approx(0.16 + 0.16 + 2.0 * 0.09));
    // the aligned overlap is the max over target phases
    double best = 0.0;
    for (int i = 0; i < 400; ++i) {
      const double phi = 2.0 * M_PI * i / 400.0;
      best = std::max(best, overlap_fidelity(rho, TargetState{n, phi}));
    }
    CHECK(aligned_overlap_fidelity(rho, n) ==
          doctest::Approx(best).epsilon(1e-3));
  }
}

TEST_CASE("populations reports labeled diagonal entries") {
  StateVec v = TargetState{2, 0.0}.vector();
  const DenseOp rho = v * v.adjoint();
  const auto p = populations(
      rho, {{Level::g0, Level::g0}, {Level::g1, Level::g1},
            {Level::ryd, Level::ryd}});
  CHECK(p.at("P_00") == doctest::Approx(0.5));
  CHECK(p.at("P_11") == doctest::Approx(0.5));
  CHECK(p.at("P_rr") == doctest::Approx(0.0));
}

TEST_CASE("protocol_hamiltonian folds in the interaction-shift error") {
  ProtocolPlan plan = bell_plan();
  ErrorSpec none;
  const auto h0 = protocol_hamiltonian(plan, none);
  const long rr = BasisLabel{Level::ryd, Level::ryd}.index();
  // effective model: no static V, no shift
  CHECK(std::abs(h0->dense_at(0.5 * plan.T)(rr, rr)) < 1e-12);

  ErrorSpec shift;
  shift.kind = ErrorKind::interaction;
  shift.delta_v = 123.0;
  const auto hs = protocol_hamiltonian(plan, shift);
  CHECK(hs->dense_at(0.5 * plan.T)(rr, rr).real() == doctest::Approx(123.0));

  ProtocolPlan full = plan;
  full.model = ModelKind::full;
  const auto hf = protocol_hamiltonian(full, none);
  // full model keeps the bare interaction on |rr>
  CHECK(hf->dense_at(0.5 * plan.T)(rr, rr).real() ==
        doctest::Approx(plan.V));
}

TEST_CASE("noiseless effective Bell run reaches the GHZ manifold") {
  const ProtocolPlan plan = bell_plan(0.0);
  const RunResult r = run_protocol(plan, NoiseParams{}, ErrorSpec{});
  REQUIRE(r.columns.size() == 5);
  CHECK(r.times.front() == doctest::Approx(0.0));
  CHECK(r.times.back() == doctest::Approx(plan.total_time()));
  for (size_t i = 1; i < r.times.size(); ++i)
    CHECK(r.times[i] > r.times[i - 1]);

  CHECK(r.final_value("P_00") == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r.final_value("P_11") == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(r.final_value("P_rr") == doctest::Approx(0.0).epsilon(1e-4));
  CHECK(r.final_value("F_overlap") > 0.9999);
  CHECK(r.final_value("F_purity") > 0.9999);
  // mid-protocol the pair passes through the |rr>-rich passage state
  double max_prr = 0.0;
  for (double p : r.column("P_rr")) max_prr = std::max(max_prr, p);
  CHECK(max_prr > 0.4);

  CHECK(r.metadata.at("n_atoms") == "2");
  CHECK(r.metadata.at("model") == "effective");

  // the ideal-run target phase reproduces the final coherence phase
  const TargetState target = target_state(plan);
  CHECK(overlap_fidelity(r.final_rho, target) > 0.9999);
}

TEST_CASE("hold epoch keeps a noiseless state stationary") {
  ProtocolPlan plan = bell_plan(0.0);
  plan.hold_time = 5e-6;
  const RunResult r = run_protocol(plan, NoiseParams{}, ErrorSpec{});
  CHECK(r.times.back() == doctest::Approx(plan.total_time()));
  CHECK(r.final_value("F_overlap") > 0.9999);
}

TEST_CASE("steps beyond the first leave the all-zero population frozen") {
  ProtocolPlan plan = bell_plan(0.0);
  plan.n_atoms = 3;
  const RunResult r = run_protocol(plan, NoiseParams{}, ErrorSpec{});
  // step 2 occupies t in [2T, 4T]
  const auto& p00 = r.column("P_00");
  double lo = 2.0, hi = -1.0;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    if (r.times[i] < 2.0 * plan.T - 1e-12 || r.times[i] > 4.0 * plan.T + 1e-12)
      continue;
    lo = std::min(lo, p00[i]);
    hi = std::max(hi, p00[i]);
  }
  CHECK(hi - lo < 1e-6);
}

TEST_CASE("doubling V and halving T leaves the closed-system fidelity") {
  ProtocolPlan a = bell_plan(0.0);
  a.model = ModelKind::full;
  ProtocolPlan b = a;
  b.V *= 2.0;
  b.T /= 2.0;
  const double fa =
      run_protocol(a, NoiseParams{}, ErrorSpec{}).final_value("F_overlap");
  const double fb =
      run_protocol(b, NoiseParams{}, ErrorSpec{}).final_value("F_overlap");
  CHECK(std::abs(fa - fb) < 1e-3);
}

TEST_CASE("three-atom effective protocol extends the coherence") {
  ProtocolPlan plan = bell_plan(0.0);
  plan.n_atoms = 3;
  const RunResult r = run_protocol(plan, NoiseParams{}, ErrorSpec{});
  CHECK(r.final_value("F_overlap") > 0.999);
  const auto p = populations(r.final_rho, {uniform_label(Level::g0, 3),
                                           uniform_label(Level::g1, 3)});
  CHECK(p.at("P_000") == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(p.at("P_111") == doctest::Approx(0.5).epsilon(1e-3));
}
