#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "rydsim/lindblad.hpp"

using namespace rydsim;

namespace {

std::shared_ptr<CompiledHamiltonian> rabi_hamiltonian(double omega) {
  auto ham = std::make_shared<CompiledHamiltonian>(3);
  ham->add([omega](double) -> Complex { return omega; },
           embed_single(0, Level::ryd, Level::g0, 1), true);
  return ham;
}

}  // namespace

TEST_CASE("CompiledHamiltonian assembles coefficient terms") {
  CompiledHamiltonian ham(3);
  ham.add([](double t) -> Complex { return Complex{0.0, t}; },
          embed_single(0, Level::ryd, Level::g1, 1), true);
  ham.add_static(Operator(2.0 * embed_single(0, Level::ryd, Level::ryd, 1)));

  const double t = 0.7;
  const DenseOp H = ham.dense_at(t);
  CHECK(std::abs(H(2, 1) - Complex{0.0, t}) < 1e-15);
  CHECK(std::abs(H(1, 2) - Complex{0.0, -t}) < 1e-15);
  CHECK(H(2, 2).real() == doctest::Approx(2.0));
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  // sparse and dense views agree
  CHECK((DenseOp(ham.at(t)) - H).cwiseAbs().maxCoeff() < 1e-15);
  // re-evaluation at another time rewrites values, not the pattern
  const DenseOp H2 = ham.dense_at(2.0 * t);
  CHECK(std::abs(H2(2, 1) - Complex{0.0, 2.0 * t}) < 1e-15);

  CHECK_THROWS_AS(CompiledHamiltonian(0), std::invalid_argument);
  CHECK_THROWS_AS(ham.add(nullptr, embed_single(0, Level::g0, Level::g1, 2)),
                  std::invalid_argument);
}

TEST_CASE("lindblad_rhs matches the explicit dissipator formula") {
  const Operator h = Operator(3.0 * embed_single(0, Level::ryd, Level::ryd, 1));
  const Operator o = embed_single(0, Level::g0, Level::ryd, 1);
  const double rate = 0.8;

  StateVec psi = StateVec::Zero(3);
  psi(0) = 0.6;
  psi(2) = 0.8;
  const DenseOp rho = psi * psi.adjoint();

  const DenseOp got = lindblad_rhs(h, {{rate, o}}, rho);
  const DenseOp od = DenseOp(o);
  const DenseOp expected =
      -kI * (DenseOp(h) * rho - rho * DenseOp(h)) +
      rate * (2.0 * od * rho * od.adjoint() - od.adjoint() * od * rho -
              rho * od.adjoint() * od);
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-13);
  const Operator wrong = embed_single(0, Level::g0, Level::ryd, 2);
  CHECK_THROWS_AS(lindblad_rhs(h, {{0.1, wrong}}, rho), std::invalid_argument);
}

TEST_CASE("free decay follows the analytic exponentials") {
  // One atom, no Hamiltonian, decay |r> -> |0> at rate kappa (channel
  // prefactor kappa/2): P_r(t) = e^{-kappa t}, rho_{0r} decays at kappa/2.
  const double kappa = 2.0;
  auto ham = std::make_shared<CompiledHamiltonian>(3);

  StateVec psi = StateVec::Zero(3);
  psi(0) = std::sqrt(0.5);
  psi(2) = std::sqrt(0.5);

  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.channels = {{0.5 * kappa, embed_single(0, Level::g0, Level::ryd, 1)}};
  prob.initial = psi * psi.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 1.0;
  IntegratorConfig cfg;
  cfg.step = 1e-3;

  const RunResult r = evolve(prob, cfg);
  CHECK(r.final_rho(2, 2).real() ==
        doctest::Approx(0.5 * std::exp(-kappa)).epsilon(1e-6));
  CHECK(std::abs(r.final_rho(0, 2)) ==
        doctest::Approx(0.5 * std::exp(-0.5 * kappa)).epsilon(1e-6));
  CHECK(r.trace_drift < 1e-10);
  CHECK(r.herm_drift < 1e-10);
  CHECK(r.min_eigenvalue > -1e-10);

  SUBCASE("pure dephasing kills coherence to |r> at rate 2 kappa_z") {
    Operator sz = embed_single(0, Level::g0, Level::g0, 1) +
                  embed_single(0, Level::g1, Level::g1, 1) -
                  embed_single(0, Level::ryd, Level::ryd, 1);
    EvolutionProblem dz = prob;
    const double kappa_z = 0.7;
    dz.channels = {{0.5 * kappa_z, sz}};
    const RunResult rz = evolve(dz, cfg);
    // (lambda_0 - lambda_r)^2 = 4, so rho_{0r} decays at (kappa_z/2)*4
    CHECK(std::abs(rz.final_rho(0, 2)) ==
          doctest::Approx(0.5 * std::exp(-2.0 * kappa_z)).epsilon(1e-6));
    CHECK(rz.final_rho(2, 2).real() == doctest::Approx(0.5).epsilon(1e-9));
  }
}

TEST_CASE("closed Rabi oscillation matches sin^2") {
  const double omega = 3.0;
  auto ham = rabi_hamiltonian(omega);
  StateVec psi0 = StateVec::Zero(3);
  psi0(0) = 1.0;
  IntegratorConfig cfg;
  cfg.step = 1e-4;
  const ClosedResult r = evolve_closed(*ham, psi0, 0.0, 0.9, cfg);
  CHECK(std::norm(r.final_psi(2)) ==
        doctest::Approx(std::pow(std::sin(omega * 0.9), 2)).epsilon(1e-8));
  CHECK(r.norm_drift < 1e-10);
  StateVec unnorm = 2.0 * psi0;
  CHECK_THROWS_AS(evolve_closed(*ham, unnorm, 0.0, 1.0, cfg),
                  std::invalid_argument);
}

TEST_CASE("observables are sampled on the requested grid") {
  auto ham = rabi_hamiltonian(1.0);
  StateVec psi0 = StateVec::Zero(3);
  psi0(0) = 1.0;
  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.initial = psi0 * psi0.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 2.0;
  prob.observables.push_back({"P_r", [](double, const DenseOp& rho) {
                                return rho(2, 2).real();
                              }});
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  cfg.output_points = 21;
  const RunResult r = evolve(prob, cfg);
  REQUIRE(r.times.size() == 21);
  CHECK(r.times.front() == doctest::Approx(0.0));
  CHECK(r.times.back() == doctest::Approx(2.0));
  const auto& col = r.column("P_r");
  REQUIRE(col.size() == 21);
  for (size_t i = 0; i < col.size(); ++i)
    CHECK(col[i] ==
          doctest::Approx(std::pow(std::sin(r.times[i]), 2)).epsilon(1e-6));
  CHECK(r.final_value("P_r") == doctest::Approx(col.back()));
  CHECK_THROWS_AS(r.column("missing"), std::invalid_argument);
}

TEST_CASE("adaptive integrator agrees with the fixed-step result") {
  auto ham = rabi_hamiltonian(2.0);
  StateVec psi0 = StateVec::Zero(3);
  psi0(0) = 1.0;
  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.channels = {{0.1, embed_single(0, Level::g0, Level::ryd, 1)}};
  prob.initial = psi0 * psi0.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 1.5;

  IntegratorConfig fixed;
  fixed.step = 1e-4;
  const RunResult rf = evolve(prob, fixed);

  IntegratorConfig adaptive;
  adaptive.method = IntegratorConfig::Method::adaptive_rk45;
  adaptive.tol = 1e-10;
  const RunResult ra = evolve(prob, adaptive);

  CHECK((rf.final_rho - ra.final_rho).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("fixed-step results converge at fourth order") {
  auto ham = rabi_hamiltonian(2.0);
  StateVec psi0 = StateVec::Zero(3);
  psi0(0) = 1.0;
  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.channels = {{0.2, embed_single(0, Level::g1, Level::ryd, 1)}};
  prob.initial = psi0 * psi0.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 1.0;

  auto run = [&](double step) {
    IntegratorConfig cfg;
    cfg.step = step;
    cfg.output_points = 2;  // do not let output sampling shrink the step
    return evolve(prob, cfg).final_rho;
  };
  const DenseOp fine = run(1e-4);
  const double err_h = (run(2e-2) - fine).cwiseAbs().maxCoeff();
  const double err_h2 = (run(1e-2) - fine).cwiseAbs().maxCoeff();
  CHECK(err_h2 < err_h / 8.0);  // ~16x for a 4th-order method
  CHECK(err_h2 < 1e-6);
}

TEST_CASE("evolution is deterministic across repeated runs") {
  auto ham = rabi_hamiltonian(1.7);
  StateVec psi0 = StateVec::Zero(3);
  psi0(1) = 1.0;
  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.channels = {{0.3, embed_single(0, Level::g0, Level::ryd, 1)}};
  prob.initial = psi0 * psi0.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 1.0;
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  const RunResult a = evolve(prob, cfg);
  const RunResult b = evolve(prob, cfg);
  CHECK((a.final_rho - b.final_rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CSV and JSON writers emit the sampled series") {
  auto ham = rabi_hamiltonian(1.0);
  StateVec psi0 = StateVec::Zero(3);
  psi0(0) = 1.0;
  EvolutionProblem prob;
  prob.hamiltonian = ham;
  prob.initial = psi0 * psi0.adjoint();
  prob.t0 = 0.0;
  prob.t1 = 0.5;
  prob.observables.push_back({"P_r", [](double, const DenseOp& rho) {
                                return rho(2, 2).real();
                              }});
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  cfg.output_points = 5;
  RunResult r = evolve(prob, cfg);
  r.metadata["note"] = "test";

  const std::string csv = "/tmp/rydsim_test_run.csv";
  const std::string json = "/tmp/rydsim_test_run.json";
  write_csv(r, csv);
  write_json(r, json);

  std::ifstream cin_(csv);
  REQUIRE(cin_.good());
  std::string header;
  std::getline(cin_, header);
  CHECK(header == "t,P_r");
  int lines = 0;
  for (std::string line; std::getline(cin_, line);) ++lines;
  CHECK(lines == 5);

  std::ifstream jin(json);
  REQUIRE(jin.good());
  std::string all((std::istreambuf_iterator<char>(jin)),
                  std::istreambuf_iterator<char>());
  CHECK(all.find("\"P_r\"") != std::string::npos);
  CHECK(all.find("\"note\"") != std::string::npos);
  std::remove(csv.c_str());
  std::remove(json.c_str());
}
