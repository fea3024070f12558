// Long-running acceptance checks: criterion 8 (corrected N=6 GHZ state) and
// the N=6,7 columns of the scaling table. Hours of runtime; excluded from the
// default ctest pass (enable with RYDSIM_LONG_TESTS).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rydsim/experiments.hpp"

using namespace rydsim;

namespace {

constexpr double kGamma = 2.0 * M_PI * 1.0e6;

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

CellSpec table_cell(int n_atoms, double kappa_over_gamma) {
  ExperimentConfig cfg = default_config("table1-ghz-scaling");
  CellSpec cell = cell_from_config(cfg);
  cell.plan.n_atoms = n_atoms;
  cell.noise = NoiseParams::from_kappa(kappa_over_gamma * kGamma);
  return cell;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  CellSpec cell = table_cell(6, 1e-3);
  cell.plan.lambda = 5.0;
  const RunResult r =
      run_protocol(cell.plan, cell.noise, cell.error, cell.run);
  // The systematic errors shift the accumulated phase deterministically, so
  // the target carries the phase of the errorful (but noiseless) protocol;
  // the overlap then probes decoherence-induced phase diffusion.
  const double f =
      overlap_fidelity(r.final_rho, target_state(cell.plan, cell.error));
  std::ostringstream d;
  d.precision(4);
  d << "corrected GHZ (N=6, lambda=5, overlap vs phase-accumulated target): F="
    << f << " (>=0.985), " << std::fixed << elapsed_s(t0) << "s";
  report("C8", f >= 0.985, d.str());
}

void criterion_7_long() {
  const double paper[2][3] = {{0.820, 0.816, 0.811},   // N=6
                              {0.786, 0.782, 0.778}};  // N=7
  const double kappas[3] = {1e-3, 5e-3, 1e-2};
  double f[2][3];
  bool pass = true;
  std::ostringstream d;
  d.precision(4);
  d << "GHZ scaling tail (purity):";
  for (int i = 0; i < 2; ++i) {
    const int n = 6 + i;
    for (int k = 0; k < 3; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      CellSpec cell = table_cell(n, kappas[k]);
      const RunResult r =
          run_protocol(cell.plan, cell.noise, cell.error, cell.run);
      f[i][k] = r.final_value("F_purity");
      const bool ok = std::abs(f[i][k] - paper[i][k]) <= 0.03;
      pass = pass && ok;
      d << " N=" << n << " kappa/gamma=" << kappas[k] << ": " << f[i][k]
        << "/" << paper[i][k] << " (" << std::fixed << elapsed_s(t0) << "s)";
      d.unsetf(std::ios_base::floatfield);
      d.precision(4);
    }
  }
  // strict decrease N=6 -> N=7 and weak decrease in kappa
  for (int k = 0; k < 3; ++k) pass = pass && f[1][k] < f[0][k];
  for (int i = 0; i < 2; ++i)
    pass = pass && f[i][1] <= f[i][0] && f[i][2] <= f[i][1];
  report("C7-long", pass, d.str());
}

}  // namespace

int main() {
  setvbuf(stdout, nullptr, _IOLBF, 0);
  try {
    criterion_8();
  } catch (const std::exception& ex) {
    report("C8", false, std::string("exception: ") + ex.what());
  }
  try {
    criterion_7_long();
  } catch (const std::exception& ex) {
    report("C7-long", false, std::string("exception: ") + ex.what());
  }
  std::printf("%d long-suite checks failed\n", g_failures);
  return g_failures;
}
