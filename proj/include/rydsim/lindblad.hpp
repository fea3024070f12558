#pragma once

// Master-equation integration for time-dependent Hamiltonians of the form
// sum_i c_i(t) B_i with sparse constant operators B_i. The sparsity pattern
// is compiled once; each evaluation only rewrites the value array.

#include <map>
#include <memory>
#include <string>

#include "rydsim/noise.hpp"
#include "rydsim/tensor.hpp"

namespace rydsim {

class CompiledHamiltonian {
 public:
  explicit CompiledHamiltonian(long dim);

  // Adds c(t) * op (+ conj(c(t)) * op^dagger when with_hc).
  void add(std::function<Complex(double)> coeff, const Operator& op,
           bool with_hc = true);
  // Adds a constant Hermitian operator as-is.
  void add_static(const Operator& op);

  long dim() const { return dim_; }

  // Sparse H(t); the returned reference is invalidated by the next call.
  const Operator& at(double t) const;
  DenseOp dense_at(double t) const;

 private:
  struct Term {
    std::function<Complex(double)> coeff;  // null means constant 1
    Operator op;
    bool with_hc = false;
  };
  struct Entry {
    long offset = 0;  // linear index into the compiled value array
    Complex v;
    bool conj = false;
  };

  void compile() const;

  long dim_;
  std::vector<Term> terms_;
  mutable bool compiled_ = false;
  mutable Operator pattern_;
  mutable std::vector<std::vector<Entry>> entries_;  // per term
};

struct Observable {
  std::string name;
  std::function<double(double, const DenseOp&)> eval;
};

struct EvolutionProblem {
  std::shared_ptr<CompiledHamiltonian> hamiltonian;
  std::vector<LindbladChannel> channels;
  DenseOp initial;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<Observable> observables;
};

struct IntegratorConfig {
  enum class Method { fixed_rk4, adaptive_rk45 };
  Method method = Method::fixed_rk4;
  double step = 0.0;   // fixed-step size; required for fixed_rk4
  double tol = 1e-9;   // adaptive relative tolerance
  int output_points = 201;
};

struct RunResult {
  std::vector<double> times;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> series;  // series[column][time index]
  DenseOp final_rho;
  double trace_drift = 0.0;  // max |Tr rho - 1| over the run
  double herm_drift = 0.0;   // max element-wise |rho - rho^dagger|
  double min_eigenvalue = 0.0;  // of the final state
  std::map<std::string, std::string> metadata;

  const std::vector<double>& column(const std::string& name) const;
  double final_value(const std::string& name) const;
};

// d rho = -i[H, rho] + sum rate * (2 o rho o^dag - o^dag o rho - rho o^dag o)
DenseOp lindblad_rhs(const Operator& h,
                     const std::vector<LindbladChannel>& channels,
                     const DenseOp& rho);

RunResult evolve(const EvolutionProblem& problem, const IntegratorConfig& cfg);

struct ClosedResult {
  std::vector<double> times;
  std::vector<StateVec> states;
  StateVec final_psi;
  double norm_drift = 0.0;
};

// Schrodinger propagation of a pure state under the same Hamiltonian.
ClosedResult evolve_closed(const CompiledHamiltonian& h, const StateVec& psi0,
                           double t0, double t1, const IntegratorConfig& cfg);

void write_csv(const RunResult& r, const std::string& path,
               const std::string& time_column = "t");
void write_json(const RunResult& r, const std::string& path);

}  // namespace rydsim
