#include "rydsim/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"

namespace rydsim {

CompiledHamiltonian::CompiledHamiltonian(long dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("CompiledHamiltonian: bad dim");
}

void CompiledHamiltonian::add(std::function<Complex(double)> coeff,
                              const Operator& op, bool with_hc) {
  if (op.rows() != dim_ || op.cols() != dim_)
    throw std::invalid_argument("CompiledHamiltonian::add: dim mismatch");
  terms_.push_back({std::move(coeff), op, with_hc});
  compiled_ = false;
}

void CompiledHamiltonian::add_static(const Operator& op) {
  if (op.rows() != dim_ || op.cols() != dim_)
    throw std::invalid_argument("CompiledHamiltonian::add_static: dim mismatch");
  terms_.push_back({nullptr, op, false});
  compiled_ = false;
}

void CompiledHamiltonian::compile() const {
  std::vector<Eigen::Triplet<Complex>> structure;
  for (const Term& term : terms_) {
    for (int k = 0; k < term.op.outerSize(); ++k) {
      for (Operator::InnerIterator it(term.op, k); it; ++it) {
        structure.emplace_back(it.row(), it.col(), 1.0);
        if (term.with_hc) structure.emplace_back(it.col(), it.row(), 1.0);
      }
    }
  }
  pattern_ = Operator(dim_, dim_);
  pattern_.setFromTriplets(structure.begin(), structure.end());
  pattern_.makeCompressed();

  auto offset_of = [this](long row, long col) {
    const auto* outer = pattern_.outerIndexPtr();
    const auto* inner = pattern_.innerIndexPtr();
    for (long i = outer[col]; i < outer[col + 1]; ++i)
      if (inner[i] == row) return i;
    throw std::logic_error("CompiledHamiltonian: pattern miss");
  };

  entries_.assign(terms_.size(), {});
  for (size_t n = 0; n < terms_.size(); ++n) {
    const Term& term = terms_[n];
    for (int k = 0; k < term.op.outerSize(); ++k) {
      for (Operator::InnerIterator it(term.op, k); it; ++it) {
        entries_[n].push_back({offset_of(it.row(), it.col()), it.value(), false});
        if (term.with_hc)
          entries_[n].push_back(
              {offset_of(it.col(), it.row()), std::conj(it.value()), true});
      }
    }
  }
  compiled_ = true;
}

const Operator& CompiledHamiltonian::at(double t) const {
  if (!compiled_) compile();
  Complex* vals = pattern_.valuePtr();
  std::fill(vals, vals + pattern_.nonZeros(), Complex{});
  for (size_t n = 0; n < terms_.size(); ++n) {
    const Complex c = terms_[n].coeff ? terms_[n].coeff(t) : Complex{1.0};
    if (c == Complex{}) continue;
    for (const Entry& e : entries_[n])
      vals[e.offset] += (e.conj ? std::conj(c) : c) * e.v;
  }
  return pattern_;
}

DenseOp CompiledHamiltonian::dense_at(double t) const { return DenseOp(at(t)); }

const std::vector<double>& RunResult::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return series[i];
  throw std::invalid_argument("RunResult: no column " + name);
}

double RunResult::final_value(const std::string& name) const {
  const auto& c = column(name);
  if (c.empty()) throw std::logic_error("RunResult: empty column");
  return c.back();
}

namespace {

struct PreparedChannel {
  double rate;
  Operator o, o_adj, odo;
};

std::vector<PreparedChannel> prepare(const std::vector<LindbladChannel>& chans) {
  std::vector<PreparedChannel> out;
  out.reserve(chans.size());
  for (const LindbladChannel& c : chans) {
    if (c.rate < 0.0) throw std::invalid_argument("negative channel rate");
    if (c.rate == 0.0) continue;
    Operator adj = c.op.adjoint();
    out.push_back({c.rate, c.op, adj, Operator(adj * c.op)});
  }
  return out;
}

void dissipate(const std::vector<PreparedChannel>& chans, const DenseOp& rho,
               DenseOp& out) {
  for (const PreparedChannel& c : chans) {
    DenseOp orho = c.o * rho;
    DenseOp drho = c.odo * rho;
    out.noalias() += c.rate * 2.0 * (orho * c.o_adj);
    out -= c.rate * (drho + drho.adjoint());
  }
}

}  // namespace

DenseOp lindblad_rhs(const Operator& h,
                     const std::vector<LindbladChannel>& channels,
                     const DenseOp& rho) {
  if (h.rows() != rho.rows())
    throw std::invalid_argument("lindblad_rhs: dim mismatch");
  DenseOp m = h * rho;
  DenseOp out = -kI * (m - m.adjoint().eval());
  for (const LindbladChannel& c : channels) {
    if (c.op.rows() != rho.rows())
      throw std::invalid_argument("lindblad_rhs: channel dim mismatch");
    Operator adj = c.op.adjoint();
    DenseOp orho = c.op * rho;
    DenseOp drho = Operator(adj * c.op) * rho;
    out += c.rate * (2.0 * (orho * adj) - drho - drho.adjoint().eval());
  }
  return out;
}

namespace {

using Rhs = std::function<void(double, const DenseOp&, DenseOp&)>;

void rk4_span(const Rhs& rhs, double ta, double tb, double step, DenseOp& y) {
  const int n = std::max(1, (int)std::ceil((tb - ta) / step - 1e-12));
  const double h = (tb - ta) / n;
  DenseOp k1, k2, k3, k4;
  for (int i = 0; i < n; ++i) {
    const double t = ta + i * h;
    rhs(t, y, k1);
    rhs(t + 0.5 * h, DenseOp(y + 0.5 * h * k1), k2);
    rhs(t + 0.5 * h, DenseOp(y + 0.5 * h * k2), k3);
    rhs(t + h, DenseOp(y + h * k3), k4);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!y.allFinite()) throw std::runtime_error("integration diverged");
}

// Cash-Karp embedded 4(5) pair with elementwise error control.
void rk45_span(const Rhs& rhs, double ta, double tb, double tol, DenseOp& y) {
  static const double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
  static const double b21 = 0.2;
  static const double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
  static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
  static const double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0,
                      b54 = 35.0 / 27.0;
  static const double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0,
                      b63 = 575.0 / 13824.0, b64 = 44275.0 / 110592.0,
                      b65 = 253.0 / 4096.0;
  static const double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                      c6 = 512.0 / 1771.0;
  static const double d1 = c1 - 2825.0 / 27648.0, d3 = c3 - 18575.0 / 48384.0,
                      d4 = c4 - 13525.0 / 55296.0, d5 = -277.0 / 14336.0,
                      d6 = c6 - 0.25;
  double t = ta;
  double h = (tb - ta) / 100.0;
  DenseOp k1, k2, k3, k4, k5, k6;
  while (t < tb) {
    h = std::min(h, tb - t);
    if (h < (tb - ta) * 1e-14)
      throw std::runtime_error("adaptive step underflow");
    rhs(t, y, k1);
    rhs(t + a2 * h, DenseOp(y + h * (b21 * k1)), k2);
    rhs(t + a3 * h, DenseOp(y + h * (b31 * k1 + b32 * k2)), k3);
    rhs(t + a4 * h, DenseOp(y + h * (b41 * k1 + b42 * k2 + b43 * k3)), k4);
    rhs(t + a5 * h, DenseOp(y + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4)),
        k5);
    rhs(t + a6 * h,
        DenseOp(y + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5)),
        k6);
    DenseOp err = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    const double scale = tol * std::max(1.0, y.cwiseAbs().maxCoeff());
    const double e = err.cwiseAbs().maxCoeff() / scale;
    if (e <= 1.0) {
      y += h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
      if (!y.allFinite()) throw std::runtime_error("integration diverged");
      t += h;
      h *= std::clamp(0.9 * std::pow(std::max(e, 1e-10), -0.2), 0.2, 5.0);
    } else {
      h *= std::clamp(0.9 * std::pow(e, -0.25), 0.1, 1.0);
    }
  }
}

void integrate_span(const Rhs& rhs, double ta, double tb,
                    const IntegratorConfig& cfg, DenseOp& y) {
  if (tb <= ta) return;
  if (cfg.method == IntegratorConfig::Method::fixed_rk4) {
    if (cfg.step <= 0.0) throw std::invalid_argument("fixed_rk4 needs step > 0");
    rk4_span(rhs, ta, tb, cfg.step, y);
  } else {
    rk45_span(rhs, ta, tb, cfg.tol, y);
  }
}

}  // namespace

RunResult evolve(const EvolutionProblem& problem, const IntegratorConfig& cfg) {
  if (!problem.hamiltonian) throw std::invalid_argument("evolve: no Hamiltonian");
  if (problem.t1 <= problem.t0) throw std::invalid_argument("evolve: bad span");
  const auto chans = prepare(problem.channels);
  const CompiledHamiltonian& ham = *problem.hamiltonian;

  Rhs rhs = [&](double t, const DenseOp& rho, DenseOp& out) {
    const Operator& h = ham.at(t);
    DenseOp m = h * rho;
    out = -kI * (m - m.adjoint().eval());
    dissipate(chans, rho, out);
  };

  const int np = std::max(2, cfg.output_points);
  RunResult r;
  r.times.resize(np);
  r.columns.reserve(problem.observables.size());
  for (const Observable& o : problem.observables) r.columns.push_back(o.name);
  r.series.assign(r.columns.size(), std::vector<double>(np));

  DenseOp rho = problem.initial;
  for (int i = 0; i < np; ++i) {
    const double t =
        problem.t0 + (problem.t1 - problem.t0) * i / double(np - 1);
    if (i > 0) integrate_span(rhs, r.times[i - 1], t, cfg, rho);
    r.times[i] = t;
    r.trace_drift =
        std::max(r.trace_drift, std::abs(rho.trace() - Complex{1.0}));
    r.herm_drift = std::max(r.herm_drift,
                            (rho - rho.adjoint().eval()).cwiseAbs().maxCoeff());
    for (size_t c = 0; c < problem.observables.size(); ++c)
      r.series[c][i] = problem.observables[c].eval(t, rho);
  }
  r.final_rho = rho;
  Eigen::SelfAdjointEigenSolver<DenseOp> es(
      DenseOp(0.5 * (rho + rho.adjoint())), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

ClosedResult evolve_closed(const CompiledHamiltonian& h, const StateVec& psi0,
                           double t0, double t1, const IntegratorConfig& cfg) {
  if (std::abs(psi0.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("evolve_closed: psi0 not normalized");
  // Reuse the matrix-valued steppers on a dim x 1 "matrix".
  Rhs rhs = [&](double t, const DenseOp& psi, DenseOp& out) {
    out = -kI * (h.at(t) * psi);
  };
  const int np = std::max(2, cfg.output_points);
  ClosedResult r;
  r.times.resize(np);
  r.states.reserve(np);
  DenseOp psi = psi0;
  for (int i = 0; i < np; ++i) {
    const double t = t0 + (t1 - t0) * i / double(np - 1);
    if (i > 0) integrate_span(rhs, r.times[i - 1], t, cfg, psi);
    r.times[i] = t;
    r.states.push_back(StateVec(psi.col(0)));
    r.norm_drift = std::max(r.norm_drift, std::abs(psi.norm() - 1.0));
  }
  r.final_psi = r.states.back();
  return r;
}

void write_csv(const RunResult& r, const std::string& path,
               const std::string& time_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << time_column;
  for (const std::string& c : r.columns) out << ',' << c;
  out << '\n';
  out.precision(12);
  for (size_t i = 0; i < r.times.size(); ++i) {
    out << r.times[i];
    for (const auto& s : r.series) out << ',' << s[i];
    out << '\n';
  }
}

void write_json(const RunResult& r, const std::string& path) {
  nlohmann::json j;
  j["metadata"] = r.metadata;
  j["dim"] = r.final_rho.rows();
  j["trace_drift"] = r.trace_drift;
  j["herm_drift"] = r.herm_drift;
  j["min_eigenvalue"] = r.min_eigenvalue;
  j["times"] = r.times;
  j["columns"] = r.columns;
  j["series"] = r.series;
  std::vector<double> flat;
  flat.reserve(2 * r.final_rho.size());
  for (long c = 0; c < r.final_rho.cols(); ++c) {
    for (long row = 0; row < r.final_rho.rows(); ++row) {
      flat.push_back(r.final_rho(row, c).real());
      flat.push_back(r.final_rho(row, c).imag());
    }
  }
  j["final_rho"] = flat;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_json: cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace rydsim
