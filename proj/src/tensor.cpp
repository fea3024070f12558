#include "rydsim/tensor.hpp"

#include <Eigen/Eigenvalues>

namespace rydsim {

long dim_for(int n_atoms) {
  if (n_atoms < 1 || n_atoms > 16)
    throw std::invalid_argument("dim_for: n_atoms out of range");
  long d = 1;
  for (int i = 0; i < n_atoms; ++i) d *= 3;
  return d;
}

long BasisLabel::index() const {
  long idx = 0;
  for (Level lv : atoms) idx = idx * 3 + static_cast<int>(lv);
  return idx;
}

BasisLabel BasisLabel::from_index(long index, int n_atoms) {
  if (index < 0 || index >= dim_for(n_atoms))
    throw std::invalid_argument("BasisLabel::from_index: index out of range");
  std::vector<Level> lv(n_atoms);
  for (int k = n_atoms - 1; k >= 0; --k) {
    lv[k] = static_cast<Level>(index % 3);
    index /= 3;
  }
  return BasisLabel(std::move(lv));
}

BasisLabel uniform_label(Level lv, int n_atoms) {
  return BasisLabel(std::vector<Level>(n_atoms, lv));
}

StateVec basis_vector(const BasisLabel& label) {
  StateVec v = StateVec::Zero(dim_for(label.n_atoms()));
  v(label.index()) = 1.0;
  return v;
}

namespace {

// Splices the local digit(s) back into a context index. `site` digits are
// big-endian; context enumerates the remaining atoms in order.
long splice1(long context, int site, int local, int n_atoms) {
  long idx = 0;
  long rest = context;
  // context digit count = n_atoms - 1; walk atoms most-significant first
  std::vector<int> digits(n_atoms - 1);
  for (int k = n_atoms - 2; k >= 0; --k) {
    digits[k] = static_cast<int>(rest % 3);
    rest /= 3;
  }
  int c = 0;
  for (int k = 0; k < n_atoms; ++k)
    idx = idx * 3 + (k == site ? local : digits[c++]);
  return idx;
}

long splice2(long context, int sa, int sb, int la, int lb, int n_atoms) {
  long idx = 0;
  long rest = context;
  std::vector<int> digits(n_atoms - 2);
  for (int k = n_atoms - 3; k >= 0; --k) {
    digits[k] = static_cast<int>(rest % 3);
    rest /= 3;
  }
  int c = 0;
  for (int k = 0; k < n_atoms; ++k) {
    int d;
    if (k == sa)
      d = la;
    else if (k == sb)
      d = lb;
    else
      d = digits[c++];
    idx = idx * 3 + d;
  }
  return idx;
}

}  // namespace

Operator embed_single(int site, Level bra, Level ket, int n_atoms) {
  if (site < 0 || site >= n_atoms)
    throw std::invalid_argument("embed_single: site out of range");
  const long dim = dim_for(n_atoms);
  const long ctx = dim / 3;
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(ctx);
  for (long m = 0; m < ctx; ++m) {
    long row = splice1(m, site, static_cast<int>(bra), n_atoms);
    long col = splice1(m, site, static_cast<int>(ket), n_atoms);
    trips.emplace_back(static_cast<int>(row), static_cast<int>(col), 1.0);
  }
  Operator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

Operator embed_pair(int site_a, int site_b, const DenseOp& local, int n_atoms) {
  if (site_a == site_b)
    throw std::invalid_argument("embed_pair: overlapping sites");
  if (site_a < 0 || site_a >= n_atoms || site_b < 0 || site_b >= n_atoms)
    throw std::invalid_argument("embed_pair: site out of range");
  if (local.rows() != 9 || local.cols() != 9)
    throw std::invalid_argument("embed_pair: local operator must be 9x9");
  const long dim = dim_for(n_atoms);
  const long ctx = (n_atoms == 2) ? 1 : dim / 9;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int p = 0; p < 9; ++p) {
    for (int q = 0; q < 9; ++q) {
      const Complex v = local(p, q);
      if (v == Complex{}) continue;
      for (long m = 0; m < ctx; ++m) {
        long row = splice2(m, site_a, site_b, p / 3, p % 3, n_atoms);
        long col = splice2(m, site_a, site_b, q / 3, q % 3, n_atoms);
        trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
      }
    }
  }
  Operator op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

Operator rr_projector(int site_a, int site_b, int n_atoms) {
  DenseOp local = DenseOp::Zero(9, 9);
  local(8, 8) = 1.0;  // |rr><rr|
  return embed_pair(site_a, site_b, local, n_atoms);
}

Operator identity_op(int n_atoms) {
  const long dim = dim_for(n_atoms);
  Operator op(dim, dim);
  op.setIdentity();
  return op;
}

Complex expectation(const DenseOp& rho, const Operator& obs) {
  if (rho.rows() != obs.rows())
    throw std::invalid_argument("expectation: dimension mismatch");
  Complex tr{};
  for (int k = 0; k < obs.outerSize(); ++k)
    for (Operator::InnerIterator it(obs, k); it; ++it)
      tr += rho(it.col(), it.row()) * it.value();
  return tr;
}

Complex expectation(const DenseOp& rho, const DenseOp& obs) {
  if (rho.rows() != obs.rows())
    throw std::invalid_argument("expectation: dimension mismatch");
  return (rho * obs).trace();
}

DensityMatrix::DensityMatrix(DenseOp rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols())
    throw std::invalid_argument("DensityMatrix: not square");
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol)
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  const double tr_err = std::abs(rho_.trace() - Complex{1.0});
  if (tr_err > kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace != 1");
}

DensityMatrix DensityMatrix::pure(const StateVec& psi) {
  StateVec n = psi / psi.norm();
  return DensityMatrix(n * n.adjoint());
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<DenseOp> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace rydsim
