#pragma once

// Complex linear algebra over labeled tensor products of three-level atoms.
// Every atom has two ground levels |0>, |1> and one Rydberg level |r>;
// operators live in the 3^N dimensional product space.

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace rydsim {

using Complex = std::complex<double>;
using DenseOp = Eigen::MatrixXcd;
using Operator = Eigen::SparseMatrix<Complex>;
using StateVec = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Atomic levels, ordered g0 < g1 < ryd. The ordering fixes basis index order.
enum class Level : int { g0 = 0, g1 = 1, ryd = 2 };

// Number of basis states for n atoms (3^n).
long dim_for(int n_atoms);

// Ordered list of per-atom levels; atom 0 is the most significant digit.
struct BasisLabel {
  std::vector<Level> atoms;

  BasisLabel() = default;
  explicit BasisLabel(std::vector<Level> lv) : atoms(std::move(lv)) {}
  BasisLabel(std::initializer_list<Level> lv) : atoms(lv) {}

  int n_atoms() const { return static_cast<int>(atoms.size()); }
  long index() const;
  static BasisLabel from_index(long index, int n_atoms);

  bool operator==(const BasisLabel&) const = default;
};

// All atoms in the same level, e.g. |0...0>.
BasisLabel uniform_label(Level lv, int n_atoms);

// Basis vector |label>.
StateVec basis_vector(const BasisLabel& label);

// |bra><ket| acting on `site`, identity elsewhere.
Operator embed_single(int site, Level bra, Level ket, int n_atoms);

// Embeds a 9x9 two-site operator at (site_a, site_b), identity elsewhere.
// The local operator is indexed by 3*level_a + level_b.
Operator embed_pair(int site_a, int site_b, const DenseOp& local, int n_atoms);

// |rr><rr| on the pair (site_a, site_b).
Operator rr_projector(int site_a, int site_b, int n_atoms);

Operator identity_op(int n_atoms);

inline Operator commutator(const Operator& a, const Operator& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("commutator: dimension mismatch");
  return Operator((a * b - b * a).pruned());
}

inline DenseOp commutator(const DenseOp& a, const DenseOp& b) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("commutator: dimension mismatch");
  return a * b - b * a;
}

// Tr(rho * obs)
Complex expectation(const DenseOp& rho, const Operator& obs);
Complex expectation(const DenseOp& rho, const DenseOp& obs);

// Hermitian, unit-trace state. Construction validates the invariants.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-8;

  explicit DensityMatrix(DenseOp rho);

  // Pure state |psi><psi|.
  static DensityMatrix pure(const StateVec& psi);

  const DenseOp& matrix() const { return rho_; }
  long dim() const { return rho_.rows(); }

  // Smallest eigenvalue; >= -1e-7 up to integration error.
  double min_eigenvalue() const;

 private:
  DenseOp rho_;
};

}  // namespace rydsim
