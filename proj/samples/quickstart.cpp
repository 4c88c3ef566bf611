// Small tour: a Bell pair, its moments, a Gaussian model for them, and the
// violating oscillator state from the lowest eigenvector of M.

#include "qmoments/catalog/cfrd.hpp"
#include "qmoments/catalog/tsirelson.hpp"
#include "qmoments/lhv/gaussian.hpp"
#include "qmoments/search/search.hpp"

#include <iostream>

using namespace qmoments;

int main() {
  const auto chsh = catalog::tsirelson_canonical();
  std::cout << "CHSH " << chsh.lhs << " against " << chsh.rhs << "\n";

  const HilbertSpace s = HilbertSpace::qubits(2);
  CVector psi = CVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const State bell = State::pure(s, psi);
  const ObservableSet obs(s, {{Label{"A", 1, 1}, embed(pauli(3), 0, s)},
                              {Label{"A", 2, 1}, embed(pauli(1), 0, s)},
                              {Label{"B", 1, 1}, embed(pauli(3), 1, s)}});
  const MomentTensor c = correlation_matrix(bell, obs);
  std::cout << "correlation matrix\n" << c.matrix() << "\n";
  const auto g = lhv::gaussian_model(c);
  std::cout << "Gaussian model reproduces <A1 B1> = " << lhv::model_moment(g, {Label{"A", 1, 1}, Label{"B", 1, 1}}) << "\n";

  const auto e = search::min_eigenpair(10);
  std::vector<double> z(e.vector.data(), e.vector.data() + e.vector.size());
  const auto r = catalog::quadripartite_cfrd_fock(z);
  std::cout << "cutoff 10: lambda_min " << e.lambda_min << ", <ABCD> " << r.lhs << " > <|AB|^2> " << r.rhs << "\n";
  return 0;
}
