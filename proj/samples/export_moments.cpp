// Writes a moment file for one of the built-in observable sets.
//   export_moments ghz [out.json]
//   export_moments bell [out.json]

#include "qmoments/catalog/ghz.hpp"
#include "qmoments/io/moment_file.hpp"

#include <fstream>
#include <iostream>

using namespace qmoments;

static std::pair<State, ObservableSet> bell_set() {
  const HilbertSpace s = HilbertSpace::qubits(2);
  CVector psi = CVector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  const double h = 1.0 / std::sqrt(2.0);
  std::vector<Observable> obs{
      {Label{"A", 1, 1}, embed(pauli(3), 0, s)},
      {Label{"A", 2, 1}, embed(pauli(1), 0, s)},
      {Label{"B", 1, 1}, embed(h * (pauli(3) + pauli(1)), 1, s)},
      {Label{"B", 2, 1}, embed(h * (pauli(3) - pauli(1)), 1, s)},
  };
  return {State::pure(s, psi), ObservableSet(s, obs)};
}

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "ghz";
  nlohmann::json j;
  if (which == "ghz") {
    j = io::moment_file_json(catalog::ghz_state(3), catalog::ghz_fit_set());
  } else if (which == "bell") {
    const auto [st, obs] = bell_set();
    j = io::moment_file_json(st, obs);
  } else {
    std::cerr << "usage: export_moments ghz|bell [out.json]\n";
    return 2;
  }
  if (argc > 2) {
    std::ofstream(argv[2]) << j.dump(2) << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}
