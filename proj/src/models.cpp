#include "ringmps/models.hpp"

namespace ringmps {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix identity2() { return Matrix::Identity(2, 2); }

std::uint64_t ModelSpec::hash() const {
  std::uint64_t h = hash_bytes(name + "|" + std::to_string(phys_dim), 1469598103934665603ull);
  h = hash_matrix(h01, h);
  if (perturbation) {
    h = hash_matrix(perturbation->op, h);
    h = hash_bytes(format_g17(perturbation->strength), h);
  }
  for (const auto& [key, value] : params)
    h = hash_bytes(key + "=" + format_g17(value), h);
  return h;
}

ModelSpec ising_model(double g, bool symmetric_field) {
  ModelSpec m;
  m.name = "ising";
  m.h01 = -kron(pauli_z(), pauli_z());
  if (symmetric_field)
    m.h01 += -0.5 * g * (kron(pauli_x(), identity2()) +
                         kron(identity2(), pauli_x()));
  else
    m.h01 += -g * kron(pauli_x(), identity2());
  m.parity_label_op = pauli_x();
  m.params["g"] = g;
  return m;
}

ModelSpec ising_model_xbasis(double g) {
  ModelSpec m;
  m.name = "ising_x";
  m.h01 = -kron(pauli_x(), pauli_x()) - g * kron(pauli_z(), identity2());
  m.parity_label_op = pauli_z();
  m.params["g"] = g;
  return m;
}

ModelSpec heisenberg_model() {
  ModelSpec m;
  m.name = "heisenberg";
  m.h01 = 0.25 * (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) +
                  kron(pauli_z(), pauli_z()));
  m.parity_label_op = pauli_y();
  return m;
}

ModelSpec heisenberg_transformed(double lambda, int sign) {
  if (sign != 1 && sign != -1)
    throw ValidationError("heisenberg_transformed: sign must be +1 or -1");
  ModelSpec m;
  m.name = "heisenberg_transformed";
  m.h01 = 0.25 * (-kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) -
                  kron(pauli_z(), pauli_z()));
  if (lambda != 0.0)
    m.perturbation = ModelSpec::ProductPerturbation{pauli_y(), sign * lambda};
  m.parity_label_op = pauli_y();
  m.params["lambda"] = lambda;
  m.params["sign"] = sign;
  return m;
}

}  // namespace ringmps
