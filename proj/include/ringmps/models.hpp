#pragma once

#include <map>
#include <optional>
#include <string>

#include "ringmps/common.hpp"

namespace ringmps {

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix identity2();

/// A nearest-neighbor chain model: the two-site term h01 (the Hamiltonian is
/// sum_l T^l h01 T^{-l}), plus an optional global product-operator term
/// strength * prod_s o_s.
struct ModelSpec {
  std::string name;
  int phys_dim = 2;
  Matrix h01;  // d^2 x d^2, Hermitian

  struct ProductPerturbation {
    Matrix op;        // d x d, applied on every site
    double strength = 0.0;
  };
  std::optional<ProductPerturbation> perturbation;

  // Single-site operator whose ring product commutes with the Hamiltonian;
  // used only to label eigenstates.
  std::optional<Matrix> parity_label_op;

  std::map<std::string, double> params;

  std::uint64_t hash() const;
};

/// h01 = -Z(x)Z - g X(x)1 (field on the left site, so the TI sum counts each
/// site once). symmetric_field switches to the -(g/2)(X(x)1 + 1(x)X) split;
/// the implied Hamiltonian is identical.
ModelSpec ising_model(double g, bool symmetric_field = false);

/// h01 = -X(x)X - g Z(x)1; same spectrum as ising_model(g) (Hadamard
/// rotation), kept because the analytic solution is usually written in this
/// basis.
ModelSpec ising_model_xbasis(double g);

/// h01 = (XX + YY + ZZ)/4, the antiferromagnetic spin-1/2 chain.
ModelSpec heisenberg_model();

/// h01 = (-XX + YY - ZZ)/4 plus the product term sign * lambda * prod_s Y_s:
/// the sigma^y-rotated chain whose levels split by parity sector. Even N
/// assumed downstream.
ModelSpec heisenberg_transformed(double lambda, int sign);

}  // namespace ringmps
