#pragma once

// Zero-sum matrix games by simplex pivoting over a dense tableau.

#include "qclab/scalar.hpp"

namespace qclab {

template <class Scalar>
struct MatrixGameSolution {
  Scalar value;
  Vector<Scalar> row_strategy;  // maximizer
  Vector<Scalar> col_strategy;  // minimizer
  /// max_r (A q)_r - min_c (p^T A)_c for the returned strategies; 0 in exact
  /// mode at optimality.
  Scalar gap;
  int pivots = 0;
};

/// Solves max_p min_q p^T A q. The tableau has one constraint per row and one
/// structural column per column of A, so put the short side on the rows.
/// Bland's rule keeps exact pivoting cycle-free.
template <class Scalar>
MatrixGameSolution<Scalar> solve_matrix_game(const Matrix<Scalar>& payoff);

}  // namespace qclab
