#include "qclab/game.hpp"

#include "qclab/errors.hpp"

#include <algorithm>
#include <vector>

namespace qclab {

template <class Scalar>
MatrixGameSolution<Scalar> solve_matrix_game(const Matrix<Scalar>& payoff) {
  const Eigen::Index rows = payoff.rows();
  const Eigen::Index cols = payoff.cols();
  if (rows == 0 || cols == 0) throw PreconditionError("empty payoff matrix");

  const Scalar eps = zero_tolerance<Scalar>();
  const Scalar shift = payoff.minCoeff() - Scalar(1);
  // Every entry >= 1, so the game value is positive and the slack basis of
  //   max 1^T y  s.t.  P y <= 1, y >= 0
  // is feasible.
  const Matrix<Scalar> shifted = payoff.array() - shift;

  const Eigen::Index width = cols + rows + 1;
  const Eigen::Index rhs = width - 1;
  Matrix<Scalar> t = Matrix<Scalar>::Zero(rows + 1, width);
  t.topLeftCorner(rows, cols) = shifted;
  for (Eigen::Index r = 0; r < rows; ++r) {
    t(r, cols + r) = Scalar(1);
    t(r, rhs) = Scalar(1);
  }
  for (Eigen::Index c = 0; c < cols; ++c) t(rows, c) = Scalar(-1);

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = cols + r;

  int pivots = 0;
  for (;;) {
    Eigen::Index enter = -1;
    for (Eigen::Index c = 0; c < rhs; ++c) {
      if (t(rows, c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    Scalar best_ratio(0);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (t(r, enter) <= eps) continue;
      const Scalar ratio = t(r, rhs) / t(r, enter);
      if (leave < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
        leave = r;
        best_ratio = ratio;
      }
    }
    if (leave < 0) throw Error("matrix game LP unbounded; payoff shift failed");

    const Scalar pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (Eigen::Index r = 0; r <= rows; ++r) {
      if (r == leave || t(r, enter) == Scalar(0)) continue;
      const Scalar factor = t(r, enter);
      t.row(r) -= factor * t.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
    ++pivots;
  }

  const Scalar objective = t(rows, rhs);
  Vector<Scalar> q = Vector<Scalar>::Zero(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index b = basis[static_cast<std::size_t>(r)];
    if (b < cols) q[b] = t(r, rhs);
  }
  Vector<Scalar> p(rows);
  for (Eigen::Index r = 0; r < rows; ++r) p[r] = t(rows, cols + r);
  q /= objective;
  p /= objective;
  if constexpr (!is_exact_v<Scalar>) {
    q = q.cwiseMax(Scalar(0));
    p = p.cwiseMax(Scalar(0));
    q /= q.sum();
    p /= p.sum();
  }

  MatrixGameSolution<Scalar> out;
  out.value = Scalar(1) / objective + shift;
  const Vector<Scalar> row_payoffs = payoff * q;
  const Vector<Scalar> col_payoffs = payoff.transpose() * p;
  out.gap = row_payoffs.maxCoeff() - col_payoffs.minCoeff();
  if constexpr (!is_exact_v<Scalar>) out.gap = std::max(out.gap, Scalar(0));
  out.row_strategy = std::move(p);
  out.col_strategy = std::move(q);
  out.pivots = pivots;
  return out;
}

template MatrixGameSolution<Rational> solve_matrix_game(const Matrix<Rational>&);
template MatrixGameSolution<double> solve_matrix_game(const Matrix<double>&);

}  // namespace qclab
