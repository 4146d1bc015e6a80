#include "qclab/measures.hpp"

#include "qclab/game.hpp"

#include <map>
#include <unordered_map>

namespace qclab {

template <class Scalar>
Scalar error_under(const DecisionTree& tree, const PartialFn& g, const InputDistribution<Scalar>& mu) {
  if (!tree.fully_labeled()) throw PreconditionError("tree has an unlabeled leaf");
  Scalar err(0);
  for (Input x = 0; x < g.size(); ++x) {
    if (!g.is_valid(x) || mu[x] == Scalar(0)) continue;
    if (*evaluate(tree, x, g.bits()).label != static_cast<int>(g(x))) err += mu[x];
  }
  return err;
}

namespace {

// Unnormalized recursion: best(C, k) is the least mass of {x in C : error}
// over trees of <= k queries started at C. Dividing by mu(C) gives the
// conditional form; working with masses makes zero-mass branches cost 0.
template <class Scalar>
class DistErrorSolver {
 public:
  DistErrorSolver(const PartialFn& g, const InputDistribution<Scalar>& mu) : g_(g), mu_(mu) {}

  struct Entry {
    Scalar err;
    int var;    // -1: stop here
    int label;  // guess when stopping
  };

  const Entry& best(const Subcube& c, int k) {
    const auto key = std::make_pair(c.key(), k);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const Scalar m0 = value_mass(mu_, g_, c, 0);
    const Scalar m1 = value_mass(mu_, g_, c, 1);
    Entry e{m1 <= m0 ? m1 : m0, -1, m1 <= m0 ? 0 : 1};
    if (k > 0 && e.err > Scalar(0)) {
      for (int var : c.free_vars()) {
        Scalar cand = best(c.with(var, 0), k - 1).err;
        cand += best(c.with(var, 1), k - 1).err;
        if (cand < e.err) e = Entry{cand, var, 0};
      }
    }
    return memo_.emplace(key, std::move(e)).first->second;
  }

  DecisionTree extract(const Subcube& c, int k) {
    const Entry e = best(c, k);
    if (e.var < 0) return DecisionTree::leaf(e.label);
    return DecisionTree::query(e.var, extract(c.with(e.var, 0), k - 1), extract(c.with(e.var, 1), k - 1));
  }

 private:
  const PartialFn& g_;
  const InputDistribution<Scalar>& mu_;
  std::map<std::pair<std::uint64_t, int>, Entry> memo_;
};

}  // namespace

template <class Scalar>
DistErrorResult<Scalar> dist_error_dp(const PartialFn& g, const InputDistribution<Scalar>& mu, int depth) {
  if (depth < 0) throw PreconditionError("negative depth budget");
  if (!supported_on_valid(mu, g)) throw PreconditionError("distribution must be supported on valid inputs of g");
  DistErrorSolver<Scalar> solver(g, mu);
  const Subcube full(g.bits());
  Scalar err = solver.best(full, depth).err;
  return {std::move(err), solver.extract(full, depth)};
}

template <class Scalar>
DistComplexity<Scalar> dist_complexity(const PartialFn& g, const InputDistribution<Scalar>& mu, const Scalar& eps) {
  if (eps < Scalar(0) || !(eps < Scalar(1) / Scalar(2))) throw PreconditionError("eps must lie in [0, 1/2)");
  for (int k = 0;; ++k) {
    auto r = dist_error_dp(g, mu, k);
    // Error 0 is reached by depth g.bits() at the latest.
    if (r.error <= eps || k >= g.bits()) return {k, std::move(r.error), std::move(r.tree)};
  }
}

namespace {

class ZeroErrorSolver {
 public:
  explicit ZeroErrorSolver(const PartialFn& g) : g_(g) {}

  struct Entry {
    int depth;
    int var;  // -1: leaf
    int label;
  };

  const Entry& best(const Subcube& c) {
    if (auto it = memo_.find(c.key()); it != memo_.end()) return it->second;
    bool zero = false, one = false;
    c.for_each_point([&](Input x) {
      zero |= g_(x) == Value::Zero;
      one |= g_(x) == Value::One;
    });
    Entry e{0, -1, one && !zero ? 1 : 0};
    if (zero && one) {
      e.depth = -1;
      for (int var : c.free_vars()) {
        const int d0 = best(c.with(var, 0)).depth;
        const int d1 = best(c.with(var, 1)).depth;
        const int d = 1 + std::max(d0, d1);
        if (e.depth < 0 || d < e.depth) e = Entry{d, var, 0};
      }
    }
    return memo_.emplace(c.key(), e).first->second;
  }

  DecisionTree extract(const Subcube& c) {
    const Entry e = best(c);
    if (e.var < 0) return DecisionTree::leaf(e.label);
    return DecisionTree::query(e.var, extract(c.with(e.var, 0)), extract(c.with(e.var, 1)));
  }

 private:
  const PartialFn& g_;
  std::unordered_map<std::uint64_t, Entry> memo_;
};

}  // namespace

int zero_error_depth(const PartialFn& g) { return ZeroErrorSolver(g).best(Subcube(g.bits())).depth; }

DecisionTree zero_error_tree(const PartialFn& g, const Subcube& region) {
  if (region.bits() != g.bits()) throw PreconditionError("region width differs from function width");
  return ZeroErrorSolver(g).extract(region);
}

template <class Scalar>
Scalar majority_amplify(const Scalar& err, int repetitions) {
  if (repetitions < 1 || repetitions % 2 == 0) throw PreconditionError("repetitions must be a positive odd integer");
  if (err < Scalar(0) || !(err < Scalar(1) / Scalar(2))) throw PreconditionError("error must lie in [0, 1/2)");
  const int k = repetitions;
  Scalar total(0);
  Scalar binom(1);  // C(k, i), updated incrementally
  for (int i = 0; i <= k; ++i) {
    if (i > 0) binom = binom * Scalar(k - i + 1) / Scalar(i);
    if (2 * i < k) continue;
    Scalar term = binom;
    for (int a = 0; a < i; ++a) term *= err;
    for (int a = 0; a < k - i; ++a) term *= Scalar(1) - err;
    total += term;
  }
  return total;
}

namespace {

using ErrorPattern = std::vector<bool>;

ErrorPattern error_pattern(const DecisionTree& t, const PartialFn& g, const std::vector<Input>& valid) {
  ErrorPattern p(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i)
    p[i] = *evaluate(t, valid[i], g.bits()).label != static_cast<int>(g(valid[i]));
  return p;
}

template <class Scalar>
Matrix<Scalar> error_matrix(const std::vector<ErrorPattern>& patterns, std::size_t inputs) {
  Matrix<Scalar> a(static_cast<Eigen::Index>(inputs), static_cast<Eigen::Index>(patterns.size()));
  for (std::size_t c = 0; c < patterns.size(); ++c)
    for (std::size_t r = 0; r < inputs; ++r)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = patterns[c][r] ? Scalar(1) : Scalar(0);
  return a;
}

template <class Scalar>
InputDistribution<Scalar> certificate_from(const Vector<Scalar>& p, const std::vector<Input>& valid, int bits) {
  Vector<Scalar> mass = Vector<Scalar>::Zero(static_cast<Eigen::Index>(std::size_t{1} << bits));
  for (std::size_t i = 0; i < valid.size(); ++i) mass[valid[i]] = p[static_cast<Eigen::Index>(i)];
  if constexpr (!is_exact_v<Scalar>) mass /= mass.sum();
  return InputDistribution<Scalar>(bits, std::move(mass));
}

template <class Scalar>
std::vector<std::pair<DecisionTree, Scalar>> mixture_from(const Vector<Scalar>& q,
                                                          const std::vector<DecisionTree>& trees) {
  std::vector<std::pair<DecisionTree, Scalar>> out;
  for (std::size_t i = 0; i < trees.size(); ++i)
    if (q[static_cast<Eigen::Index>(i)] > Scalar(0)) out.emplace_back(trees[i], q[static_cast<Eigen::Index>(i)]);
  return out;
}

template <class Scalar>
GameSolution<Scalar> solve_full_lp(const PartialFn& g, int depth, const std::vector<Input>& valid,
                                   const GameOptions& options) {
  std::vector<DecisionTree> trees;
  std::vector<ErrorPattern> patterns;
  std::map<ErrorPattern, std::size_t> seen;
  for_each_tree(g.bits(), depth, nullptr, [&](const DecisionTree& t) {
    auto p = error_pattern(t, g, valid);
    if (seen.emplace(p, trees.size()).second) {
      trees.push_back(t);
      patterns.push_back(std::move(p));
      if (trees.size() > options.max_strategies) throw BudgetExceeded("full LP: too many distinct strategies");
    }
  });
  auto sol = solve_matrix_game(error_matrix<Scalar>(patterns, valid.size()));
  return GameSolution<Scalar>{
      .depth = depth,
      .value = sol.value,
      .algorithm = mixture_from(sol.col_strategy, trees),
      .certificate = certificate_from(sol.row_strategy, valid, g.bits()),
      .gap = sol.gap,
      .iterations = 1,
      .strategies = trees.size(),
      .converged = true,
  };
}

template <class Scalar>
GameSolution<Scalar> solve_double_oracle(const PartialFn& g, int depth, const std::vector<Input>& valid,
                                         const GameOptions& options) {
  if (g.bits() > 6) throw BudgetExceeded("double oracle limited to 6-bit functions");
  const Scalar tol = is_exact_v<Scalar> ? Scalar(0) : Scalar(options.tolerance);

  std::vector<DecisionTree> trees{
      dist_error_dp(g, InputDistribution<Scalar>::uniform_on(g.bits(), valid), depth).tree};
  std::vector<ErrorPattern> patterns{error_pattern(trees[0], g, valid)};

  for (int iter = 1;; ++iter) {
    auto sol = solve_matrix_game(error_matrix<Scalar>(patterns, valid.size()));
    auto witness = certificate_from(sol.row_strategy, valid, g.bits());

    // Upper bound: worst input against the restricted mixture. Lower bound:
    // best unrestricted response to the restricted adversary.
    const Vector<Scalar> per_input = error_matrix<Scalar>(patterns, valid.size()) * sol.col_strategy;
    const Scalar upper = per_input.maxCoeff();
    auto response = dist_error_dp(g, witness, depth);
    Scalar gap = upper - response.error;
    if constexpr (!is_exact_v<Scalar>) gap = std::max(gap, Scalar(0));

    const bool done = gap <= tol;
    if (done || iter >= options.iteration_cap) {
      return GameSolution<Scalar>{
          .depth = depth,
          .value = upper,
          .algorithm = mixture_from(sol.col_strategy, trees),
          .certificate = std::move(witness),
          .gap = gap,
          .iterations = iter,
          .strategies = trees.size(),
          .converged = done,
      };
    }
    patterns.push_back(error_pattern(response.tree, g, valid));
    trees.push_back(std::move(response.tree));
  }
}

}  // namespace

template <class Scalar>
GameSolution<Scalar> solve_depth_game(const PartialFn& g, int depth, GameMethod method, const GameOptions& options) {
  if (depth < 0) throw PreconditionError("negative depth budget");
  const auto valid = g.valid_inputs();
  if (valid.empty()) throw PreconditionError("function has no valid inputs");
  return method == GameMethod::FullLp ? solve_full_lp<Scalar>(g, depth, valid, options)
                                      : solve_double_oracle<Scalar>(g, depth, valid, options);
}

template <class Scalar>
RandomizedComplexity<Scalar> randomized_complexity(const PartialFn& g, const Scalar& eps, GameMethod method,
                                                   const GameOptions& options) {
  if (eps < Scalar(0) || !(eps < Scalar(1) / Scalar(2))) throw PreconditionError("eps must lie in [0, 1/2)");
  RandomizedComplexity<Scalar> out{0, {}};
  for (int k = 0; k <= g.bits(); ++k) {
    auto sol = solve_depth_game<Scalar>(g, k, method, options);
    if (!sol.converged) {
      throw NonConvergence("double oracle did not converge at depth " + std::to_string(k) +
                           " (gap " + std::to_string(to_double(sol.gap)) + ")");
    }
    const bool enough = sol.value <= eps;
    out.per_depth.push_back(std::move(sol));
    if (enough) {
      out.depth = k;
      return out;
    }
  }
  // Unreachable: the full-depth game has value 0.
  throw Error("randomized_complexity: no depth reached the error target");
}

#define QCLAB_INSTANTIATE(S)                                                                                   \
  template S error_under(const DecisionTree&, const PartialFn&, const InputDistribution<S>&);                 \
  template DistErrorResult<S> dist_error_dp(const PartialFn&, const InputDistribution<S>&, int);               \
  template DistComplexity<S> dist_complexity(const PartialFn&, const InputDistribution<S>&, const S&);         \
  template S majority_amplify(const S&, int);                                                                  \
  template GameSolution<S> solve_depth_game(const PartialFn&, int, GameMethod, const GameOptions&);            \
  template RandomizedComplexity<S> randomized_complexity(const PartialFn&, const S&, GameMethod,               \
                                                         const GameOptions&);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab
