#pragma once

// Information bounds at tree vertices, delta-sum profiles of conflict-optimal
// trees, and the truncate-and-guess tree built from them.
//
// Entropies are in nats; zero-probability terms contribute 0.

#include "qclab/boolfn.hpp"
#include "qclab/conflict.hpp"
#include "qclab/dtree.hpp"

#include <optional>
#include <vector>

namespace qclab {

inline constexpr double kPinskerConstant = 8.0;
inline constexpr double kLiteralConstant = 32.0;

/// Binary entropy in nats.
double binary_entropy(double p);

template <class Scalar>
struct InfoReport {
  double mi_nats;   // I(g(x) : x_j) under mu | C
  double mi_bits;
  Scalar balance;   // Pr[g=0 | C] Pr[g=1 | C]
  Scalar delta;     // 0 when one side is empty
  bool one_sided;
  double constant;
  double rhs;       // constant * (balance * delta)^2
  bool holds;       // mi_nats >= rhs, up to 1e-12
  double literal_rhs;
  bool literal_holds;
};

/// Throws ZeroMassError when mu(C) = 0 and PreconditionError when j is fixed
/// on C or mu charges an invalid input.
template <class Scalar>
InfoReport<Scalar> info_bound_check(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c, int j,
                                    double constant = kPinskerConstant);

/// Pr_mu[g = 0 | C] Pr_mu[g = 1 | C]; 0 when mu(C) = 0.
template <class Scalar>
Scalar balance_at(const PartialFn& g, const InputDistribution<Scalar>& mu, const Subcube& c);

/// Delta at an internal vertex with respect to (mu_0 | C, mu_1 | C), taken as 1
/// when either side has no mass on C.
template <class Scalar>
Scalar vertex_delta(const DistributionPair<Scalar>& pair, const Subcube& c, int var);

/// Transcript events over the first `budget` queries of a tree run on x ~ mu.
struct TranscriptFilter {
  enum class Kind { All, NotBiasedOrStop };
  Kind kind = Kind::All;
  int budget = 0;

  static TranscriptFilter all() { return {}; }
  /// BIASED: within `budget` queries the run reaches a vertex of balance at
  /// most 1/9. STOP: the run ends within `budget` queries.
  static TranscriptFilter not_biased_or_stop(int budget) { return {Kind::NotBiasedOrStop, budget}; }
};

template <class Scalar>
struct DeltaCheckpoint {
  int slab;       // i
  int horizon;    // ceil(10 d i)
  Scalar sum;     // sum_{t <= horizon} E[Delta(v_t) | filter]
  Scalar threshold;  // 13 i / 20
  bool holds;
};

template <class Scalar>
struct DeltaProfile {
  Scalar filter_probability;
  bool hypothesis_met;  // filter_probability >= 3/4
  std::vector<Scalar> expectation;  // t = 1..horizon, Delta(bottom) = 1
  std::vector<Scalar> running_sum;
  std::vector<DeltaCheckpoint<Scalar>> checkpoints;
};

/// Exact E[Delta(v_t) | filter] for t = 1..horizon with x ~ mu and mu_b the
/// conditionals of mu on g^-1(b). With `d`, adds the 13i/20 checkpoints at
/// every horizon ceil(10 d i) that fits. Expectation vectors are empty when
/// the filter has probability 0.
template <class Scalar>
DeltaProfile<Scalar> delta_sum_profile(const DecisionTree& tree, const PartialFn& g,
                                       const InputDistribution<Scalar>& mu, int horizon, TranscriptFilter filter,
                                       const std::optional<Scalar>& d = std::nullopt);

/// ceil(10 d^2).
template <class Scalar>
int default_truncation_budget(const Scalar& d);

template <class Scalar>
struct TruncationReport {
  Scalar d;                 // chi_star of (mu | g^-1(0), mu | g^-1(1))
  int budget;
  int depth;                // of B'
  Scalar stop_mass;         // B ends within the budget
  Scalar budget_mass;       // guessed at the budget
  Scalar biased_fraction;   // reaches balance <= 1/9 within the budget
  Scalar event_probability; // Pr[neither BIASED nor STOP]
  Scalar error;             // Pr_mu[B'(x) != g(x)]
  bool within_bound;        // error <= 47/95
  int biased_vertices;      // vertices of balance <= 1/9 within the budget
  bool case1_holds;         // B' errs with probability <= 1/3 below each of them
};

template <class Scalar>
struct TruncationResult {
  DecisionTree tree;
  TruncationReport<Scalar> report;
};

/// B' from the chi_star-optimal tree of the split of mu: stop where B stops
/// or after `budget` queries, then output the likelier value of g (0 on
/// ties). Pass budget < 0 for ceil(10 d^2).
template <class Scalar>
TruncationResult<Scalar> truncate_and_guess(const PartialFn& g, const InputDistribution<Scalar>& mu, int budget = -1);

/// I(transcript : g(x)) computed directly from leaf masses, and as the chain
/// rule sum of per-step conditional informations.
struct TranscriptInformation {
  double direct;
  double chain_sum;
  std::vector<double> per_step;
};

template <class Scalar>
TranscriptInformation transcript_information(const DecisionTree& tree, const PartialFn& g,
                                             const InputDistribution<Scalar>& mu);

}  // namespace qclab
