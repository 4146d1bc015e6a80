#pragma once

// Relations, block composition f o g^n, the product distributions gamma_z and
// gamma_eta, and end-to-end experiments running T on sampled outer inputs.

#include "qclab/boolfn.hpp"
#include "qclab/conflict.hpp"
#include "qclab/dtree.hpp"
#include "qclab/process.hpp"
#include "qclab/rng.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace qclab {

/// Total relation on {0,1}^n with opaque string outputs.
class Relation {
 public:
  Relation(int bits, std::vector<std::set<std::string>> outputs);

  /// "0"/"1" outputs; undefined inputs admit both.
  static Relation from_function(const PartialFn& f);

  int bits() const { return bits_; }
  std::size_t size() const { return outputs_.size(); }
  const std::set<std::string>& outputs(Input z) const { return outputs_[z]; }
  bool contains(Input z, const std::string& s) const { return outputs_[z].count(s) != 0; }
  std::set<std::string> alphabet() const;

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  int bits_;
  std::vector<std::set<std::string>> outputs_;
};

/// Outer input as a bit vector, z[i] = z_i.
std::vector<int> unpack_bits(Input z, int bits);
Input pack_bits(std::span<const int> z);

class ComposedRelation {
 public:
  ComposedRelation(Relation base, PartialFn inner, int arity);

  const Relation& base() const { return base_; }
  const PartialFn& inner() const { return inner_; }
  int arity() const { return arity_; }
  int block_bits() const { return inner_.bits(); }
  int domain_bits() const { return arity_ * inner_.bits(); }

  /// Block i of x as an input of g.
  Input block(Input x, int i) const;

  /// Union of f(b) over every b with (x^(i), b_i) in g for all i; an invalid
  /// block admits both bits.
  std::set<std::string> outputs(Input x) const;
  bool contains(Input x, const std::string& s) const { return outputs(x).count(s) != 0; }

  /// Extensional table over domain_bits inputs; guarded at 20 bits.
  Relation materialize() const;

 private:
  Relation base_;
  PartialFn inner_;
  int arity_;
};

/// Throws PreconditionError when f.bits() != arity.
ComposedRelation compose(const Relation& f, const PartialFn& g, int arity);

/// x ~ gamma_z: block i drawn from mu_{z_i} by inverse CDF on `stream`.
template <class Scalar>
Input sample_gamma(std::span<const int> z, const DistributionPair<Scalar>& pair, CounterStream& stream);

struct GammaSample {
  Input z;
  Input x;
};

/// z ~ eta, then x ~ gamma_z, both on `stream`.
template <class Scalar>
GammaSample sample_gamma_eta(const InputDistribution<Scalar>& eta, const DistributionPair<Scalar>& pair,
                             CounterStream& stream);

/// Index i with u in [cdf(i-1), cdf(i)), skipping zero-mass atoms.
template <class Scalar>
Input sample_index(const InputDistribution<Scalar>& mu, double u);

/// Pr_{(z,x) ~ gamma_eta}[(x, A'(x)) in f o g^n] by leaf summation. A leaf
/// label s counts at z when to_string(s) is in f(z).
template <class Scalar>
Scalar exact_composed_success(const Relation& f, const DecisionTree& aprime, const BlockContext<Scalar>& ctx,
                              const InputDistribution<Scalar>& eta);

struct ExperimentOptions {
  int runs = 10000;
  std::uint64_t seed = 0;
  int workers = 1;
  bool run_q = true;
  bool keep_rows = false;
};

struct ExperimentRow {
  int run;
  Input z;
  int y;
  bool success;
  bool truncated_success;
  int x_total;  // -1 without Q
};

template <class Scalar>
struct CompositionReport {
  int arity;
  int t;                     // max queries of A'
  Scalar d;                  // chi_star of the pair
  Scalar exact_success;      // Pr_{gamma_eta}[A' correct]
  bool meets_threshold;      // exact_success >= 2/3
  std::vector<std::string> warnings;
  int runs;
  double success;            // MC estimate of Pr[(z, T(z)) in f]
  double success_se;
  bool success_identity;     // |success - exact_success| <= 3 se
  double mean_y;
  double y_se;
  int max_y;
  Scalar y_bound;            // t / d
  bool y_bound_holds;        // mean_y <= t/d + 3 se
  int truncation_limit;      // ceil(9t/d)
  double truncated_success;  // truncation counts as failure
  double truncated_se;
  /// exact_success - truncated_success; the Markov step bounds it by 1/9.
  double truncation_loss;
  bool truncation_holds;     // loss <= 1/9 + 3 se
  std::optional<double> mean_x;
  std::optional<double> x_se;
  std::optional<int> min_x;
  std::optional<bool> x_bound_holds;  // mean_x >= n d - 3 se
  std::vector<ExperimentRow> rows;
};

/// Draws z ~ eta and runs T (and Q, with the chi_star-optimal tree as the
/// completion) once per run. Run r uses streams keyed by (seed, r).
template <class Scalar>
CompositionReport<Scalar> composition_experiment(const Relation& f, const DistributionPair<Scalar>& pair,
                                                 const InputDistribution<Scalar>& eta, const DecisionTree& aprime,
                                                 const ExperimentOptions& options = {});

}  // namespace qclab
