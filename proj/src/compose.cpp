#include "qclab/compose.hpp"

#include "qclab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace qclab {

Relation::Relation(int bits, std::vector<std::set<std::string>> outputs) : bits_(bits), outputs_(std::move(outputs)) {
  if (bits < 0 || bits > kMaxBits) throw PreconditionError("relation width out of range");
  if (outputs_.size() != (std::size_t{1} << bits)) throw PreconditionError("relation table has the wrong size");
  for (std::size_t z = 0; z < outputs_.size(); ++z) {
    if (outputs_[z].empty()) throw PreconditionError("relation has no output at input " + std::to_string(z));
  }
}

Relation Relation::from_function(const PartialFn& f) {
  std::vector<std::set<std::string>> out(f.size());
  for (Input z = 0; z < f.size(); ++z) {
    switch (f(z)) {
      case Value::Zero: out[z] = {"0"}; break;
      case Value::One: out[z] = {"1"}; break;
      case Value::Undefined: out[z] = {"0", "1"}; break;
    }
  }
  return Relation(f.bits(), std::move(out));
}

std::set<std::string> Relation::alphabet() const {
  std::set<std::string> all;
  for (const auto& s : outputs_) all.insert(s.begin(), s.end());
  return all;
}

std::vector<int> unpack_bits(Input z, int bits) {
  std::vector<int> out(static_cast<std::size_t>(bits));
  for (int i = 0; i < bits; ++i) out[static_cast<std::size_t>(i)] = bit_of(z, i, bits);
  return out;
}

Input pack_bits(std::span<const int> z) {
  Input out = 0;
  for (int b : z) out = (out << 1) | static_cast<Input>(b & 1);
  return out;
}

ComposedRelation::ComposedRelation(Relation base, PartialFn inner, int arity)
    : base_(std::move(base)), inner_(std::move(inner)), arity_(arity) {
  if (base_.bits() != arity_) throw PreconditionError("outer relation arity differs from the block count");
  if (domain_bits() > kMaxBits) throw PreconditionError("composed input too wide");
}

Input ComposedRelation::block(Input x, int i) const {
  const int m = inner_.bits();
  const int shift = (arity_ - 1 - i) * m;
  return (x >> shift) & ((Input{1} << m) - 1);
}

std::set<std::string> ComposedRelation::outputs(Input x) const {
  // Bits forced by block values; free bits range over both choices.
  Input forced_mask = 0, forced = 0;
  for (int i = 0; i < arity_; ++i) {
    const Value v = inner_(block(x, i));
    if (v == Value::Undefined) continue;
    forced_mask |= var_mask(i, arity_);
    if (v == Value::One) forced |= var_mask(i, arity_);
  }
  Subcube cube(arity_);
  for (int i = 0; i < arity_; ++i)
    if (forced_mask & var_mask(i, arity_)) cube = cube.with(i, bit_of(forced, i, arity_));
  std::set<std::string> out;
  cube.for_each_point([&](Input b) {
    const auto& s = base_.outputs(b);
    out.insert(s.begin(), s.end());
  });
  return out;
}

Relation ComposedRelation::materialize() const {
  if (domain_bits() > 20) throw BudgetExceeded("composed table beyond 20 bits");
  std::vector<std::set<std::string>> out(std::size_t{1} << domain_bits());
  for (Input x = 0; x < out.size(); ++x) out[x] = outputs(x);
  return Relation(domain_bits(), std::move(out));
}

ComposedRelation compose(const Relation& f, const PartialFn& g, int arity) { return ComposedRelation(f, g, arity); }

template <class Scalar>
Input sample_index(const InputDistribution<Scalar>& mu, double u) {
  double cdf = 0.0;
  Input last = 0;
  bool any = false;
  for (Input x = 0; x < mu.size(); ++x) {
    const double w = to_double(mu[x]);
    if (w <= 0.0) continue;
    cdf += w;
    last = x;
    any = true;
    if (u < cdf) return x;
  }
  if (!any) throw ZeroMassError("sampling from a zero distribution");
  // Rounding left u beyond the accumulated total.
  return last;
}

template <class Scalar>
Input sample_gamma(std::span<const int> z, const DistributionPair<Scalar>& pair, CounterStream& stream) {
  const int m = pair.bits();
  Input x = 0;
  for (int zi : z) x = (x << m) | sample_index(pair.mu(zi), stream.uniform());
  return x;
}

template <class Scalar>
GammaSample sample_gamma_eta(const InputDistribution<Scalar>& eta, const DistributionPair<Scalar>& pair,
                             CounterStream& stream) {
  const Input z = sample_index(eta, stream.uniform());
  const auto bits = unpack_bits(z, eta.bits());
  return {z, sample_gamma(std::span<const int>(bits), pair, stream)};
}

template <class Scalar>
Scalar exact_composed_success(const Relation& f, const DecisionTree& aprime, const BlockContext<Scalar>& ctx,
                              const InputDistribution<Scalar>& eta) {
  if (f.bits() != ctx.blocks || eta.bits() != ctx.blocks) throw PreconditionError("outer width differs from block count");
  const auto leaves = aprime.leaves();
  Scalar total(0);
  for (Input z = 0; z < eta.size(); ++z) {
    if (eta[z] == Scalar(0)) continue;
    const auto bits = unpack_bits(z, ctx.blocks);
    const auto reach = gamma_reach_probability(aprime, ctx, std::span<const int>(bits));
    Scalar good(0);
    for (int leaf : leaves) {
      const auto& label = aprime.node(leaf).label;
      if (label && f.contains(z, std::to_string(*label))) good += reach[static_cast<std::size_t>(leaf)];
    }
    total += eta[z] * good;
  }
  return total;
}

namespace {

// Stream tag for the outer draw; block streams use tags below 2 * blocks.
constexpr std::uint64_t kEtaStream = 0xFFFFFFFFULL;

struct MeanSe {
  double mean;
  double se;
};

template <class T>
MeanSe mean_se(const std::vector<T>& xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (const auto& x : xs) sum += static_cast<double>(x);
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

constexpr double kSlack = 1e-12;

}  // namespace

template <class Scalar>
CompositionReport<Scalar> composition_experiment(const Relation& f, const DistributionPair<Scalar>& pair,
                                                 const InputDistribution<Scalar>& eta, const DecisionTree& aprime,
                                                 const ExperimentOptions& options) {
  const int n = f.bits();
  if (eta.bits() != n) throw PreconditionError("eta width differs from the outer relation");
  if (options.runs < 1) throw PreconditionError("runs must be positive");
  const BlockContext<Scalar> ctx{n, pair};
  if (aprime.max_var() >= ctx.total_bits()) throw PreconditionError("A' queries beyond the composed variables");
  if (!aprime.fully_labeled()) throw PreconditionError("A' has unlabeled leaves");

  CompositionReport<Scalar> rep{};
  rep.arity = n;
  rep.t = aprime.max_queries();
  const auto chi = chi_star(pair);
  rep.d = chi.value;
  rep.exact_success = exact_composed_success(f, aprime, ctx, eta);
  rep.meets_threshold = rep.exact_success * Scalar(3) >= Scalar(2);
  if (!rep.meets_threshold) rep.warnings.push_back("A' succeeds with probability below 2/3 under gamma_eta");
  rep.runs = options.runs;
  rep.y_bound = Scalar(rep.t) / rep.d;
  rep.truncation_limit = static_cast<int>(ceil_to_int(Scalar(9 * rep.t) / rep.d));

  const BlockContext<double> fctx{n, pair.template cast<double>()};
  const auto eta_d = eta.template cast<double>();
  const CoupledTree tree(aprime, fctx);
  std::optional<QSimulator> q;
  if (options.run_q) q.emplace(aprime, chi.optimal_tree, fctx);

  std::vector<ExperimentRow> rows(static_cast<std::size_t>(options.runs));
  parallel_for(rows.size(), options.workers, [&](std::size_t r) {
    const auto run = static_cast<std::uint64_t>(r);
    CounterStream zs(derive_seed(options.seed, run, kEtaStream));
    const Input z = sample_index(eta_d, zs.uniform());
    const auto bits = unpack_bits(z, n);
    const std::span<const int> zspan(bits);
    const ProcessTranscript tr = q ? q->run(zspan, options.seed, run) : tree.run(zspan, options.seed, run, true);
    const bool ok = tr.output && f.contains(z, std::to_string(*tr.output));
    rows[r] = ExperimentRow{static_cast<int>(r), z, tr.y(), ok, ok && tr.y() <= rep.truncation_limit,
                            q ? tr.x_total() : -1};
  });

  std::vector<int> ys, succ, tsucc, xs;
  for (const auto& row : rows) {
    ys.push_back(row.y);
    succ.push_back(row.success ? 1 : 0);
    tsucc.push_back(row.truncated_success ? 1 : 0);
    if (row.x_total >= 0) xs.push_back(row.x_total);
  }
  const auto s = mean_se(succ);
  const auto y = mean_se(ys);
  const auto ts = mean_se(tsucc);
  const double exact = to_double(rep.exact_success);
  rep.success = s.mean;
  rep.success_se = s.se;
  rep.success_identity = std::abs(s.mean - exact) <= 3.0 * s.se + kSlack;
  rep.mean_y = y.mean;
  rep.y_se = y.se;
  rep.max_y = *std::max_element(ys.begin(), ys.end());
  rep.y_bound_holds = y.mean <= to_double(rep.y_bound) + 3.0 * y.se + kSlack;
  rep.truncated_success = ts.mean;
  rep.truncated_se = ts.se;
  rep.truncation_loss = exact - ts.mean;
  rep.truncation_holds = rep.truncation_loss <= 1.0 / 9.0 + 3.0 * ts.se + kSlack;
  if (!xs.empty()) {
    const auto x = mean_se(xs);
    rep.mean_x = x.mean;
    rep.x_se = x.se;
    rep.min_x = *std::min_element(xs.begin(), xs.end());
    rep.x_bound_holds = x.mean >= n * to_double(rep.d) - 3.0 * x.se - kSlack;
  }
  if (options.keep_rows) rep.rows = std::move(rows);
  return rep;
}

#define QCLAB_INSTANTIATE(S)                                                                                   \
  template Input sample_index(const InputDistribution<S>&, double);                                            \
  template Input sample_gamma(std::span<const int>, const DistributionPair<S>&, CounterStream&);               \
  template GammaSample sample_gamma_eta(const InputDistribution<S>&, const DistributionPair<S>&, CounterStream&); \
  template S exact_composed_success(const Relation&, const DecisionTree&, const BlockContext<S>&,              \
                                    const InputDistribution<S>&);                                              \
  template CompositionReport<S> composition_experiment(const Relation&, const DistributionPair<S>&,            \
                                                       const InputDistribution<S>&, const DecisionTree&,       \
                                                       const ExperimentOptions&);

QCLAB_INSTANTIATE(Rational)
QCLAB_INSTANTIATE(double)
#undef QCLAB_INSTANTIATE

}  // namespace qclab
