#include "qclab/cli.hpp"

#include "qclab/compose.hpp"
#include "qclab/conflict.hpp"
#include "qclab/diagnostics.hpp"
#include "qclab/io.hpp"
#include "qclab/measures.hpp"
#include "qclab/parallel.hpp"
#include "qclab/process.hpp"
#include "qclab/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#ifndef QCLAB_VERSION
#define QCLAB_VERSION "0.0.0"
#endif

namespace qclab::cli {

namespace {

struct Common {
  std::string mode = "exact";
  int workers = 1;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string output;
  std::string csv;
};

struct Outcome {
  Json report = Json::object();
  int status = kOk;
  std::string csv;  // sidecar table, empty when the command has none
};

/// A leaf command. Options registered through `option` are echoed into the
/// report's config; output paths and the worker count are not, so reports
/// do not depend on where they are written or how many threads ran.
class Command {
 public:
  Command(CLI::App& group, const std::string& name, const std::string& description, bool stochastic)
      : name_(group.get_name() + " " + name), app_(group.add_subcommand(name, description)) {
    option("--mode", common.mode, "exact (rational) or float arithmetic")
        ->check(CLI::IsMember({"exact", "float"}));
    option("--tol", common.tol, "comparison tolerance");
    app_->add_option("--workers", common.workers, "worker threads (QCLAB_WORKERS overrides)");
    app_->add_option("--output", common.output, "report path (stdout when absent)");
    app_->add_option("--csv", common.csv, "CSV sidecar path (defaults next to --output)");
    if (stochastic) option("--seed", common.seed, "master seed")->required();
  }

  template <class T>
  CLI::Option* option(const std::string& flag, T& var, const std::string& description) {
    fields_.emplace_back(flag.substr(2), [&var] { return Json(var); });
    return app_->add_option(flag, var, description);
  }

  CLI::Option* flag(const std::string& flag, bool& var, const std::string& description) {
    fields_.emplace_back(flag.substr(2), [&var] { return Json(var); });
    return app_->add_flag(flag, var, description);
  }

  Json config() const {
    Json c = Json::object();
    for (const auto& [k, f] : fields_) c[k] = f();
    return c;
  }

  const std::string& name() const { return name_; }
  CLI::App* app() const { return app_; }

  Common common;
  std::function<Outcome(const Common&)> handler;

 private:
  std::string name_;
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<Json()>>> fields_;
};

template <class F>
Outcome dispatch(const std::string& mode, F&& f) {
  if (mode == "float") return f.template operator()<double>();
  return f.template operator()<Rational>();
}

PartialFn load_fn(const std::string& path) { return function_from_json(read_json_file(path)); }
DecisionTree load_tree(const std::string& path) { return tree_from_json(read_json_file(path)); }
Relation load_relation(const std::string& path) { return relation_from_json(read_json_file(path)); }

template <class S>
InputDistribution<S> load_dist(const std::string& path) {
  return distribution_from_json(read_json_file(path)).template cast<S>();
}

template <class S>
Json scalars(const std::vector<S>& xs) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(scalar_json(x));
  return a;
}

template <class S>
Json game_json(const GameSolution<S>& s) {
  Json alg = Json::array();
  for (const auto& [t, w] : s.algorithm) alg.push_back(Json{{"weight", scalar_json(w)}, {"tree", to_json(t)}});
  return Json{{"depth", s.depth},         {"value", scalar_json(s.value)},   {"gap", scalar_json(s.gap)},
              {"iterations", s.iterations}, {"strategies", s.strategies},     {"converged", s.converged},
              {"algorithm", std::move(alg)}, {"certificate", to_json(s.certificate)}};
}

Json transcript_json(const ProcessTranscript& t, std::uint64_t run) {
  return Json{{"run", run},
              {"path", t.path},
              {"nq_final", t.nq_final},
              {"conflict_counts", t.conflict_counts},
              {"z_queries", t.z_queries},
              {"block_queries", t.block_queries},
              {"output", t.output ? Json(*t.output) : Json(nullptr)},
              {"truncated", t.truncated}};
}

template <class S>
Json profile_json(const DeltaProfile<S>& p) {
  Json cps = Json::array();
  for (const auto& c : p.checkpoints) {
    cps.push_back(Json{{"slab", c.slab},
                       {"horizon", c.horizon},
                       {"sum", scalar_json(c.sum)},
                       {"threshold", scalar_json(c.threshold)},
                       {"holds", c.holds}});
  }
  return Json{{"filter_probability", scalar_json(p.filter_probability)},
              {"hypothesis_met", p.hypothesis_met},
              {"expectation", scalars(p.expectation)},
              {"running_sum", scalars(p.running_sum)},
              {"checkpoints", std::move(cps)}};
}

TranscriptFilter parse_filter(const std::string& name, int budget) {
  if (name == "all") return TranscriptFilter::all();
  return TranscriptFilter::not_biased_or_stop(budget);
}

struct Stat {
  double mean;
  double se;
};

Stat mean_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

using Registry = std::vector<std::unique_ptr<Command>>;

Command& add(Registry& reg, CLI::App& group, const std::string& name, const std::string& desc, bool stochastic = false) {
  reg.push_back(std::make_unique<Command>(group, name, desc, stochastic));
  return *reg.back();
}

// ---------------------------------------------------------------- measure

void register_measure(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("measure", "distributional, randomized and deterministic complexity");
  group.require_subcommand(1);

  {
    auto& c = add(reg, group, "dist", "D^mu_eps by subcube recursion");
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string, int>>("", "", "1/3", -1);
    c.option("--fn", std::get<0>(*o), "function file")->required();
    c.option("--dist", std::get<1>(*o), "distribution file")->required();
    c.option("--eps", std::get<2>(*o), "error bound");
    c.option("--depth", std::get<3>(*o), "also report the optimal error at this depth");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto g = load_fn(std::get<0>(*o));
        const auto mu = load_dist<S>(std::get<1>(*o));
        Outcome out;
        const auto r = dist_complexity(g, mu, from_rational<S>(parse_rational(std::get<2>(*o))));
        out.report["depth"] = r.depth;
        out.report["error"] = scalar_json(r.error);
        out.report["tree"] = to_json(r.tree);
        if (const int k = std::get<3>(*o); k >= 0) {
          const auto e = dist_error_dp(g, mu, k);
          out.report["at_depth"] = Json{{"depth", k}, {"error", scalar_json(e.error)}, {"tree", to_json(e.tree)}};
        }
        return out;
      });
    };
  }
  {
    auto& c = add(reg, group, "rand", "R_eps by solving the depth-k tree-versus-input game");
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string>>("", "1/3", "double-oracle");
    c.option("--fn", std::get<0>(*o), "function file")->required();
    c.option("--eps", std::get<1>(*o), "error bound");
    c.option("--method", std::get<2>(*o), "full-lp or double-oracle")->check(CLI::IsMember({"full-lp", "double-oracle"}));
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto g = load_fn(std::get<0>(*o));
        GameOptions opt;
        opt.tolerance = cm.tol;
        const auto method = std::get<2>(*o) == "full-lp" ? GameMethod::FullLp : GameMethod::DoubleOracle;
        const auto r = randomized_complexity(g, from_rational<S>(parse_rational(std::get<1>(*o))), method, opt);
        Outcome out;
        out.report["depth"] = r.depth;
        const auto& last = r.per_depth.back();
        out.report["value"] = scalar_json(last.value);
        out.report["gap"] = scalar_json(last.gap);
        out.report["algorithm"] = game_json(last)["algorithm"];
        out.report["certificate"] = to_json(last.certificate);
        Json per = Json::array();
        for (const auto& s : r.per_depth) per.push_back(game_json(s));
        out.report["per_depth"] = std::move(per);
        return out;
      });
    };
  }
  {
    auto& c = add(reg, group, "detdepth", "zero-error deterministic depth");
    auto fn = std::make_shared<std::string>();
    c.option("--fn", *fn, "function file")->required();
    c.handler = [fn](const Common&) {
      const auto g = load_fn(*fn);
      Outcome out;
      out.report["depth"] = zero_error_depth(g);
      out.report["tree"] = to_json(zero_error_tree(g, Subcube(g.bits())));
      return out;
    };
  }
}

// ---------------------------------------------------------------- chi

struct PairFiles {
  std::string fn, mu0, mu1, dist;
};

void pair_options(Command& c, PairFiles& p) {
  c.option("--fn", p.fn, "function file")->required();
  c.option("--mu0", p.mu0, "distribution on g^-1(0)");
  c.option("--mu1", p.mu1, "distribution on g^-1(1)");
  c.option("--dist", p.dist, "mixture split by the value of g (instead of --mu0/--mu1)");
}

template <class S>
DistributionPair<S> load_pair(const PairFiles& p) {
  const auto g = load_fn(p.fn);
  if (!p.dist.empty()) return DistributionPair<S>::from_mixture(g, load_dist<S>(p.dist));
  if (p.mu0.empty() || p.mu1.empty()) throw PreconditionError("give --mu0 and --mu1, or --dist");
  return DistributionPair<S>(g, load_dist<S>(p.mu0), load_dist<S>(p.mu1));
}

void register_chi(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("chi", "conflict complexity");
  group.require_subcommand(1);
  {
    auto& c = add(reg, group, "star", "optimal expected conflict queries for a pair");
    auto o = std::make_shared<std::pair<PairFiles, bool>>();
    pair_options(c, o->first);
    c.flag("--table", o->second, "include the subcube table");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto pair = load_pair<S>(o->first);
        const auto r = chi_star(pair);
        Outcome out;
        out.report["value"] = scalar_json(r.value);
        out.report["tree"] = to_json(r.optimal_tree);
        if (o->second) {
          Json t = Json::array();
          for (const auto& [cube, e] : r.table)
            t.push_back(Json{{"subcube", cube.to_string()}, {"value", scalar_json(e.value)}, {"var", e.var}});
          out.report["dp_table"] = std::move(t);
        }
        return out;
      });
    };
  }
  {
    auto& c = add(reg, group, "search", "certified lower bound on max over pairs", true);
    struct Opts {
      std::string fn;
      int restarts = 64, sweeps = 50, scale = 16;
    };
    auto o = std::make_shared<Opts>();
    c.option("--fn", o->fn, "function file")->required();
    c.option("--restarts", o->restarts, "random restarts");
    c.option("--sweeps", o->sweeps, "ascent sweeps per restart");
    c.option("--scale", o->scale, "initial weight range");
    c.handler = [o](const Common& cm) {
      ChiSearchOptions opt;
      opt.restarts = o->restarts;
      opt.max_sweeps = o->sweeps;
      opt.weight_scale = o->scale;
      opt.seed = cm.seed;
      opt.workers = resolve_workers(cm.workers);
      const auto r = chi_lower_bound_search(load_fn(o->fn), opt);
      Outcome out;
      out.report["value"] = to_string(r.value);
      out.report["bound"] = "lower";
      out.report["mu0"] = to_json(r.pair.mu(0));
      out.report["mu1"] = to_json(r.pair.mu(1));
      out.report["best_restart"] = r.best_restart;
      out.report["restart_values"] = scalars(r.restart_values);
      out.report["history"] = scalars(r.history);
      out.report["evaluations"] = r.evaluations;
      std::ostringstream csv;
      csv << "restart,value,running_best\n";
      for (std::size_t i = 0; i < r.restart_values.size(); ++i)
        csv << i << ',' << to_string(r.restart_values[i]) << ',' << to_string(r.history[i]) << '\n';
      out.csv = csv.str();
      return out;
    };
  }
}

// ---------------------------------------------------------------- simulate

struct SimOpts {
  PairFiles pair;
  std::string tree, bopt, z, transcripts;
  int runs = 1;
};

Outcome run_simulation(const SimOpts& o, const Common& cm, char kind) {
  const auto pair = load_pair<Rational>(o.pair);
  const auto tree = load_tree(o.tree);
  const auto z = parse_bitstring(o.z);
  const int n = static_cast<int>(z.size());
  if (n < 1) throw PreconditionError("--z must name at least one block");
  if (o.runs < 1) throw PreconditionError("--runs must be positive");
  const BlockContext<double> ctx{n, pair.cast<double>()};
  const CoupledTree coupled(tree, ctx);
  std::optional<QSimulator> q;
  if (kind == 'q') q.emplace(tree, o.bopt.empty() ? chi_star(pair).optimal_tree : load_tree(o.bopt), ctx);

  std::vector<ProcessTranscript> ts(static_cast<std::size_t>(o.runs));
  parallel_for(ts.size(), resolve_workers(cm.workers), [&](std::size_t r) {
    const auto run = static_cast<std::uint64_t>(r);
    ts[r] = kind == 'q' ? q->run(z, cm.seed, run) : coupled.run(z, cm.seed, run, kind == 't');
  });

  Outcome out;
  std::vector<double> total_n, ys, xs;
  std::vector<double> mean_n(static_cast<std::size_t>(n), 0.0), mean_x(static_cast<std::size_t>(n), 0.0);
  std::map<std::string, int> outputs;
  std::ostringstream csv, jsonl;
  csv << "run,output,y,x_total,conflict_counts\n";
  for (std::size_t r = 0; r < ts.size(); ++r) {
    const auto& t = ts[r];
    double nsum = 0;
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      mean_n[ui] += t.conflict_counts[ui];
      mean_x[ui] += t.block_queries[ui];
      nsum += t.conflict_counts[ui];
    }
    total_n.push_back(nsum);
    ys.push_back(t.y());
    xs.push_back(t.x_total());
    ++outputs[t.output ? std::to_string(*t.output) : "none"];
    csv << r << ',' << (t.output ? std::to_string(*t.output) : "") << ',' << t.y() << ',' << t.x_total() << ',';
    for (int i = 0; i < n; ++i) csv << (i ? ";" : "") << t.conflict_counts[static_cast<std::size_t>(i)];
    csv << '\n';
    if (!o.transcripts.empty()) jsonl << transcript_json(t, r).dump() << '\n';
  }
  for (auto& v : mean_n) v /= o.runs;
  for (auto& v : mean_x) v /= o.runs;
  const auto sn = mean_se(total_n), sy = mean_se(ys), sx = mean_se(xs);
  out.report["blocks"] = n;
  out.report["runs"] = o.runs;
  out.report["mean_conflict_counts"] = mean_n;
  out.report["mean_block_queries"] = mean_x;
  out.report["mean_n"] = Json{{"mean", sn.mean}, {"se", sn.se}};
  out.report["y"] = Json{{"mean", sy.mean}, {"se", sy.se}};
  out.report["x"] = Json{{"mean", sx.mean}, {"se", sx.se}};
  out.report["outputs"] = outputs;
  out.report["first_transcript"] = transcript_json(ts.front(), 0);
  if (kind == 'p' && n == 1 && tree.max_var() < pair.bits() && computes(tree, pair.function())) {
    const auto e = expected_conflict_queries(tree, pair);
    out.report["expected_conflict_queries"] = to_string(e);
    out.report["within_3se"] = std::abs(sn.mean - to_double(e)) <= 3.0 * sn.se + 1e-12;
  }
  out.csv = csv.str();
  if (!o.transcripts.empty()) write_text_file(o.transcripts, jsonl.str());
  return out;
}

void register_simulate(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("simulate", "the coupled processes P, T and Q");
  group.require_subcommand(1);
  for (const char* kind : {"p", "t", "q"}) {
    auto& c = add(reg, group, kind, std::string("run process ") + static_cast<char>(std::toupper(kind[0])), true);
    auto o = std::make_shared<SimOpts>();
    pair_options(c, o->pair);
    c.option("--tree", o->tree, "tree over blocks * m variables")->required();
    c.option("--z", o->z, "outer input, one bit per block")->required();
    c.option("--runs", o->runs, "independent runs");
    if (kind[0] == 'q') c.option("--bopt", o->bopt, "completion tree computing g (default: chi_star optimal)");
    c.app()->add_option("--transcripts", o->transcripts, "JSON-lines transcript dump");
    const char k = kind[0];
    c.handler = [o, k](const Common& cm) { return run_simulation(*o, cm, k); };
  }
}

// ---------------------------------------------------------------- verify

template <class S>
Outcome verify_claim32(int instances, const ReachInstanceShape& shape, const Common& cm) {
  if (instances < 1) throw PreconditionError("--instances must be positive");
  std::vector<S> disc(static_cast<std::size_t>(instances));
  std::vector<std::array<int, 3>> dims(disc.size());
  parallel_for(disc.size(), resolve_workers(cm.workers), [&](std::size_t i) {
    const auto inst = random_reach_instance(derive_seed(cm.seed, i), shape);
    const BlockContext<S> ctx{inst.ctx.blocks, inst.ctx.pair.template cast<S>()};
    const auto rep = verify_reach_equivalence(inst.tree, ctx, inst.z, cm.tol);
    disc[i] = rep.max_discrepancy;
    dims[i] = {ctx.block_bits(), ctx.blocks, static_cast<int>(inst.tree.size())};
  });
  Outcome out;
  S worst(0);
  std::vector<int> failures;
  long nodes = 0;
  std::ostringstream csv;
  csv << "instance,m,n,nodes,discrepancy\n";
  for (std::size_t i = 0; i < disc.size(); ++i) {
    if (disc[i] > worst) worst = disc[i];
    if (to_double(disc[i]) > cm.tol) failures.push_back(static_cast<int>(i));
    nodes += dims[i][2];
    csv << i << ',' << dims[i][0] << ',' << dims[i][1] << ',' << dims[i][2] << ',' << scalar_json(disc[i]).dump() << '\n';
  }
  out.report["instances"] = instances;
  out.report["nodes_checked"] = nodes;
  out.report["max_discrepancy"] = scalar_json(worst);
  out.report["failures"] = failures;
  out.report["pass"] = failures.empty();
  out.status = failures.empty() ? kOk : kVerificationFailed;
  out.csv = csv.str();
  return out;
}

struct InfoSample {
  PartialFn g;
  InputDistribution<Rational> mu;
  Subcube c;
  int j;
};

InfoSample draw_info_sample(std::uint64_t key) {
  std::mt19937_64 rng(key);
  for (;;) {
    const int m = 1 + static_cast<int>(rng() % 3);
    auto g = random_partial_fn(m, rng());
    auto valid = g.valid_inputs();
    auto mu = random_rational_distribution(m, valid, rng());
    Subcube c(m);
    for (int v = 0; v < m; ++v)
      if (rng() % 3 == 0) c = c.with(v, static_cast<int>(rng() & 1U));
    const auto free = c.free_vars();
    if (free.empty() || mass_of(mu, c) == Rational(0)) continue;
    const int j = free[rng() % free.size()];
    return {std::move(g), std::move(mu), c, j};
  }
}

template <class S>
Json info_json(const InfoReport<S>& r) {
  return Json{{"mi_nats", r.mi_nats},     {"mi_bits", r.mi_bits},           {"balance", scalar_json(r.balance)},
              {"delta", scalar_json(r.delta)}, {"one_sided", r.one_sided},  {"constant", r.constant},
              {"rhs", r.rhs},             {"holds", r.holds},               {"literal_constant", kLiteralConstant},
              {"literal_rhs", r.literal_rhs}, {"literal_holds", r.literal_holds}};
}

template <class S>
Outcome verify_infobound(int samples, double constant, const Common& cm) {
  if (samples < 1) throw PreconditionError("--samples must be positive");
  std::vector<std::optional<InfoReport<S>>> reps(static_cast<std::size_t>(samples));
  parallel_for(reps.size(), resolve_workers(cm.workers), [&](std::size_t i) {
    const auto s = draw_info_sample(derive_seed(cm.seed, i));
    reps[i] = info_bound_check(s.g, s.mu.template cast<S>(), s.c, s.j, constant);
  });
  int failures = 0, literal_failures = 0, one_sided = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : reps) {
    failures += !r->holds;
    literal_failures += !r->literal_holds;
    one_sided += r->one_sided;
    min_slack = std::min(min_slack, r->mi_nats - r->rhs);
  }
  Outcome out;
  out.report["samples"] = samples;
  out.report["failures"] = failures;
  out.report["one_sided"] = one_sided;
  out.report["min_slack"] = min_slack;
  out.report["literal_failures"] = literal_failures;
  out.report["holds_all"] = failures == 0;
  const auto cx = info_bound_check(PartialFn::from_string(1, "01"), InputDistribution<S>::uniform(1), Subcube(1), 0, constant);
  out.report["literal_counterexample"] = info_json(cx);
  out.status = failures == 0 ? kOk : kVerificationFailed;
  return out;
}

struct DeltaOpts {
  std::string fn, dist, tree, filter = "all";
  int slabs = 1, horizon = -1, budget = -1;
};

template <class S>
Outcome delta_profile(const DeltaOpts& o, bool verify) {
  const auto g = load_fn(o.fn);
  const auto mu = load_dist<S>(o.dist);
  const auto chi = chi_star(DistributionPair<S>::from_mixture(g, mu));
  const S d = chi.value;
  const DecisionTree tree = o.tree.empty() ? chi.optimal_tree : load_tree(o.tree);
  int horizon = o.horizon;
  if (verify || horizon < 0) horizon = static_cast<int>(ceil_to_int(S(10 * std::max(1, o.slabs)) * d));
  const int budget = o.budget < 0 ? default_truncation_budget(d) : o.budget;
  const auto p = delta_sum_profile(tree, g, mu, horizon, parse_filter(o.filter, budget), std::optional<S>(d));
  Outcome out;
  out.report["d"] = scalar_json(d);
  out.report["horizon"] = horizon;
  out.report["budget"] = budget;
  out.report["tree"] = to_json(tree);
  out.report["profile"] = profile_json(p);
  if (verify) {
    const bool ok = std::all_of(p.checkpoints.begin(), p.checkpoints.end(), [](const auto& c) { return c.holds; });
    const char* judgment = !p.hypothesis_met ? "hypothesis-not-met" : ok ? "pass" : "fail";
    out.report["judgment"] = judgment;
    out.status = p.hypothesis_met && !ok ? kVerificationFailed : kOk;
  }
  return out;
}

void delta_options(Command& c, DeltaOpts& o, bool with_tree) {
  c.option("--fn", o.fn, "function file")->required();
  c.option("--dist", o.dist, "distribution file")->required();
  c.option("--filter", o.filter, "all or not-biased-or-stop")->check(CLI::IsMember({"all", "not-biased-or-stop"}));
  c.option("--budget", o.budget, "query budget of the filter (default ceil(10 d^2))");
  if (with_tree) {
    c.option("--tree", o.tree, "tree computing g (default: chi_star optimal)");
    c.option("--horizon", o.horizon, "profile length (default ceil(10 d))");
  } else {
    c.option("--slabs", o.slabs, "check the 13i/20 threshold for i = 1..slabs");
  }
}

void register_verify(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("verify", "instance-by-instance checks with exit codes");
  group.require_subcommand(1);
  {
    auto& c = add(reg, group, "claim32", "process reach probabilities equal product reach", true);
    struct Opts {
      int instances = 100;
      ReachInstanceShape shape;
    };
    auto o = std::make_shared<Opts>();
    c.option("--instances", o->instances, "random instances");
    c.option("--max-block-bits", o->shape.max_block_bits, "largest m");
    c.option("--max-blocks", o->shape.max_blocks, "largest n");
    c.option("--max-depth", o->shape.max_depth, "largest tree depth");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() { return verify_claim32<S>(o->instances, o->shape, cm); });
    };
  }
  {
    auto& c = add(reg, group, "infobound", "mutual information against c (balance delta)^2", true);
    auto o = std::make_shared<std::pair<int, double>>(10000, kPinskerConstant);
    c.option("--samples", o->first, "random (g, mu, vertex) samples");
    c.option("--constant", o->second, "constant c in nats");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() { return verify_infobound<S>(o->first, o->second, cm); });
    };
  }
  {
    auto& c = add(reg, group, "deltasum", "delta sums of the conflict-optimal tree against 13i/20");
    auto o = std::make_shared<DeltaOpts>();
    delta_options(c, *o, false);
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() { return delta_profile<S>(*o, true); });
    };
  }
}

// ---------------------------------------------------------------- compose

template <class S>
Json composition_json(const CompositionReport<S>& r) {
  Json j{{"arity", r.arity},
         {"t", r.t},
         {"d", scalar_json(r.d)},
         {"exact_success", scalar_json(r.exact_success)},
         {"meets_threshold", r.meets_threshold},
         {"warnings", r.warnings},
         {"runs", r.runs},
         {"success", Json{{"mean", r.success}, {"se", r.success_se}, {"identity_within_3se", r.success_identity}}},
         {"y", Json{{"mean", r.mean_y}, {"se", r.y_se}, {"max", r.max_y}, {"bound", scalar_json(r.y_bound)},
                    {"holds", r.y_bound_holds}}},
         {"truncation", Json{{"limit", r.truncation_limit},
                             {"success", r.truncated_success},
                             {"se", r.truncated_se},
                             {"loss", r.truncation_loss},
                             {"holds", r.truncation_holds}}}};
  if (r.mean_x) {
    j["x"] = Json{{"mean", *r.mean_x}, {"se", *r.x_se}, {"min", *r.min_x}, {"bound", scalar_json(S(r.arity) * r.d)},
                  {"holds", *r.x_bound_holds}};
  }
  return j;
}

void register_compose(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("compose", "block composition f o g^n");
  group.require_subcommand(1);
  {
    auto& c = add(reg, group, "build", "materialize f o g^n");
    auto o = std::make_shared<std::tuple<std::string, std::string, int>>("", "", -1);
    c.option("--f", std::get<0>(*o), "outer relation file")->required();
    c.option("--g", std::get<1>(*o), "inner function file")->required();
    c.option("--n", std::get<2>(*o), "arity (default: width of f)");
    c.handler = [o](const Common&) {
      const auto f = load_relation(std::get<0>(*o));
      const auto g = load_fn(std::get<1>(*o));
      const int n = std::get<2>(*o) < 0 ? f.bits() : std::get<2>(*o);
      Outcome out;
      out.report["relation"] = to_json(compose(f, g, n).materialize());
      return out;
    };
  }
  {
    auto& c = add(reg, group, "experiment", "run T and Q on z ~ eta", true);
    struct Opts {
      std::string f, g, mu0, mu1, eta, tree;
      int runs = 10000;
      bool no_q = false;
    };
    auto o = std::make_shared<Opts>();
    c.option("--f", o->f, "outer relation file")->required();
    c.option("--g", o->g, "inner function file")->required();
    c.option("--mu0", o->mu0, "distribution on g^-1(0)")->required();
    c.option("--mu1", o->mu1, "distribution on g^-1(1)")->required();
    c.option("--eta", o->eta, "distribution of z")->required();
    c.option("--tree", o->tree, "A' over n * m variables")->required();
    c.option("--runs", o->runs, "Monte Carlo runs");
    c.flag("--no-q", o->no_q, "skip the completion Q");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto g = load_fn(o->g);
        const DistributionPair<S> pair(g, load_dist<S>(o->mu0), load_dist<S>(o->mu1));
        ExperimentOptions opt;
        opt.runs = o->runs;
        opt.seed = cm.seed;
        opt.workers = resolve_workers(cm.workers);
        opt.run_q = !o->no_q;
        opt.keep_rows = true;
        const auto r = composition_experiment(load_relation(o->f), pair, load_dist<S>(o->eta), load_tree(o->tree), opt);
        Outcome out;
        out.report = composition_json(r);
        std::ostringstream csv;
        csv << "run,z,y,success,truncated_success,x_total\n";
        for (const auto& row : r.rows)
          csv << row.run << ',' << input_string(row.z, r.arity) << ',' << row.y << ',' << row.success << ','
              << row.truncated_success << ',' << row.x_total << '\n';
        out.csv = csv.str();
        return out;
      });
    };
  }
}

// ---------------------------------------------------------------- diag

void register_diag(Registry& reg, CLI::App& root) {
  auto& group = *root.add_subcommand("diag", "information and truncation diagnostics");
  group.require_subcommand(1);
  {
    auto& c = add(reg, group, "info", "I(g(x) : x_j) at a vertex against c (balance delta)^2");
    struct Opts {
      std::string fn, dist, vertex;
      int var = 0;
      double constant = kPinskerConstant;
    };
    auto o = std::make_shared<Opts>();
    c.option("--fn", o->fn, "function file")->required();
    c.option("--dist", o->dist, "distribution file")->required();
    c.option("--vertex", o->vertex, "subcube such as 0*1 (default: whole cube)");
    c.option("--var", o->var, "queried variable, 0-based");
    c.option("--constant", o->constant, "constant c in nats");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto g = load_fn(o->fn);
        const Subcube v = o->vertex.empty() ? Subcube(g.bits()) : Subcube::parse(o->vertex);
        Outcome out;
        out.report = info_json(info_bound_check(g, load_dist<S>(o->dist), v, o->var, o->constant));
        return out;
      });
    };
  }
  {
    auto& c = add(reg, group, "deltasum", "expected delta per query step");
    auto o = std::make_shared<DeltaOpts>();
    delta_options(c, *o, true);
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() { return delta_profile<S>(*o, false); });
    };
  }
  {
    auto& c = add(reg, group, "truncate", "truncate-and-guess tree and its exact error");
    auto o = std::make_shared<std::tuple<std::string, std::string, int>>("", "", -1);
    c.option("--fn", std::get<0>(*o), "function file")->required();
    c.option("--dist", std::get<1>(*o), "distribution file")->required();
    c.option("--budget", std::get<2>(*o), "query budget (default ceil(10 d^2))");
    c.handler = [o](const Common& cm) {
      return dispatch(cm.mode, [&]<class S>() {
        const auto r = truncate_and_guess(load_fn(std::get<0>(*o)), load_dist<S>(std::get<1>(*o)), std::get<2>(*o));
        const auto& t = r.report;
        Outcome out;
        out.report = Json{{"tree", to_json(r.tree)},
                          {"d", scalar_json(t.d)},
                          {"budget", t.budget},
                          {"depth", t.depth},
                          {"stop_mass", scalar_json(t.stop_mass)},
                          {"budget_mass", scalar_json(t.budget_mass)},
                          {"biased_fraction", scalar_json(t.biased_fraction)},
                          {"event_probability", scalar_json(t.event_probability)},
                          {"error", scalar_json(t.error)},
                          {"within_47_95", t.within_bound},
                          {"biased_vertices", t.biased_vertices},
                          {"case1_holds", t.case1_holds}};
        return out;
      });
    };
  }
}

std::string sidecar_path(const Common& cm) {
  if (!cm.csv.empty()) return cm.csv;
  if (cm.output.empty()) return {};
  std::filesystem::path p(cm.output);
  p.replace_extension(".csv");
  return p.string();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Query complexity laboratory: exact complexity measures, conflict processes and composition checks.",
               "qclab");
  app.require_subcommand(1);
  app.set_version_flag("--version", QCLAB_VERSION);
  Registry reg;
  register_measure(reg, app);
  register_chi(reg, app);
  register_simulate(reg, app);
  register_verify(reg, app);
  register_compose(reg, app);
  register_diag(reg, app);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kPrecondition;
  }

  Command* cmd = nullptr;
  for (const auto& c : reg)
    if (c->app()->parsed()) cmd = c.get();
  if (cmd == nullptr) {
    err << "no command selected\n";
    return kPrecondition;
  }
  const Common& cm = cmd->common;
  if (!(cm.tol > 0.0)) {
    err << "error: --tol must be positive\n";
    return kPrecondition;
  }

  Outcome result;
  try {
    result = cmd->handler(cm);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  }

  Json report = std::move(result.report);
  report["command"] = cmd->name();
  report["config"] = cmd->config();
  report["version"] = QCLAB_VERSION;
  report["status"] = result.status == kOk ? "ok" : "verification-failed";
  const std::string text = canonical_dump(report);
  try {
    if (cm.output.empty()) {
      out << text;
    } else {
      write_text_file(cm.output, text);
    }
    if (const auto csv = sidecar_path(cm); !csv.empty() && !result.csv.empty()) write_text_file(csv, result.csv);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kPrecondition;
  }
  return result.status;
}

}  // namespace qclab::cli
