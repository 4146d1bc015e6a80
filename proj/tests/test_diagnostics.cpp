#include "fixtures.hpp"
#include "oracles.hpp"
#include "qclab/diagnostics.hpp"
#include "qclab/measures.hpp"
#include "qclab/process.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fx;

namespace {

// I(g : x_j | C) from the joint table of (g, x_j) under mu | C.
double brute_mi(const PartialFn& g, const InputDistribution<Rational>& mu, const Subcube& c, int j) {
  std::vector<std::vector<double>> joint(2, std::vector<double>(2, 0.0));
  double total = 0;
  for (Input x = 0; x < mu.size(); ++x) {
    if (!c.contains(x) || !g.is_valid(x)) continue;
    const double w = to_double(mu[x]);
    joint[static_cast<std::size_t>(g(x))][static_cast<std::size_t>(oracle::bit(x, j, g.bits()))] += w;
    total += w;
  }
  for (auto& row : joint)
    for (auto& e : row) e /= total;
  return oracle::mutual_information(joint);
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("information bound anchors") {
    const auto xr = info_bound_check(xor2(), InputDistribution<Rational>::uniform(2), Subcube(2), 0);
    CHECK(xr.delta == 0);
    CHECK(xr.rhs == 0.0);
    CHECK(xr.holds);

    const auto orr = info_bound_check(or2(), InputDistribution<Rational>::uniform(2), Subcube(2), 0);
    CHECK(orr.mi_nats == doctest::Approx(0.21576155433883568).epsilon(1e-12));
    CHECK(orr.balance == q("3/16"));
    CHECK(orr.delta == q("2/3"));
    CHECK(orr.rhs == doctest::Approx(0.125));
    CHECK(orr.holds);

    const auto bal = info_bound_check(id1(), InputDistribution<Rational>::uniform(1), Subcube(1), 0);
    CHECK(bal.mi_nats == doctest::Approx(std::log(2.0)));
    CHECK(bal.mi_bits == doctest::Approx(1.0));
    CHECK(bal.rhs == doctest::Approx(0.5));
    CHECK(bal.holds);
    CHECK(bal.literal_rhs == doctest::Approx(2.0));
    CHECK_FALSE(bal.literal_holds);
  }

  TEST_CASE("one-sided vertex passes trivially") {
    const auto r = info_bound_check(or2(), InputDistribution<Rational>::uniform(2), Subcube(2).with(0, 1), 1);
    CHECK(r.one_sided);
    CHECK(r.balance == 0);
    CHECK(r.rhs == 0.0);
    CHECK(r.holds);
    CHECK_THROWS_AS(info_bound_check(or2(), InputDistribution<Rational>::point(2, 0), Subcube(2).with(0, 1), 1),
                    ZeroMassError);
  }

  TEST_CASE("information matches the brute-force joint table and the bound holds") {
    std::mt19937_64 rng(3);
    for (int s = 0; s < 300; ++s) {
      const int m = 1 + static_cast<int>(rng() % 3);
      const auto g = random_partial_fn(m, rng());
      const auto mu = random_rational_distribution(m, g.valid_inputs(), rng());
      Subcube c(m);
      for (int j = 0; j < m; ++j)
        if (rng() % 3 == 0) c = c.with(j, static_cast<int>(rng() & 1));
      const auto free = c.free_vars();
      if (free.empty() || mass_of(mu, c) == 0) continue;
      const int j = free[rng() % free.size()];
      const auto r = info_bound_check(g, mu, c, j);
      CHECK(r.mi_nats == doctest::Approx(brute_mi(g, mu, c, j)).epsilon(1e-9));
      CHECK(r.holds);
      CHECK(r.balance <= q("1/4"));
      CHECK(r.delta <= 1);
    }
  }

  TEST_CASE("delta profile anchors") {
    const auto id = delta_sum_profile(query(0, leaf(0), leaf(1)), id1(), InputDistribution<Rational>::uniform(1), 1,
                                      TranscriptFilter::all());
    CHECK(id.expectation == std::vector<Rational>{1});

    const auto xp = xor2_pair();
    const auto xt = chi_star(xp).optimal_tree;
    const auto x = delta_sum_profile(xt, xor2(), InputDistribution<Rational>::uniform(2), 2, TranscriptFilter::all());
    CHECK(x.expectation == std::vector<Rational>{0, 1});
    CHECK(x.running_sum == std::vector<Rational>{0, 1});
    CHECK(x.hypothesis_met);

    const auto ot = chi_star(or2_pair()).optimal_tree;
    const Rational d = q("4/3");
    const int h = static_cast<int>(ceil_to_int(Rational(10) * d));
    const auto o = delta_sum_profile(ot, or2(), InputDistribution<Rational>::uniform(2), h, TranscriptFilter::all(),
                                     std::optional<Rational>(d));
    CHECK(h == 14);
    CHECK(o.expectation[0] == q("2/3"));
    CHECK(o.expectation[1] == 1);
    REQUIRE(o.checkpoints.size() == 1);
    CHECK(o.checkpoints[0].holds);
    CHECK(o.checkpoints[0].threshold == q("13/20"));
  }

  TEST_CASE("filtered profile reports an unmet hypothesis") {
    const auto ot = chi_star(or2_pair()).optimal_tree;
    const auto o = delta_sum_profile(ot, or2(), InputDistribution<Rational>::uniform(2), 14,
                                     TranscriptFilter::not_biased_or_stop(18));
    CHECK(o.filter_probability == 0);
    CHECK_FALSE(o.hypothesis_met);
    CHECK(o.expectation.empty());
  }

  TEST_CASE("filter keeps long unbiased transcripts") {
    // Parity on three bits under uniform mu: every vertex has balance 1/4.
    const auto g = PartialFn::from_string(3, "01101001");
    const auto t = parity_tree(3);
    const auto u = InputDistribution<Rational>::uniform(3);
    const auto p = delta_sum_profile(t, g, u, 3, TranscriptFilter::not_biased_or_stop(2));
    CHECK(p.filter_probability == 1);
    CHECK(p.expectation == std::vector<Rational>{0, 0, 1});
    const auto stop = delta_sum_profile(t, g, u, 3, TranscriptFilter::not_biased_or_stop(3));
    CHECK(stop.filter_probability == 0);
  }

  TEST_CASE("truncate and guess anchors") {
    const auto u = InputDistribution<Rational>::uniform(2);
    const auto z = truncate_and_guess(or2(), u, 0);
    CHECK(z.report.error == q("1/4"));
    CHECK(z.report.depth == 0);
    const auto full = truncate_and_guess(or2(), u);
    CHECK(full.report.budget == 18);
    CHECK(full.report.error == 0);
    CHECK(full.tree == chi_star(DistributionPair<Rational>::from_mixture(or2(), u)).optimal_tree);
    CHECK(full.report.stop_mass == 1);
  }

  TEST_CASE("truncate and guess on random partial functions") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto g = random_partial_fn(3, 400 + s);
      const auto mu = random_rational_distribution(3, g.valid_inputs(), 500 + s);
      if (value_mass(mu, g, Subcube(3), 0) == 0 || value_mass(mu, g, Subcube(3), 1) == 0) continue;
      const auto r = truncate_and_guess(g, mu);
      CHECK(r.report.error * 95 <= 47);
      CHECK(r.report.depth <= r.report.budget);
      Rational prev(1);
      for (int b = 0; b <= r.report.budget; ++b) {
        const auto rb = truncate_and_guess(g, mu, b);
        CHECK(rb.report.error <= prev);
        CHECK(rb.report.case1_holds);
        CHECK(rb.report.error == error_under(rb.tree, g, mu));
        CHECK(rb.report.stop_mass + rb.report.budget_mass == 1);
        prev = rb.report.error;
      }
    }
  }

  TEST_CASE("biased mass and event probability") {
    // mu puts 1/10 on g = 0: the root already has balance 9/100 <= 1/9.
    const auto mu = dist(2, {"1/10", "3/10", "3/10", "3/10"});
    const auto r = truncate_and_guess(or2(), mu, 1);
    CHECK(r.report.biased_fraction == 1);
    CHECK(r.report.event_probability == 0);
    CHECK(r.report.biased_vertices >= 1);
    CHECK(r.report.case1_holds);
  }

  TEST_CASE("chain rule of transcript information") {
    for (std::uint64_t s = 0; s < 15; ++s) {
      const auto g = random_partial_fn(3, 600 + s);
      const auto mu = random_rational_distribution(3, g.valid_inputs(), 700 + s);
      if (value_mass(mu, g, Subcube(3), 0) == 0 || value_mass(mu, g, Subcube(3), 1) == 0) continue;
      const auto t = chi_star(DistributionPair<Rational>::from_mixture(g, mu)).optimal_tree;
      const auto info = transcript_information(t, g, mu);
      CHECK(std::abs(info.direct - info.chain_sum) <= 1e-9);
    }
  }
}
