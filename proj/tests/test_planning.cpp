#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "mbr/planning.hpp"
#include "oracles.hpp"

using namespace mbr;

TEST_CASE("two-armed Bernoulli bandit matches the hand-derived values") {
  // Known theta: 0.9 per step. Bayes-optimal: 0.5, then the arm favoured by
  // the first reward pays 0.82. Thompson: 0.5, then 0.9 * 0.82 + 0.1 * 0.18.
  const auto pf = gen::bernoulli2x2();
  const auto& e = pf.base;
  const auto known = optimal_policy_known_theta(e);
  CHECK(known.report.value == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(bcr_exact(e).value == doctest::Approx(1.32).epsilon(1e-12));
  CHECK(minimum_bayesian_regret(e) == doctest::Approx(0.48).epsilon(1e-12));
  const auto ts = thompson_value(e);
  CHECK(ts.value == doctest::Approx(1.256).epsilon(1e-12));
  CHECK(known.report.value - ts.value == doctest::Approx(0.544).epsilon(1e-12));
  REQUIRE(ts.per_time_values.size() == 2);
  CHECK(ts.per_time_values[0] == doctest::Approx(0.5));
  CHECK(ts.per_time_values[1] == doctest::Approx(0.756));
}

TEST_CASE("known-parameter value equals the brute-force Markov optimum") {
  RandomSource rng(11, 0);
  for (int i = 0; i < 60; ++i) {
    const auto n = gen::sizes(rng, {3, 3, 3, 3, 3});
    const auto e = gen::spec(rng, n, rng.uniform_int(2) == 0, gen::any_kernel(rng), rng.uniform_int(2) == 0);
    CHECK(optimal_policy_known_theta(e).report.value == doctest::Approx(oracle::known_value(e)).epsilon(1e-12));
  }
}

TEST_CASE("exact Bayesian value equals brute force over all history policies") {
  RandomSource rng(12, 0);
  int checked = 0;
  while (checked < 40) {
    const auto n = gen::sizes(rng, {2, 2, 2, 3, 3}, 2);
    const auto e = gen::spec(rng, n, rng.uniform_int(2) == 0, gen::any_kernel(rng), false);
    if (oracle::policy_count_log2(e) > 16) continue;
    const double brute = oracle::bcr_bruteforce(e);
    CHECK(bcr_exact(e).value == doctest::Approx(brute).epsilon(1e-12));
    CHECK(oracle::bcr_expectimax(e) == doctest::Approx(brute).epsilon(1e-12));
    ++checked;
  }
}

TEST_CASE("exact Bayesian value equals expectimax on larger instances") {
  RandomSource rng(14, 0);
  for (int i = 0; i < 60; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             rng.uniform_int(2) == 0);
    CHECK(bcr_exact(e).value == doctest::Approx(oracle::bcr_expectimax(e)).epsilon(1e-12));
  }
}

TEST_CASE("the Bayes-optimal policy table reproduces its value") {
  RandomSource rng(13, 0);
  for (int i = 0; i < 30; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), false, gen::any_kernel(rng), false);
    const auto r = bcr_exact(e);
    REQUIRE(r.policy);
    CHECK(r.policy->information_kind() == InformationKind::History);
    CHECK(evaluate_policy(e, *r.policy).value == doctest::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("Thompson value equals the trajectory-enumeration oracle") {
  RandomSource rng(14, 0);
  for (int i = 0; i < 60; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             rng.uniform_int(2) == 0);
    CHECK(thompson_value(e).value == doctest::Approx(oracle::thompson_value(e)).epsilon(1e-10));
  }
}

TEST_CASE("minimum Bayesian regret is non-negative and below the Thompson regret") {
  RandomSource rng(15, 0);
  for (int i = 0; i < 100; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             rng.uniform_int(2) == 0);
    const double known = optimal_policy_known_theta(e).report.value;
    const double bcr = bcr_exact(e).value;
    const double ts = thompson_value(e).value;
    CHECK(known - bcr >= -1e-10);
    CHECK(bcr >= ts - 1e-10);
  }
}

TEST_CASE("a single parameter leaves no regret") {
  RandomSource rng(16, 0);
  for (int i = 0; i < 20; ++i) {
    auto n = gen::sizes(rng, {3, 3, 3, 1, 3});
    const auto e = gen::spec(rng, n, false, gen::any_kernel(rng), false);
    CHECK(std::abs(minimum_bayesian_regret(e)) <= 1e-12);
  }
}

TEST_CASE("knowledge kernels recover the history and parameter limits") {
  RandomSource rng(17, 0);
  for (int i = 0; i < 30; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {2, 2, 2, 2, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             false);
    const double bcr = bcr_exact(e).value;
    const double known = optimal_policy_known_theta(e).report.value;
    const double markov = oracle::best_markov_bayes(e);
    const auto hist = history_knowledge(e);
    CHECK(bcr_with_knowledge(e, hist).value == doctest::Approx(bcr).epsilon(1e-12));
    CHECK(bcr_with_knowledge(e, theta_knowledge(e)).value == doctest::Approx(known).epsilon(1e-12));
    CHECK(bcr_with_knowledge(e, constant_knowledge(e)).value == doctest::Approx(markov).epsilon(1e-12));
    CHECK(bcr_with_processing(e, hist, constant_processing(e, hist)).value ==
          doctest::Approx(markov).epsilon(1e-12));
    CHECK(bcr_with_processing(e, hist, identity_processing(e, hist)).value == doctest::Approx(bcr).epsilon(1e-12));
  }
}

TEST_CASE("canonical bandit under degraded information") {
  const auto& e = gen::bernoulli2x2().base;
  const auto hist = history_knowledge(e);
  CHECK(bcr_with_knowledge(e, hist).value == doctest::Approx(1.32));
  CHECK(bcr_with_knowledge(e, theta_knowledge(e)).value == doctest::Approx(1.8));
  CHECK(bcr_with_knowledge(e, constant_knowledge(e)).value == doctest::Approx(1.0));
  CHECK(bcr_with_processing(e, hist, identity_processing(e, hist)).value == doctest::Approx(1.32));
  CHECK(bcr_with_processing(e, hist, constant_processing(e, hist)).value == doctest::Approx(1.0));
}

TEST_CASE("random knowledge and processing kernels match brute force") {
  RandomSource rng(18, 0);
  int checked = 0;
  while (checked < 60) {
    const auto e = gen::spec(rng, gen::sizes(rng, {2, 2, 2, 2, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             false);
    const auto k = gen::knowledge(rng, e, gen::between(rng, 1, 2));
    const auto p = gen::processing(rng, e, k, gen::between(rng, 1, 3));
    double kb = 0.0, pb = 0.0;
    try {
      kb = oracle::knowledge_bruteforce(e, k);
      pb = oracle::processing_bruteforce(e, k, p);
    } catch (const std::invalid_argument&) {
      continue;
    }
    const double kv = bcr_with_knowledge(e, k).value;
    const double pv = bcr_with_processing(e, k, p).value;
    CHECK(kv == doctest::Approx(kb).epsilon(1e-12));
    CHECK(pv == doctest::Approx(pb).epsilon(1e-12));
    CHECK(kv >= pv - 1e-9);
    ++checked;
  }
}

TEST_CASE("processing never beats the knowledge it degrades") {
  RandomSource rng(19, 0);
  for (int i = 0; i < 80; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {2, 2, 3, 3, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             false);
    const auto k = gen::knowledge(rng, e, gen::between(rng, 1, 3));
    const auto p = gen::processing(rng, e, k, gen::between(rng, 1, 3));
    CHECK(bcr_with_knowledge(e, k).value >= bcr_with_processing(e, k, p).value - 1e-9);
  }
}

TEST_CASE("relabelling actions or parameters leaves every value unchanged") {
  RandomSource rng(20, 0);
  for (int i = 0; i < 40; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), false, gen::any_kernel(rng), true);
    const int A = e.n_actions, P = e.n_params;
    auto pa = e;  // action a becomes A - 1 - a
    auto pt = e;  // parameter th becomes P - 1 - th
    for (int s = 0; s < e.n_states; ++s)
      for (int a = 0; a < A; ++a)
        for (int th = 0; th < P; ++th) {
          pa.trans_row(s, A - 1 - a, th) = e.trans_row(s, a, th);
          pt.trans_row(s, a, P - 1 - th) = e.trans_row(s, a, th);
        }
    for (int a = 0; a < A; ++a) pa.reward.col(A - 1 - a) = e.reward.col(a);
    for (int th = 0; th < P; ++th) {
      pt.prior(P - 1 - th) = e.prior(th);
      pt.initial_state.col(P - 1 - th) = e.initial_state.col(th);
      for (int s = 0; s < e.n_states; ++s) pt.outcome_row(s, P - 1 - th) = e.outcome_row(s, th);
    }
    const double known = optimal_policy_known_theta(e).report.value;
    const double bcr = bcr_exact(e).value;
    const double ts = thompson_value(e).value;
    for (const auto* f : {&pa, &pt}) {
      CHECK(optimal_policy_known_theta(*f).report.value == doctest::Approx(known).epsilon(1e-12));
      CHECK(bcr_exact(*f).value == doctest::Approx(bcr).epsilon(1e-12));
      CHECK(thompson_value(*f).value == doctest::Approx(ts).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaling rewards by a power of two scales values and keeps decisions") {
  RandomSource rng(21, 0);
  for (int i = 0; i < 40; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), rng.uniform_int(2) == 0, gen::any_kernel(rng),
                             rng.uniform_int(2) == 0);
    for (double k : {0.25, 8.0}) {
      auto f = e;
      f.reward *= k;
      const auto a = optimal_policy_known_theta(e), b = optimal_policy_known_theta(f);
      CHECK(a.psi.actions == b.psi.actions);
      CHECK(b.report.value == k * a.report.value);
      CHECK(bcr_exact(f).value == doctest::Approx(k * bcr_exact(e).value).epsilon(1e-14));
      CHECK(thompson_value(f).value == doctest::Approx(k * thompson_value(e).value).epsilon(1e-14));
    }
  }
}

TEST_CASE("node budget is enforced") {
  const auto& e = gen::bernoulli2x2().base;
  CHECK_THROWS_WITH_AS(bcr_exact(e, 3), doctest::Contains("BudgetExceeded"), Error);
  CHECK_THROWS_AS(thompson_value(e, 3), Error);
}

TEST_CASE("Thompson simulation agrees with the exact value") {
  RandomSource rng(22, 0);
  for (int i = 0; i < 5; ++i) {
    const auto e = gen::spec(rng, gen::sizes(rng, {3, 3, 3, 3, 3}), false, gen::Kernel::Dense, false);
    const auto psi = optimal_policy_known_theta(e).psi;
    const auto mc = simulate_thompson(e, psi, 100'000, 5 + i);
    const double exact = thompson_value(e).value;
    CHECK(std::abs(mc.mean - exact) <= 4.0 * mc.standard_error + 1e-12);
  }
}

TEST_CASE("inconsistent kernels are rejected") {
  auto e = gen::bernoulli2x2().base;
  auto k = history_knowledge(e);
  k.step(0, 0) += 0.5;
  CHECK_FALSE(validate(e, k).empty());
  CHECK_THROWS_AS(bcr_with_knowledge(e, k), Error);
  const auto h = history_knowledge(e);
  auto p = identity_processing(e, h);
  p.per_step.pop_back();
  CHECK_FALSE(validate(e, h, p).empty());
}
