#include <doctest.h>

#include <random>

#include "ewrlnc/analytic.hpp"
#include "ewrlnc/mdp.hpp"
#include "ewrlnc/optimize.hpp"
#include "oracles.hpp"

using namespace ewrlnc;

namespace {

Eigen::VectorXi vec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (const int x : v) out[i++] = x;
  return out;
}

Eigen::VectorXd dvec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("transition worked examples") {
  const GopLayout layout = make_layout(vec({1, 1, 1}));
  CHECK(transition(layout, vec({1, 1, 0}), 3) == vec({1, 0, 0}));
  CHECK(transition(layout, vec({1, 1, 0}), 1) == vec({0, 1, 0}));
  CHECK(transition(layout, vec({1, 1, 0}), 2) == vec({1, 0, 0}));
  CHECK(transition(layout, vec({0, 0, 0}), 1) == vec({0, 0, 0}));
  CHECK(transition(layout, vec({0, 0, 0}), 3) == vec({0, 0, 0}));
  CHECK(transition(layout, vec({0, 1, 1}), 1) == vec({0, 1, 1}));  // W1 packet adds nothing
  CHECK_THROWS_AS(transition(layout, vec({1, 1, 0}), 0), ContractError);
  CHECK_THROWS_AS(transition(layout, vec({1, 1, 0}), 4), ContractError);
}

TEST_CASE("transition never increments a deficit") {
  std::mt19937 rng(123);
  for (int it = 0; it < 500; ++it) {
    const int layers = std::uniform_int_distribution<int>(1, 4)(rng);
    Eigen::VectorXi k(layers), s(layers);
    for (int l = 0; l < layers; ++l) {
      k[l] = std::uniform_int_distribution<int>(1, 3)(rng);
      s[l] = std::uniform_int_distribution<int>(0, k[l])(rng);
    }
    const GopLayout layout = make_layout(k);
    const int a = std::uniform_int_distribution<int>(1, layers)(rng);
    const Eigen::VectorXi next = transition(layout, s, a);
    CHECK((next.array() <= s.array()).all());
    CHECK((s - next).sum() <= 1);
    CHECK(next == oracles::step(s, a - 1));
  }
}

TEST_CASE("transition probabilities") {
  const GopLayout layout = make_layout(vec({1, 1, 1}));
  CHECK(transition_prob_single(layout, vec({1, 1, 1}), vec({0, 1, 1}), 1, 0.3) ==
        doctest::Approx(0.7));
  CHECK(transition_prob_single(layout, vec({1, 1, 1}), vec({1, 1, 1}), 1, 0.3) ==
        doctest::Approx(0.3));
  CHECK(transition_prob_single(layout, vec({0, 0, 0}), vec({0, 0, 0}), 2, 0.42) ==
        doctest::Approx(1.0));
  CHECK(transition_prob_single(layout, vec({1, 1, 1}), vec({1, 0, 1}), 1, 0.3) ==
        doctest::Approx(0.0));
}

TEST_CASE("terminal rewards") {
  const GopLayout layout = make_layout(vec({1, 1, 1}));
  const Eigen::VectorXd r = dvec({0.25, 0.5, 1.0});
  CHECK(terminal_reward_single(layout, vec({0, 1, 0}), r) == doctest::Approx(0.25));
  CHECK(terminal_reward_single(layout, vec({1, 0, 0}), r) == doctest::Approx(0.0));
  CHECK(terminal_reward_single(layout, vec({0, 0, 0}), r) == doctest::Approx(1.0));
  CHECK(terminal_reward_single(layout, vec({0, 0, 1}), r) == doctest::Approx(0.5));
}

TEST_CASE("deficit space round trip with d_1 most significant") {
  const GopLayout layout = make_layout(vec({2, 1, 3}));
  const DeficitSpace space(layout);
  CHECK(space.size() == 3 * 2 * 4);
  CHECK(space.index(vec({0, 0, 0})) == 0);
  CHECK(space.index(vec({0, 0, 1})) == 1);
  CHECK(space.index(vec({1, 0, 0})) == 8);  // stride of d_1 is (1+1)*(3+1)
  CHECK(space.index(layout.packets) == space.size() - 1);
  for (std::int64_t i = 0; i < space.size(); ++i) CHECK(space.index(space.deficits(i)) == i);
}

TEST_CASE("solve_single single layer closed form") {
  const MdpSolution sol = solve_single(make_layout(vec({1})), 0.5, 2);
  CHECK(sol.eta == doctest::Approx(0.75));  // 1 - pe^2
  CHECK(sol.horizon == 2);
  CHECK(sol.policy(1, 1) == 1);
}

TEST_CASE("single layer feedback adds nothing over the open loop") {
  for (const int k : {1, 2, 4}) {
    for (const int nt : {0, 1, 3, 6}) {
      for (const double pe : {0.0, 0.2, 0.6}) {
        const GopLayout layout = make_layout(vec({k}));
        const MdpSolution sol = solve_single(layout, pe, nt);
        Eigen::VectorXi alloc(1);
        alloc[0] = nt;
        CHECK(sol.eta == doctest::Approx(eta(layout, TxPolicy{alloc}, pe)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("two-layer adaptive value beats the best open loop") {
  const GopLayout layout = make_layout(vec({1, 1}), dvec({0.5, 1.0}));
  const MdpSolution sol = solve_single(layout, 0.5, 3);
  // frozen from the exhaustive adaptive-decision-tree oracle
  CHECK(sol.eta == doctest::Approx(0.6875).epsilon(1e-12));
  CHECK(sol.eta == doctest::Approx(oracles::adaptive_tree(layout.packets, 3, 0.5,
                                                          layout.weights)));
  CHECK(sol.eta >= 0.5625);  // best feedback-free policy from the analytic module
}

TEST_CASE("solve_single equals the adaptive tree oracle on small instances") {
  const std::vector<Eigen::VectorXi> layouts = {vec({1}), vec({2}), vec({3}),
                                                vec({1, 1}), vec({1, 2}), vec({2, 1})};
  for (const auto& k : layouts) {
    const GopLayout layout = make_layout(k);
    for (int nt = 0; nt <= 4; ++nt) {
      for (const double pe : {0.15, 0.5, 0.8}) {
        const MdpSolution sol = solve_single(layout, pe, nt);
        const double expect = oracles::adaptive_tree(k, nt, pe, layout.weights);
        CHECK(sol.eta == doctest::Approx(expect).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("forced open-loop evaluation reproduces the analytic metric") {
  const std::vector<Eigen::VectorXi> layouts = {vec({1, 1}), vec({2, 1}), vec({1, 2})};
  for (const auto& k : layouts) {
    const GopLayout layout = make_layout(k);
    for (const auto& policy : enumerate_policies(static_cast<int>(k.size()), 4)) {
      for (const double pe : {0.25, 0.5}) {
        const double open = oracles::open_loop_value(
            k, oracles::schedule_of(policy.allocation), 0, pe, layout.weights);
        CHECK(open == doctest::Approx(eta(layout, policy, pe)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("value tables are bounded and monotone") {
  std::mt19937 rng(2024);
  for (int it = 0; it < 40; ++it) {
    const int layers = std::uniform_int_distribution<int>(1, 3)(rng);
    Eigen::VectorXi k(layers);
    for (int l = 0; l < layers; ++l) k[l] = std::uniform_int_distribution<int>(1, 3)(rng);
    const GopLayout layout = make_layout(k);
    const double pe = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const int horizon = std::uniform_int_distribution<int>(1, 6)(rng);
    const MdpSolution sol = solve_single(layout, pe, horizon);
    const DeficitSpace space(layout);

    CHECK((sol.values.array() >= -1e-15).all());
    CHECK((sol.values.array() <= 1.0 + 1e-15).all());
    for (int t = 1; t <= horizon; ++t) {
      CHECK((sol.values.col(t).array() >= sol.values.col(t - 1).array() - 1e-12).all());
      for (std::int64_t s = 0; s < space.size(); ++s) {
        CHECK(sol.policy(s, t) >= 1);
        CHECK(sol.policy(s, t) <= layers);
      }
    }

    // componentwise smaller deficits are worth at least as much
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::VectorXi s(layers);
      for (int l = 0; l < layers; ++l) s[l] = std::uniform_int_distribution<int>(0, k[l])(rng);
      Eigen::VectorXi smaller = s;
      const int l = std::uniform_int_distribution<int>(0, layers - 1)(rng);
      if (smaller[l] > 0) --smaller[l];
      CHECK(sol.values(space.index(smaller), horizon) >=
            sol.values(space.index(s), horizon) - 1e-12);
    }
  }
}

TEST_CASE("full feedback dominates the optimal open loop") {
  std::mt19937 rng(777);
  for (int it = 0; it < 60; ++it) {
    const int layers = std::uniform_int_distribution<int>(1, 3)(rng);
    Eigen::VectorXi k(layers);
    for (int l = 0; l < layers; ++l) k[l] = std::uniform_int_distribution<int>(1, 3)(rng);
    const GopLayout layout = make_layout(k);
    const double pe = std::uniform_real_distribution<double>(0.05, 0.9)(rng);
    const int nt = std::uniform_int_distribution<int>(0, 8)(rng);
    const MdpSolution sol = solve_single(layout, pe, nt);
    const SinglePolicyResult open = optimize_single(layout, pe, nt, Scheme::Rlnc);
    CHECK(sol.eta >= open.eta - 1e-9);
  }
}

TEST_CASE("state-space cap raises a resource error naming the size") {
  const GopLayout layout = make_layout(vec({3, 3, 3}));
  CHECK_THROWS_AS(solve_single(layout, 0.1, 10, 100), ResourceLimitError);
  try {
    solve_single(layout, 0.1, 10, 100);
  } catch (const ResourceLimitError& e) {
    const std::string what = e.what();
    CHECK(what.find("cap") != std::string::npos);
    CHECK(what.find("64") != std::string::npos);  // 4^3 states
  }
  CHECK_THROWS_AS(
      solve_multi(layout, dvec({0.1, 0.2}), 10, dvec({0.5, 0.5}), 1000),
      ResourceLimitError);
}

TEST_CASE("nonstandard reward vectors are flagged") {
  const GopLayout layout = make_layout(vec({1, 1}));
  CHECK_FALSE(solve_single(layout, 0.5, 1).nonstandard_rewards);
  CHECK(solve_single(layout, 0.5, 1, dvec({1.0, 0.5})).nonstandard_rewards);
}

TEST_CASE("solve_multi degenerates to solve_single for one user") {
  const GopLayout layout = make_layout(vec({2, 1}));
  const MdpSolution multi = solve_multi(layout, dvec({0.3}), 4, dvec({1.0}));
  const MdpSolution single = solve_single(layout, 0.3, 4);
  CHECK(multi.eta == doctest::Approx(single.eta).epsilon(1e-12));
  CHECK(multi.values.isApprox(single.values, 1e-12));
  CHECK(multi.policy == single.policy);
}

TEST_CASE("solve_multi symmetric single-action case") {
  const GopLayout layout = make_layout(vec({1}));
  for (const double pe : {0.2, 0.5}) {
    const MdpSolution sol = solve_multi(layout, dvec({pe, pe}), 1, dvec({0.5, 0.5}));
    CHECK(sol.eta == doctest::Approx(1.0 - pe).epsilon(1e-12));
  }
}

TEST_CASE("solve_multi dominates the best open-loop aggregate") {
  const GopLayout layout = make_layout(vec({1, 1}));
  const Eigen::VectorXd pes = dvec({0.1, 0.3});
  const Eigen::VectorXd w = dvec({0.5, 0.5});
  const MdpSolution sol = solve_multi(layout, pes, 2, w);
  const MultiPolicyResult open =
      optimize_multi(layout, pes, 2, AggregateSpec::linear(w), Scheme::Rlnc);
  CHECK(sol.eta >= open.eta_tot - 1e-9);
  CHECK(w.dot(sol.per_user_eta) == doctest::Approx(sol.eta).epsilon(1e-9));
}

TEST_CASE("solve_multi per-user values match a two-sided symmetric setup") {
  const GopLayout layout = make_layout(vec({1, 1}));
  const MdpSolution sol = solve_multi(layout, dvec({0.25, 0.25}), 3, dvec({0.5, 0.5}));
  CHECK(sol.per_user_eta[0] == doctest::Approx(sol.per_user_eta[1]).epsilon(1e-12));
}
