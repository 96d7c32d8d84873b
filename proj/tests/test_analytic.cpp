#include <doctest.h>

#include <random>

#include "ewrlnc/analytic.hpp"
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

struct RandomInstance {
  GopLayout layout;
  TxPolicy policy;
};

RandomInstance random_instance(std::mt19937& rng, int max_layers, int max_total_packets,
                               int budget) {
  const int layers = std::uniform_int_distribution<int>(1, max_layers)(rng);
  Eigen::VectorXi k(layers);
  int left = max_total_packets - layers;
  for (int l = 0; l < layers; ++l) {
    const int extra = std::uniform_int_distribution<int>(0, left)(rng);
    k[l] = 1 + extra;
    left -= extra;
  }
  Eigen::VectorXi alloc = Eigen::VectorXi::Zero(layers);
  for (int i = 0; i < budget; ++i) ++alloc[std::uniform_int_distribution<int>(0, layers - 1)(rng)];
  return RandomInstance{make_layout(k), TxPolicy{alloc}};
}

}  // namespace

TEST_CASE("reception_prob basics") {
  CHECK(reception_prob(TxPolicy{vec({2})}, vec({2}), 0.0) == doctest::Approx(1.0));
  CHECK(reception_prob(TxPolicy{vec({2})}, vec({1}), 0.5) == doctest::Approx(0.5));
  CHECK(reception_prob(TxPolicy{vec({1, 1})}, vec({1, 0}), 0.3) == doctest::Approx(0.21));
  CHECK(reception_prob(TxPolicy{vec({3})}, vec({0}), 0.0) == doctest::Approx(0.0));
}

TEST_CASE("reception_prob contract violations") {
  CHECK_THROWS_AS(reception_prob(TxPolicy{vec({2})}, vec({3}), 0.5), ContractError);
  CHECK_THROWS_AS(reception_prob(TxPolicy{vec({2})}, vec({-1}), 0.5), ContractError);
  CHECK_THROWS_AS(reception_prob(TxPolicy{vec({2})}, vec({1, 1}), 0.5), ContractError);
  CHECK_THROWS_AS(reception_prob(TxPolicy{vec({2})}, vec({2}), 1.0), ContractError);
  CHECK_THROWS_AS(reception_prob(TxPolicy{vec({2})}, vec({2}), -0.1), ContractError);
}

TEST_CASE("reception probabilities sum to one over the whole box") {
  std::mt19937 rng(42);
  for (int it = 0; it < 50; ++it) {
    const auto inst = random_instance(rng, 4, 6, 12);
    const double pe = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    double total = 0.0;
    detail::for_each_reception(inst.policy, [&](const Eigen::VectorXi& rx) {
      total += reception_prob(inst.policy, rx, pe);
    });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("layer_decoding_probs closed forms") {
  for (int n = 1; n <= 5; ++n) {
    const double pe = 0.37;
    const auto probs =
        layer_decoding_probs(make_layout(vec({1})), TxPolicy{vec({n})}, pe);
    CHECK(probs[0] == doctest::Approx(1.0 - std::pow(pe, n)).epsilon(1e-12));
  }
  const auto p2 = layer_decoding_probs(make_layout(vec({1, 1})), TxPolicy{vec({1, 1})}, 0.5);
  CHECK(p2[0] == doctest::Approx(0.25));
  CHECK(p2[1] == doctest::Approx(0.25));
  const auto p3 = layer_decoding_probs(make_layout(vec({1, 1})), TxPolicy{vec({0, 3})}, 0.5);
  CHECK(p3[0] == doctest::Approx(0.0));
  CHECK(p3[1] == doctest::Approx(0.5));
}

TEST_CASE("eta worked examples") {
  const GopLayout two = make_layout(vec({1, 1}), dvec({0.5, 1.0}));
  CHECK(eta(two, TxPolicy{vec({1, 1})}, 0.5) == doctest::Approx(0.375));
  CHECK(eta(two, TxPolicy{vec({2, 1})}, 0.5) == doctest::Approx(0.5625));
  // lossless channel with exact per-layer allocation decodes everything
  const GopLayout four = make_layout(vec({3, 1, 2, 2}));
  CHECK(eta(four, TxPolicy{four.packets}, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("eta requires valid weights") {
  const GopLayout bad{vec({1, 1}), dvec({1.0, 0.5})};
  CHECK_THROWS_AS(eta(bad, TxPolicy{vec({1, 1})}, 0.1), ContractError);
}

TEST_CASE("eta equals the slot-pattern oracle") {
  std::mt19937 rng(20250101);
  for (int it = 0; it < 120; ++it) {
    const auto inst =
        random_instance(rng, 3, 6, std::uniform_int_distribution<int>(0, 8)(rng));
    for (const double pe : {0.1, 0.5, 0.9}) {
      const double expect =
          oracles::eta_by_patterns(inst.layout.packets, inst.policy.allocation, pe,
                                   inst.layout.weights);
      CHECK(eta(inst.layout, inst.policy, pe) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("eta is monotone in pe and in the allocation") {
  std::mt19937 rng(99);
  for (int it = 0; it < 60; ++it) {
    const auto inst = random_instance(rng, 4, 6, 8);
    const double pe = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    const double base = eta(inst.layout, inst.policy, pe);
    CHECK(eta(inst.layout, inst.policy, std::min(0.99, pe + 0.05)) <= base + 1e-12);
    Eigen::VectorXi more = inst.policy.allocation;
    ++more[std::uniform_int_distribution<int>(0, inst.layout.layers() - 1)(rng)];
    CHECK(eta(inst.layout, TxPolicy{more}, pe) >= base - 1e-12);
  }
}

TEST_CASE("throughput weights") {
  CHECK(throughput_weights(make_layout(vec({4, 6}))) == dvec({0.4, 1.0}));
  CHECK(throughput_weights(make_layout(vec({10}))) == dvec({1.0}));
  CHECK(throughput_weights(make_layout(vec({4, 2, 4}))).isApprox(dvec({0.4, 0.6, 1.0})));
  CHECK(validate_weights(
      make_layout(vec({4, 2, 4}), throughput_weights(make_layout(vec({4, 2, 4}))))));
}

TEST_CASE("uncoded layer success") {
  CHECK(uncoded_layer_success(2, 5, 0.5) == doctest::Approx(0.65625));
  CHECK(uncoded_layer_success(3, 2, 0.5) == doctest::Approx(0.0));  // a packet is never sent
  CHECK(uncoded_layer_success(3, 2, 0.0) == doctest::Approx(0.0));
  CHECK(uncoded_layer_success(1, 4, 0.5) == doctest::Approx(0.9375));
  CHECK(uncoded_layer_success(2, 2, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("uncoded eta worked examples") {
  CHECK(uncoded_eta(make_layout(vec({1})), TxPolicy{vec({3})}, 0.5) == doctest::Approx(0.875));
  const GopLayout two = make_layout(vec({1, 1}), dvec({0.5, 1.0}));
  CHECK(uncoded_eta(two, TxPolicy{vec({1, 1})}, 0.0) == doctest::Approx(1.0));
  // p1 = p2 = 0.75: 0.5 * 0.75 * 0.25 + 1 * 0.75^2
  CHECK(uncoded_eta(two, TxPolicy{vec({2, 2})}, 0.5) == doctest::Approx(0.65625));
}

TEST_CASE("uncoded eta equals its slot-pattern oracle") {
  std::mt19937 rng(31337);
  for (int it = 0; it < 120; ++it) {
    const auto inst =
        random_instance(rng, 3, 6, std::uniform_int_distribution<int>(0, 8)(rng));
    for (const double pe : {0.2, 0.6}) {
      const double expect = oracles::uncoded_eta_by_patterns(
          inst.layout.packets, inst.policy.allocation, pe, inst.layout.weights);
      CHECK(uncoded_eta(inst.layout, inst.policy, pe) ==
            doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("coded delivery dominates uncoded delivery policy by policy") {
  std::mt19937 rng(555);
  for (int it = 0; it < 150; ++it) {
    const auto inst =
        random_instance(rng, 3, 6, std::uniform_int_distribution<int>(0, 8)(rng));
    const double pe = std::uniform_real_distribution<double>(0.0, 0.9)(rng);
    CHECK(uncoded_eta(inst.layout, inst.policy, pe) <=
          eta(inst.layout, inst.policy, pe) + 1e-12);
  }
}
