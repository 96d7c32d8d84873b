#include <doctest.h>

#include <random>

#include "ewrlnc/core.hpp"
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

TEST_CASE("l_max worked examples for K=[5,1,2,3]") {
  const GopLayout layout = make_layout(vec({5, 1, 2, 3}));
  CHECK(l_max(layout, vec({4, 1, 2, 3})) == 0);
  CHECK(l_max(layout, vec({5, 0, 2, 3})) == 1);
  CHECK(l_max(layout, vec({4, 3, 1, 3})) == 2);
  CHECK(l_max(layout, vec({0, 4, 4, 2})) == 3);
  CHECK(l_max(layout, vec({3, 0, 0, 8})) == 4);
  CHECK(l_max(layout, vec({5, 1, 2, 3})) == 4);  // exact per-layer receipt
}

TEST_CASE("l_max recursion trace matches the worked table") {
  const GopLayout layout = make_layout(vec({5, 1, 2, 3}));
  std::vector<LmaxStep> steps;
  CHECK(l_max(layout, vec({4, 3, 1, 3}), steps) == 2);
  REQUIRE(steps.size() == 4);
  CHECK(steps[0].base == 0);
  CHECK(steps[0].received == 4);
  CHECK(steps[0].required == 5);
  CHECK(steps[0].decodable == 0);
  CHECK(steps[1].base == 0);
  CHECK(steps[1].received == 7);  // 4 + 3
  CHECK(steps[1].required == 6);  // 5 + 1
  CHECK(steps[1].decodable == 2);
  CHECK(steps[2].base == 2);
  CHECK(steps[2].received == 1);
  CHECK(steps[2].required == 2);
  CHECK(steps[2].decodable == 0);
  CHECK(steps[3].base == 2);
  CHECK(steps[3].received == 4);  // 1 + 3
  CHECK(steps[3].required == 5);  // 2 + 3
  CHECK(steps[3].decodable == 0);
}

TEST_CASE("l_max truncated two-layer example") {
  const GopLayout layout = make_layout(vec({2, 2}));
  CHECK(l_max(layout, vec({1, 1})) == 0);
  CHECK(l_max(layout, vec({1, 3})) == 2);
  CHECK(l_max(layout, vec({3, 1})) == 1);  // surplus in window 1 is wasted
}

TEST_CASE("l_max contract violations") {
  const GopLayout layout = make_layout(vec({2, 2}));
  CHECK_THROWS_AS(l_max(layout, vec({1, 1, 1})), ContractError);
  CHECK_THROWS_AS(l_max(layout, vec({1})), ContractError);
  CHECK_THROWS_AS(l_max(layout, vec({-1, 2})), ContractError);
}

TEST_CASE("validate_weights") {
  CHECK(validate_weights(make_layout(vec({1, 1}), dvec({0.5, 1.0}))));
  CHECK(validate_weights(make_layout(vec({5, 1, 2, 3}), dvec({0.125, 0.25, 0.5, 1.0}))));
  CHECK(validate_weights(make_layout(vec({2, 2}), dvec({1.0, 1.0}))));  // nondecreasing is enough
  CHECK_FALSE(validate_weights(GopLayout{vec({1, 1}), dvec({1.0, 0.5})}));
  CHECK_FALSE(validate_weights(GopLayout{vec({1, 1}), dvec({0.5, 0.9})}));  // c_L != 1
  CHECK_FALSE(validate_weights(GopLayout{vec({1, 1}), dvec({0.0, 1.0})}));  // c must be positive
  CHECK_FALSE(validate_weights(GopLayout{vec({1, 1}), dvec({1.0})}));       // length mismatch
  CHECK_FALSE(validate_weights(GopLayout{vec({1, 0}), dvec({0.5, 1.0})}));  // empty layer
}

TEST_CASE("frame weights double per layer and end at 1") {
  CHECK(frame_weights(1) == dvec({1.0}));
  CHECK(frame_weights(2) == dvec({0.5, 1.0}));
  CHECK(frame_weights(4) == dvec({0.125, 0.25, 0.5, 1.0}));
}

TEST_CASE("make_layout rejects malformed input") {
  CHECK_THROWS_AS(make_layout(Eigen::VectorXi()), ContractError);
  CHECK_THROWS_AS(make_layout(vec({1, 0})), ContractError);
  CHECK_THROWS_AS(make_layout(vec({1, 1}), dvec({1.0})), ContractError);
}

TEST_CASE("l_max agrees with the literal recursion on random inputs") {
  std::mt19937 rng(20240811);
  std::uniform_int_distribution<int> layer_count(1, 5);
  std::uniform_int_distribution<int> packet_count(1, 4);
  for (int it = 0; it < 3000; ++it) {
    const int layers = layer_count(rng);
    Eigen::VectorXi k(layers), n(layers);
    for (int l = 0; l < layers; ++l) {
      k[l] = packet_count(rng);
      n[l] = std::uniform_int_distribution<int>(0, k[l] + 3)(rng);
    }
    const GopLayout layout = make_layout(k);
    CHECK(l_max(layout, n) == oracles::lmax(k, n));
  }
}

TEST_CASE("l_max properties") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> layer_count(1, 5);
  std::uniform_int_distribution<int> packet_count(1, 4);
  for (int it = 0; it < 2000; ++it) {
    const int layers = layer_count(rng);
    Eigen::VectorXi k(layers), n(layers);
    for (int l = 0; l < layers; ++l) {
      k[l] = packet_count(rng);
      n[l] = std::uniform_int_distribution<int>(0, k[l] + 3)(rng);
    }
    const GopLayout layout = make_layout(k);

    // endpoints
    CHECK(l_max(layout, k) == layers);
    CHECK(l_max(layout, Eigen::VectorXi::Zero(layers)) == 0);

    // monotone in every coordinate
    const int base = l_max(layout, n);
    const int bump = std::uniform_int_distribution<int>(0, layers - 1)(rng);
    Eigen::VectorXi more = n;
    ++more[bump];
    CHECK(l_max(layout, more) >= base);

    // adding receptions at or below the decodable prefix keeps it
    if (base >= 1) {
      Eigen::VectorXi low = n;
      ++low[std::uniform_int_distribution<int>(0, base - 1)(rng)];
      CHECK(l_max(layout, low) >= base);
    }
  }
}

TEST_CASE("single layer reduces to a threshold test") {
  const GopLayout layout = make_layout(vec({3}));
  CHECK(l_max(layout, vec({2})) == 0);
  CHECK(l_max(layout, vec({3})) == 1);
  CHECK(l_max(layout, vec({7})) == 1);
}
