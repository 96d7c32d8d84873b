#pragma once

#include <Eigen/Dense>

#include <functional>

#include "ewrlnc/core.hpp"

namespace ewrlnc {

// Probability of layer decoding outcomes under an erasure channel, one
// entry per layer; entry l-1 is the probability that the highest
// decodable layer equals l. The entries are disjoint events, so their
// sum is at most 1; the residual is the probability nothing decodes.
using LayerProbVector = Eigen::VectorXd;

// Probability of receiving exactly `received` packets per window out of
// the scheduled allocation, on a channel with erasure rate pe.
// Independent Bernoulli slots give a product of binomial terms.
double reception_prob(const TxPolicy& policy, const Eigen::Ref<const Eigen::VectorXi>& received,
                      double pe);

// P_l for l = 1..L: the chance the highest decodable layer is exactly l,
// summed over every reception vector below the allocation.
LayerProbVector layer_decoding_probs(const GopLayout& layout, const TxPolicy& policy, double pe);

// Expected performance metric: sum_l c_l * P_l. With frame weights this
// is the expected fraction of decoded frames; with throughput weights
// the expected fraction of delivered source packets.
double eta(const GopLayout& layout, const TxPolicy& policy, double pe);

// Weights that turn eta into expected throughput: c_l = (k_1+..+k_l)/M.
Eigen::VectorXd throughput_weights(const GopLayout& layout);

// Probability that every one of `packets` distinct packets is delivered
// at least once when `transmissions` uncoded copies are sent round-robin.
double uncoded_layer_success(int packets, int transmissions, double pe);

// eta of the uncoded round-robin baseline for the same allocation:
// layer l counts only when layers 1..l all deliver completely.
double uncoded_eta(const GopLayout& layout, const TxPolicy& policy, double pe);

namespace detail {

// Binomial pmf over 0..n successes with success probability p, computed
// from an exact Pascal row. 0^0 is treated as 1 so p in {0,1} works.
Eigen::VectorXd binomial_pmf(int n, double p);

// Invokes fn for every reception vector in the box [0, n_1] x ... x
// [0, n_L], in lexicographic order (first window varies slowest).
void for_each_reception(const TxPolicy& policy,
                        const std::function<void(const Eigen::VectorXi&)>& fn);

void check_pe(double pe);

}  // namespace detail

}  // namespace ewrlnc
