#include "ewrlnc/analytic.hpp"

#include <cmath>
#include <vector>

namespace ewrlnc {

namespace detail {

void check_pe(double pe) {
  if (!(pe >= 0.0 && pe < 1.0))
    throw_contract("erasure rate must lie in [0, 1), got " + std::to_string(pe));
}

Eigen::VectorXd binomial_pmf(int n, double p) {
  Eigen::VectorXd coeff(n + 1);
  coeff[0] = 1.0;
  for (int r = 1; r <= n; ++r) coeff[r] = coeff[r - 1] * double(n - r + 1) / double(r);
  Eigen::VectorXd pmf(n + 1);
  const double q = 1.0 - p;
  for (int r = 0; r <= n; ++r)
    pmf[r] = coeff[r] * std::pow(p, double(r)) * std::pow(q, double(n - r));
  return pmf;
}

void for_each_reception(const TxPolicy& policy,
                        const std::function<void(const Eigen::VectorXi&)>& fn) {
  const int windows = policy.windows();
  Eigen::VectorXi rx = Eigen::VectorXi::Zero(windows);
  for (;;) {
    fn(rx);
    int i = windows - 1;
    while (i >= 0 && rx[i] == policy.allocation[i]) rx[i--] = 0;
    if (i < 0) break;
    ++rx[i];
  }
}

}  // namespace detail

double reception_prob(const TxPolicy& policy, const Eigen::Ref<const Eigen::VectorXi>& received,
                      double pe) {
  detail::check_pe(pe);
  if (received.size() != policy.allocation.size())
    detail::throw_contract("reception_prob: policy spans " +
                           std::to_string(policy.allocation.size()) + " windows, reception " +
                           std::to_string(received.size()));
  if ((received.array() < 0).any() || (received.array() > policy.allocation.array()).any())
    detail::throw_contract("reception_prob: reception counts must lie in [0, n_l^t]");
  const double q = 1.0 - pe;
  double prob = 1.0;
  for (int l = 0; l < policy.windows(); ++l) {
    const int n = policy.allocation[l];
    const int r = received[l];
    double coeff = 1.0;
    for (int i = 1; i <= r; ++i) coeff *= double(n - i + 1) / double(i);
    prob *= coeff * std::pow(q, double(r)) * std::pow(pe, double(n - r));
  }
  return prob;
}

LayerProbVector layer_decoding_probs(const GopLayout& layout, const TxPolicy& policy, double pe) {
  detail::check_pe(pe);
  const int layers = layout.layers();
  if (policy.windows() != layers)
    detail::throw_contract("layer_decoding_probs: policy spans " +
                           std::to_string(policy.windows()) + " windows, layout has " +
                           std::to_string(layers) + " layers");
  std::vector<Eigen::VectorXd> pmf;
  pmf.reserve(layers);
  for (int l = 0; l < layers; ++l)
    pmf.push_back(detail::binomial_pmf(policy.allocation[l], 1.0 - pe));

  LayerProbVector probs = LayerProbVector::Zero(layers);
  detail::for_each_reception(policy, [&](const Eigen::VectorXi& rx) {
    double p = 1.0;
    for (int l = 0; l < layers; ++l) p *= pmf[l][rx[l]];
    const int lm = l_max(layout, rx);
    if (lm >= 1) probs[lm - 1] += p;
  });
  return probs;
}

double eta(const GopLayout& layout, const TxPolicy& policy, double pe) {
  if (!validate_weights(layout))
    detail::throw_contract("eta: layout weights violate the cumulative-importance invariants");
  return layout.weights.dot(layer_decoding_probs(layout, policy, pe));
}

Eigen::VectorXd throughput_weights(const GopLayout& layout) {
  const int layers = layout.layers();
  const double total = layout.total_packets();
  Eigen::VectorXd c(layers);
  int running = 0;
  for (int l = 0; l < layers; ++l) {
    running += layout.packets[l];
    c[l] = double(running) / total;
  }
  return c;
}

double uncoded_layer_success(int packets, int transmissions, double pe) {
  detail::check_pe(pe);
  if (packets < 1) detail::throw_contract("uncoded_layer_success: packets must be >= 1");
  if (transmissions < 0)
    detail::throw_contract("uncoded_layer_success: transmissions must be >= 0");
  const int rounds = transmissions / packets;       // every packet sent this often
  const int extra = transmissions - rounds * packets;  // first `extra` packets get one more
  const double p_base = 1.0 - std::pow(pe, double(rounds));
  const double p_extra = 1.0 - std::pow(pe, double(rounds + 1));
  return std::pow(p_base, double(packets - extra)) * std::pow(p_extra, double(extra));
}

double uncoded_eta(const GopLayout& layout, const TxPolicy& policy, double pe) {
  if (!validate_weights(layout))
    detail::throw_contract("uncoded_eta: layout weights violate the cumulative-importance invariants");
  const int layers = layout.layers();
  if (policy.windows() != layers)
    detail::throw_contract("uncoded_eta: policy/layout layer count mismatch");
  Eigen::VectorXd success(layers);
  for (int l = 0; l < layers; ++l)
    success[l] = uncoded_layer_success(layout.packets[l], policy.allocation[l], pe);
  double total = 0.0;
  double prefix = 1.0;
  for (int l = 0; l < layers; ++l) {
    prefix *= success[l];
    const double stop = (l + 1 < layers) ? 1.0 - success[l + 1] : 1.0;
    total += layout.weights[l] * prefix * stop;
  }
  return total;
}

}  // namespace ewrlnc
