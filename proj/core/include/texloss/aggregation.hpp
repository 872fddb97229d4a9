#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "texloss/mste.hpp"

namespace texloss {

// Parameters of the attention aggregator.  ΔH enters as a 1-channel map,
// so the 1x1 query/key convolutions are per-position linear maps 1 -> cq
// (weight vectors wq, wk) and the value map is the scalar wv; no biases.
struct AttentionParams {
  int cq = 1;
  std::vector<double> wq;  // cq entries
  std::vector<double> wk;  // cq entries
  double wv = 0.0;
  double gamma = 0.0;

  void validate() const;
  std::string to_json() const;
  static AttentionParams from_json(const std::string& text);
};

// gamma = 0; wq, wk, wv i.i.d. uniform(-1/sqrt(cq), 1/sqrt(cq)), drawn
// deterministically from the seed.
AttentionParams init_attention(int cq, uint64_t seed);

enum class StaticRule { Max, Average, Frobenius };

// Aggregation rule: one of the three static reductions or attention with
// its parameters.
struct AggregationRule {
  enum class Kind { Max, Average, Frobenius, Attention };

  Kind kind = Kind::Average;
  std::optional<AttentionParams> attention;

  static AggregationRule max() { return {Kind::Max, std::nullopt}; }
  static AggregationRule average() { return {Kind::Average, std::nullopt}; }
  static AggregationRule frobenius() { return {Kind::Frobenius, std::nullopt}; }
  static AggregationRule with_attention(AttentionParams p) {
    return {Kind::Attention, std::move(p)};
  }
};

std::string to_string(AggregationRule::Kind kind);
AggregationRule::Kind parse_rule_kind(const std::string& name);

// Max entry / mean entry / sqrt(sum of squared entries).
double aggregate_static(const DeltaH& dh, StaticRule rule);

// Inspection record of one attention evaluation.
struct AttentionTrace {
  Matrix attention;  // s x s row-stochastic matrix, s = p*q
  Matrix adjusted;   // ΔH' = γ(A Vᵀ) + ΔH, shape p x q
};

// Attention aggregation: x = vec(ΔH) row-major, Q = wq x, K = wk x,
// V = wv x, A = row-softmax(QᵀK), L = Σ entries of (γ A Vᵀ + ΔH).
// Softmax rows use max-subtraction; any non-finite intermediate raises
// NumericError.
std::pair<double, AttentionTrace> aggregate_attention(const DeltaH& dh,
                                                      const AttentionParams& params);

// Dispatch over the rule kinds (attention output without the trace).
double aggregate(const DeltaH& dh, const AggregationRule& rule);

// dL/dΔH for the given rule, shape p x q.  Max puts weight 1 on the first
// maximal cell in row-major order; Frobenius at ΔH = 0 returns zeros
// (subgradient); attention uses the exact derivative through A.
Matrix aggregate_backward(const DeltaH& dh, const AggregationRule& rule);

// Exact reverse-mode derivatives of the attention loss w.r.t. the
// parameters at the given ΔH.
struct AttentionGradients {
  std::vector<double> wq;
  std::vector<double> wk;
  double wv = 0.0;
  double gamma = 0.0;
};

AttentionGradients attention_param_gradients(const DeltaH& dh,
                                             const AttentionParams& params);

}  // namespace texloss
