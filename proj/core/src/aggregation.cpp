#include "texloss/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "texloss/error.hpp"
#include "texloss/rng.hpp"

namespace texloss {

namespace {

// Shared forward pass: softmax attention over the flattened ΔH.
struct AttentionForward {
  int s = 0;
  double kappa = 0.0;        // wqᵀwk — QᵀK = kappa·x xᵀ
  std::vector<double> x;     // vec(ΔH), row-major
  Matrix a;                  // s x s row-stochastic
  std::vector<double> r;     // r_u = Σ_v A(u,v) x_v = (A x)_u
  double sum_x = 0.0;
  double sum_r = 0.0;
};

AttentionForward attention_forward(const DeltaH& dh, const AttentionParams& params) {
  params.validate();
  AttentionForward f;
  f.s = static_cast<int>(dh.values.size());
  f.x.assign(dh.values.begin(), dh.values.end());
  for (double v : f.x) f.sum_x += v;

  f.kappa = 0.0;
  for (int c = 0; c < params.cq; ++c) {
    f.kappa += params.wq[c] * params.wk[c];
  }

  // Row u of the logit matrix is kappa * x_u * x; softmax with
  // max-subtraction keeps the exponentials in range.
  f.a = Matrix(f.s, f.s, 0.0);
  f.r.assign(f.s, 0.0);
  for (int u = 0; u < f.s; ++u) {
    double zmax = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < f.s; ++v) {
      double z = f.kappa * f.x[u] * f.x[v];
      f.a(u, v) = z;
      if (z > zmax) zmax = z;
    }
    if (!std::isfinite(zmax)) {
      throw NumericError("attention logits are non-finite");
    }
    double denom = 0.0;
    for (int v = 0; v < f.s; ++v) {
      double e = std::exp(f.a(u, v) - zmax);
      f.a(u, v) = e;
      denom += e;
    }
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw NumericError("attention softmax degenerated");
    }
    double inv = 1.0 / denom;
    double ru = 0.0;
    for (int v = 0; v < f.s; ++v) {
      f.a(u, v) *= inv;
      ru += f.a(u, v) * f.x[v];
    }
    f.r[u] = ru;
    f.sum_r += ru;
  }
  return f;
}

}  // namespace

void AttentionParams::validate() const {
  if (cq < 1) {
    throw InvalidArgumentError("attention cq must be >= 1");
  }
  if (wq.size() != static_cast<size_t>(cq) || wk.size() != static_cast<size_t>(cq)) {
    throw InvalidArgumentError("attention wq/wk must each have cq entries");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(wv) || !finite(gamma) || !std::all_of(wq.begin(), wq.end(), finite) ||
      !std::all_of(wk.begin(), wk.end(), finite)) {
    throw InvalidArgumentError("attention parameters must be finite");
  }
}

std::string AttentionParams::to_json() const {
  nlohmann::json j;
  j["cq"] = cq;
  j["wq"] = wq;
  j["wk"] = wk;
  j["wv"] = wv;
  j["gamma"] = gamma;
  return j.dump();
}

AttentionParams AttentionParams::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::BadSidecar,
                     std::string("attention params: ") + e.what());
  }
  AttentionParams p;
  try {
    p.cq = j.at("cq").get<int>();
    p.wq = j.at("wq").get<std::vector<double>>();
    p.wk = j.at("wk").get<std::vector<double>>();
    p.wv = j.at("wv").get<double>();
    p.gamma = j.at("gamma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::BadSidecar,
                     std::string("attention params: ") + e.what());
  }
  p.validate();
  return p;
}

AttentionParams init_attention(int cq, uint64_t seed) {
  if (cq < 1) {
    throw InvalidArgumentError("attention cq must be >= 1");
  }
  Rng rng(seed);
  double bound = 1.0 / std::sqrt(static_cast<double>(cq));
  AttentionParams p;
  p.cq = cq;
  p.wq.resize(cq);
  p.wk.resize(cq);
  for (int c = 0; c < cq; ++c) p.wq[c] = rng.uniform(-bound, bound);
  for (int c = 0; c < cq; ++c) p.wk[c] = rng.uniform(-bound, bound);
  p.wv = rng.uniform(-bound, bound);
  p.gamma = 0.0;
  return p;
}

std::string to_string(AggregationRule::Kind kind) {
  switch (kind) {
    case AggregationRule::Kind::Max: return "max";
    case AggregationRule::Kind::Average: return "average";
    case AggregationRule::Kind::Frobenius: return "frobenius";
    case AggregationRule::Kind::Attention: return "attention";
  }
  throw InvalidArgumentError("unknown aggregation rule");
}

AggregationRule::Kind parse_rule_kind(const std::string& name) {
  if (name == "max") return AggregationRule::Kind::Max;
  if (name == "average") return AggregationRule::Kind::Average;
  if (name == "frobenius") return AggregationRule::Kind::Frobenius;
  if (name == "attention") return AggregationRule::Kind::Attention;
  throw InvalidArgumentError("unknown aggregation rule '" + name +
                             "' (max|average|frobenius|attention)");
}

double aggregate_static(const DeltaH& dh, StaticRule rule) {
  switch (rule) {
    case StaticRule::Max: {
      double best = -std::numeric_limits<double>::infinity();
      for (double v : dh.values) best = std::max(best, v);
      return best;
    }
    case StaticRule::Average: {
      double acc = 0.0;
      for (double v : dh.values) acc += v;
      return acc / static_cast<double>(dh.values.size());
    }
    case StaticRule::Frobenius: {
      double acc = 0.0;
      for (double v : dh.values) acc += v * v;
      return std::sqrt(acc);
    }
  }
  throw InvalidArgumentError("unknown static rule");
}

std::pair<double, AttentionTrace> aggregate_attention(const DeltaH& dh,
                                                      const AttentionParams& params) {
  AttentionForward f = attention_forward(dh, params);
  double loss = params.gamma * params.wv * f.sum_r + f.sum_x;
  if (!std::isfinite(loss)) {
    throw NumericError("attention loss is non-finite");
  }

  AttentionTrace trace;
  trace.attention = f.a;
  trace.adjusted = Matrix(dh.values.rows(), dh.values.cols(), 0.0);
  int q = dh.values.cols();
  for (int c = 0; c < f.s; ++c) {
    // ΔH' = γ (A Vᵀ) + ΔH with (A Vᵀ)_u = wv r_u.
    trace.adjusted(c / q, c % q) =
        params.gamma * params.wv * f.r[c] + f.x[c];
  }
  return {loss, std::move(trace)};
}

double aggregate(const DeltaH& dh, const AggregationRule& rule) {
  switch (rule.kind) {
    case AggregationRule::Kind::Max:
      return aggregate_static(dh, StaticRule::Max);
    case AggregationRule::Kind::Average:
      return aggregate_static(dh, StaticRule::Average);
    case AggregationRule::Kind::Frobenius:
      return aggregate_static(dh, StaticRule::Frobenius);
    case AggregationRule::Kind::Attention:
      if (!rule.attention) {
        throw InvalidArgumentError("attention rule carries no parameters");
      }
      return aggregate_attention(dh, *rule.attention).first;
  }
  throw InvalidArgumentError("unknown aggregation rule");
}

Matrix aggregate_backward(const DeltaH& dh, const AggregationRule& rule) {
  int p = dh.values.rows();
  int q = dh.values.cols();
  Matrix grad(p, q, 0.0);
  switch (rule.kind) {
    case AggregationRule::Kind::Max: {
      // Subgradient: all weight on the first maximal cell in row-major order.
      int best = 0;
      const double* v = dh.values.data();
      for (int c = 1; c < p * q; ++c) {
        if (v[c] > v[best]) best = c;
      }
      grad(best / q, best % q) = 1.0;
      return grad;
    }
    case AggregationRule::Kind::Average: {
      double w = 1.0 / static_cast<double>(p * q);
      for (double& g : grad) g = w;
      return grad;
    }
    case AggregationRule::Kind::Frobenius: {
      double norm = aggregate_static(dh, StaticRule::Frobenius);
      if (norm == 0.0) {
        return grad;  // subgradient at the origin
      }
      const double* v = dh.values.data();
      for (int c = 0; c < p * q; ++c) {
        grad(c / q, c % q) = v[c] / norm;
      }
      return grad;
    }
    case AggregationRule::Kind::Attention: {
      if (!rule.attention) {
        throw InvalidArgumentError("attention rule carries no parameters");
      }
      const AttentionParams& params = *rule.attention;
      AttentionForward f = attention_forward(dh, params);
      double gw = params.gamma * params.wv;

      // dL/dx_t = 1 + γ wv ( Σ_u A(u,t)
      //                      + κ Σ_w x_w A(t,w)(x_w - r_t)      [row t]
      //                      + κ Σ_u x_u A(u,t)(x_t - r_u) )    [col t]
      std::vector<double> col_sum(f.s, 0.0), col_term(f.s, 0.0), row_term(f.s, 0.0);
      for (int u = 0; u < f.s; ++u) {
        double row_acc = 0.0;
        for (int v = 0; v < f.s; ++v) {
          double a = f.a(u, v);
          col_sum[v] += a;
          row_acc += f.x[v] * a * (f.x[v] - f.r[u]);
          col_term[v] += f.x[u] * a * (f.x[v] - f.r[u]);
        }
        row_term[u] = row_acc;
      }
      for (int t = 0; t < f.s; ++t) {
        double g = 1.0 + gw * (col_sum[t] + f.kappa * (row_term[t] + col_term[t]));
        grad(t / q, t % q) = g;
      }
      return grad;
    }
  }
  throw InvalidArgumentError("unknown aggregation rule");
}

AttentionGradients attention_param_gradients(const DeltaH& dh,
                                             const AttentionParams& params) {
  AttentionForward f = attention_forward(dh, params);

  AttentionGradients g;
  g.gamma = params.wv * f.sum_r;
  g.wv = params.gamma * f.sum_r;

  // L depends on wq, wk only through kappa = wqᵀwk.
  // dL/dκ = γ wv Σ_u x_u (E_u[x²] - r_u²) with E_u[x²] = Σ_v A(u,v) x_v².
  double dkappa = 0.0;
  for (int u = 0; u < f.s; ++u) {
    double ex2 = 0.0;
    for (int v = 0; v < f.s; ++v) {
      ex2 += f.a(u, v) * f.x[v] * f.x[v];
    }
    dkappa += f.x[u] * (ex2 - f.r[u] * f.r[u]);
  }
  dkappa *= params.gamma * params.wv;

  g.wq.resize(params.cq);
  g.wk.resize(params.cq);
  for (int c = 0; c < params.cq; ++c) {
    g.wq[c] = dkappa * params.wk[c];
    g.wk[c] = dkappa * params.wq[c];
  }
  return g;
}

}  // namespace texloss
