#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/features.hpp"

namespace dgd {

struct SvmConfig {
  double C = 1.0;
  double gamma = 0.0;       // <= 0 selects auto = 1 / feature dimension
  double tolerance = 1e-3;  // KKT stopping tolerance
  long max_passes = 0;      // 0 selects auto = max(10000, 1000 * n)
  std::uint64_t seed = 1;   // calibration split only; the solver is deterministic
  std::size_t cache_bytes = 64ull << 20;
  double calibration_fraction = 0.2;

  double resolve_gamma(std::size_t dim) const {
    if (gamma > 0.0) return gamma;
    if (dim == 0) throw Error::compute("cannot resolve gamma for dimension 0");
    return 1.0 / static_cast<double>(dim);
  }
};

struct SvmModel {
  std::size_t dim = 0;
  double gamma = 0.0;
  double bias = 0.0;
  double A = -1.0;  // sigmoid slope, negative so high decision values score near 1
  double B = 0.0;
  FeatureConfig feature_config;
  std::vector<double> coef;                    // signed alpha_i * y_i per support vector
  std::vector<std::vector<double>> support_vectors;
};

inline double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y,
                         double gamma) {
  if (x.size() != y.size())
    throw Error::compute("kernel dimension mismatch: " + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()));
  return std::exp(-gamma * squared_distance(x.data(), y.data(), x.size()));
}

inline double decision_value(const SvmModel& m, const std::vector<double>& feature) {
  if (feature.size() != m.dim)
    throw Error::compute("feature dimension " + std::to_string(feature.size()) +
                         " does not match model dimension " + std::to_string(m.dim));
  std::vector<double> terms(m.coef.size());
  for (std::size_t i = 0; i < m.coef.size(); ++i)
    terms[i] = m.coef[i] * rbf_kernel(m.support_vectors[i], feature, m.gamma);
  return pairwise_sum(terms.data(), terms.size()) + m.bias;
}

inline double decision_value(const SvmModel& m, const DifferenceVector& f) {
  return decision_value(m, f.values);
}

// Calibrated detection score in [0,1]; 1 = doppelganger side.
inline double detection_score(const SvmModel& m, const std::vector<double>& feature) {
  double z = m.A * decision_value(m, feature) + m.B;
  if (z >= 0.0) {
    double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

namespace detail {

// LRU cache of kernel-matrix rows, bounded by a byte budget. A row holds
// K(x_i, x_j) for all j. Rows are recomputed on eviction; correctness never
// depends on residency.
class KernelCache {
public:
  KernelCache(const std::vector<const double*>& xs, std::size_t dim, double gamma,
              std::size_t byte_budget)
      : xs_(xs), dim_(dim), gamma_(gamma) {
    std::size_t row_bytes = xs.size() * sizeof(double);
    max_rows_ = row_bytes == 0 ? 0 : byte_budget / row_bytes;
    if (max_rows_ < 2) max_rows_ = 2;  // the working pair must always fit
  }

  const std::vector<double>& row(std::size_t i) {
    auto it = index_.find(i);
    if (it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    if (order_.size() >= max_rows_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    order_.emplace_front(i, compute_row(i));
    index_[i] = order_.begin();
    return order_.front().second;
  }

private:
  std::vector<double> compute_row(std::size_t i) const {
    std::vector<double> r(xs_.size());
    for (std::size_t j = 0; j < xs_.size(); ++j)
      r[j] = std::exp(-gamma_ * squared_distance(xs_[i], xs_[j], dim_));
    return r;
  }

  const std::vector<const double*>& xs_;
  std::size_t dim_;
  double gamma_;
  std::size_t max_rows_;
  std::list<std::pair<std::size_t, std::vector<double>>> order_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> index_;
};

}  // namespace detail

// Sequential minimal optimization on the dual
//   min 1/2 a^T Q a - e^T a   s.t. 0 <= a_i <= C, y^T a = 0,
// with Q_ij = y_i y_j K(x_i, x_j). The working pair is the maximal violating
// pair; convergence when the maximal violation drops below the tolerance.
inline SvmModel train(const std::vector<DifferenceVector>& features, const SvmConfig& config) {
  const std::size_t n = features.size();
  if (n < 2) throw Error::compute("training needs at least two features");
  const std::size_t dim = features[0].values.size();
  if (dim == 0) throw Error::compute("training features have dimension 0");
  if (config.C <= 0.0) throw Error::compute("C must be positive");
  if (config.tolerance <= 0.0) throw Error::compute("tolerance must be positive");

  std::vector<const double*> xs(n);
  std::vector<double> y(n);
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = features[i];
    if (f.values.size() != dim)
      throw Error::compute("inconsistent feature dimensions: " + std::to_string(f.values.size()) +
                           " vs " + std::to_string(dim));
    for (double v : f.values)
      if (!std::isfinite(v)) throw Error::compute("non-finite training feature value");
    if (!f.label) throw Error::compute("unlabeled training feature");
    y[i] = *f.label == PairLabel::doppelganger ? 1.0 : -1.0;
    (y[i] > 0 ? has_pos : has_neg) = true;
    xs[i] = f.values.data();
  }
  if (!has_pos || !has_neg)
    throw Error::compute("training requires both mated and doppelganger examples");

  const double C = config.C;
  const double gamma = config.resolve_gamma(dim);
  const double tol = config.tolerance;
  const long max_iter = config.max_passes > 0
                            ? config.max_passes
                            : std::max<long>(10000, 1000 * static_cast<long>(n));
  constexpr double kTau = 1e-12;

  detail::KernelCache cache(xs, dim, gamma, config.cache_bytes);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> G(n, -1.0);  // gradient of the dual objective; starts at -e

  long iter = 0;
  for (;; ++iter) {
    if (iter >= max_iter)
      throw Error::compute("solver did not converge within " + std::to_string(max_iter) +
                           " iterations");

    // Maximal violating pair over I_up (i) and I_low (j).
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
      if (in_up && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    }
    for (std::size_t t = 0; t < n; ++t) {
      bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
      if (in_low && y[t] * G[t] > gmax2) {
        gmax2 = y[t] * G[t];
        j = t;
      }
    }
    if (i == n || j == n || gmax + gmax2 < tol) break;

    const std::vector<double>& Ki = cache.row(i);
    const double Kij = Ki[j];
    double old_ai = alpha[i], old_aj = alpha[j];

    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * (y[i] * y[j] * Kij);  // K_ii = K_jj = 1 for RBF
      if (quad <= 0) quad = kTau;
      double delta = (-G[i] - G[j]) / quad;
      double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = 2.0 - 2.0 * (y[i] * y[j] * Kij);
      if (quad <= 0) quad = kTau;
      double delta = (G[i] - G[j]) / quad;
      double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }

    double dai = alpha[i] - old_ai;
    double daj = alpha[j] - old_aj;
    if (dai == 0.0 && daj == 0.0) continue;
    const std::vector<double>& Kj = cache.row(j);
    for (std::size_t t = 0; t < n; ++t) {
      // Q_it = y_i y_t K_it
      G[t] += y[i] * y[t] * Ki[t] * dai + y[j] * y[t] * Kj[t] * daj;
    }
  }

  // Bias from the KKT conditions: average y*G over free vectors, midpoint of
  // the feasibility interval when none are free.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    double yg = y[t] * G[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

  SvmModel m;
  m.dim = dim;
  m.gamma = gamma;
  m.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      m.coef.push_back(alpha[t] * y[t]);
      m.support_vectors.push_back(features[t].values);
    }
  }
  if (m.coef.empty())
    throw Error::compute("degenerate training result: no support vectors");
  return m;
}

// Dual objective 1/2 a^T Q a - e^T a for a solved model's alphas, used by
// equivalence checks. Recomputed densely; intended for small problems.
inline double dual_objective(const std::vector<DifferenceVector>& features,
                             const std::vector<double>& alpha, double gamma) {
  const std::size_t n = features.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = features[i].label == PairLabel::doppelganger ? 1.0 : -1.0;
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0.0) continue;
    lin += alpha[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (alpha[j] == 0.0) continue;
      quad += alpha[i] * alpha[j] * y[i] * y[j] *
              rbf_kernel(features[i].values, features[j].values, gamma);
    }
  }
  return 0.5 * quad - lin;
}

// Dual objective recovered from a trained model's stored coefficients
// (coef_i = alpha_i * y_i, zero alphas drop out of both terms).
inline double model_dual_objective(const SvmModel& m) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < m.coef.size(); ++i) {
    lin += std::fabs(m.coef[i]);
    for (std::size_t j = 0; j < m.coef.size(); ++j)
      quad += m.coef[i] * m.coef[j] *
              rbf_kernel(m.support_vectors[i], m.support_vectors[j], m.gamma);
  }
  return 0.5 * quad - lin;
}

// Sigmoid fit of P(doppelganger | decision value) by regularized maximum
// likelihood (Newton with backtracking line search). Labels: doppelganger
// features are the positive class.
inline void calibrate(SvmModel& model, const std::vector<DifferenceVector>& held_out,
                      std::string* warning = nullptr) {
  std::size_t n_pos = 0, n_neg = 0;
  std::vector<double> deci;
  std::vector<bool> pos;
  deci.reserve(held_out.size());
  for (const auto& f : held_out) {
    if (!f.label) throw Error::compute("unlabeled calibration feature");
    bool p = *f.label == PairLabel::doppelganger;
    (p ? n_pos : n_neg) += 1;
    pos.push_back(p);
    deci.push_back(decision_value(model, f));
  }
  if (n_pos == 0 || n_neg == 0)
    throw Error::compute("calibration requires both mated and doppelganger examples");

  const double hi = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
  const double lo = 1.0 / (static_cast<double>(n_neg) + 2.0);
  const std::size_t n = deci.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = pos[i] ? hi : lo;

  auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = a * deci[i] + b;
      f += z >= 0 ? t[i] * z + std::log1p(std::exp(-z))
                  : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return f;
  };

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  double A = 0.0;
  double B = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
  double fval = objective(A, B);
  bool converged = false;

  for (int it = 0; it < kMaxIter; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = A * deci[i] + B;
      double p, q;
      if (z >= 0) {
        double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      double d2 = p * q;
      h11 += deci[i] * deci[i] * d2;
      h22 += d2;
      h21 += deci[i] * d2;
      double d1 = t[i] - p;
      g1 += deci[i] * d1;
      g2 += d1;
    }
    if (std::fabs(g1) < 1e-5 && std::fabs(g2) < 1e-5) {
      converged = true;
      break;
    }
    double det = h11 * h22 - h21 * h21;
    double dA = -(h22 * g1 - h21 * g2) / det;
    double dB = -(-h21 * g1 + h11 * g2) / det;
    double gd = g1 * dA + g2 * dB;
    double step = 1.0;
    while (step >= kMinStep) {
      double nA = A + step * dA, nB = B + step * dB;
      double nf = objective(nA, nB);
      if (nf < fval + 1e-4 * step * gd) {
        A = nA;
        B = nB;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;  // line search stalled; keep current iterate
  }
  (void)converged;

  if (A >= 0.0) {
    // A non-discriminative fit would invert the score ordering; fall back to
    // a fixed monotone map so higher decision values still score higher.
    if (warning)
      *warning = "calibration produced a non-negative slope; using fallback A=-1 B=0";
    A = -1.0;
    B = 0.0;
  }
  model.A = A;
  model.B = B;
}

// Seeded stratified subset used as the calibration split.
inline std::vector<DifferenceVector> calibration_split(const std::vector<DifferenceVector>& all,
                                                       double fraction, std::uint64_t seed) {
  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!all[i].label) continue;
    (*all[i].label == PairLabel::doppelganger ? pos_idx : neg_idx).push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(pos_idx);
  rng.shuffle(neg_idx);
  auto take = [&](std::vector<std::size_t>& v) {
    std::size_t k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(v.size())));
    k = std::max<std::size_t>(1, std::min(k, v.size()));
    v.resize(k);
  };
  take(pos_idx);
  take(neg_idx);
  std::vector<std::size_t> chosen;
  chosen.insert(chosen.end(), pos_idx.begin(), pos_idx.end());
  chosen.insert(chosen.end(), neg_idx.begin(), neg_idx.end());
  std::sort(chosen.begin(), chosen.end());
  std::vector<DifferenceVector> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(all[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: header
//   svm-v1 dim=<D> nsv=<K> gamma=<g> bias=<b> A=<a> B=<b> feat=<mode,norm,sym>
// then K lines "<signed_coef> <v1> ... <vD>". Values use round-trip-exact
// decimal formatting, so load(save(m)) reproduces decision values bitwise.
// ---------------------------------------------------------------------------

inline void save_model(std::ostream& out, const SvmModel& m,
                       const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "svm-v1 dim=" << m.dim << " nsv=" << m.coef.size() << " gamma="
      << format_double(m.gamma) << " bias=" << format_double(m.bias) << " A="
      << format_double(m.A) << " B=" << format_double(m.B) << " feat="
      << m.feature_config.encode() << "\n";
  for (std::size_t i = 0; i < m.coef.size(); ++i) {
    out << format_double(m.coef[i]);
    for (double v : m.support_vectors[i]) out << ' ' << format_double(v);
    out << "\n";
  }
}

inline void save_model(const std::string& path, const SvmModel& m,
                       const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  save_model(out, m, comments);
}

inline SvmModel load_model(const std::string& path) {
  detail::LineReader r(path);
  std::string line;
  if (!r.next(line)) detail::fail_at(path, r.line_no, "missing svm-v1 header");
  auto tok = split_ws(line);
  if (tok.empty() || tok[0] != "svm-v1")
    detail::fail_at(path, r.line_no, "unsupported model format (expected svm-v1)");
  if (tok.size() != 8)
    detail::fail_at(path, r.line_no, "malformed svm-v1 header");

  auto field = [&](std::size_t idx, std::string_view key) -> std::string_view {
    std::string_view t = tok[idx];
    std::string prefix = std::string(key) + "=";
    if (t.substr(0, prefix.size()) != prefix)
      detail::fail_at(path, r.line_no, "expected '" + prefix + "...' in header");
    return t.substr(prefix.size());
  };
  auto num = [&](std::size_t idx, std::string_view key) {
    double v = 0;
    if (!try_parse_double(field(idx, key), v))
      detail::fail_at(path, r.line_no, "invalid " + std::string(key) + " in header");
    return v;
  };

  SvmModel m;
  long dim = 0, nsv = 0;
  if (!try_parse_long(field(1, "dim"), dim) || dim <= 0)
    detail::fail_at(path, r.line_no, "invalid dim in header");
  if (!try_parse_long(field(2, "nsv"), nsv) || nsv < 0)
    detail::fail_at(path, r.line_no, "invalid nsv in header");
  m.dim = static_cast<std::size_t>(dim);
  m.gamma = num(3, "gamma");
  m.bias = num(4, "bias");
  m.A = num(5, "A");
  m.B = num(6, "B");
  m.feature_config = FeatureConfig::decode(field(7, "feat"));

  for (long k = 0; k < nsv; ++k) {
    if (!r.next(line))
      detail::fail_at(path, r.line_no, "truncated model: expected " + std::to_string(nsv) +
                                           " support vectors, found " + std::to_string(k));
    auto vt = split_ws(line);
    if (vt.size() != static_cast<std::size_t>(dim) + 1)
      detail::fail_at(path, r.line_no, "support vector with wrong value count");
    double coef = 0;
    if (!try_parse_double(vt[0], coef))
      detail::fail_at(path, r.line_no, "invalid coefficient");
    std::vector<double> sv(m.dim);
    for (std::size_t i = 0; i < m.dim; ++i)
      if (!try_parse_double(vt[i + 1], sv[i]))
        detail::fail_at(path, r.line_no, "invalid support vector value");
    m.coef.push_back(coef);
    m.support_vectors.push_back(std::move(sv));
  }
  if (r.next(line))
    detail::fail_at(path, r.line_no, "trailing content after support vectors");
  return m;
}

}  // namespace dgd
