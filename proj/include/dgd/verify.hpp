#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

struct ScoreSet {
  std::vector<double> mated;
  std::vector<double> nonmated;
  std::vector<double> attack;  // doppelganger comparisons
  std::string meta;
};

inline double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size())
    throw Error::data("cosine similarity dimension mismatch: '" + a.image_id + "' vs '" +
                      b.image_id + "'");
  if (a.values == b.values) {
    // Identical vectors compare to exactly 1 (zero-norm still rejected).
    double ss = 0.0;
    for (double v : a.values) ss += v * v;
    if (ss == 0.0) throw Error::data("zero-norm embedding '" + a.image_id + "'");
    return 1.0;
  }
  double dot_ab = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot_ab += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0) throw Error::data("zero-norm embedding '" + a.image_id + "'");
  if (nb == 0.0) throw Error::data("zero-norm embedding '" + b.image_id + "'");
  double s = dot_ab / (std::sqrt(na) * std::sqrt(nb));
  return std::min(1.0, std::max(-1.0, s));
}

// Raw cosine lives in [-1,1]; reports and score files use [0,1] for axis
// parity with detection scores.
inline double display_similarity(double raw_cosine) { return (raw_cosine + 1.0) / 2.0; }

inline ScoreSet score_pairs(const std::vector<TrialPair>& pairs, const EmbeddingSet& embeddings,
                            bool display_scale = true) {
  ScoreSet s;
  for (const auto& p : pairs) {
    double v = cosine_similarity(embeddings.require(p.reference_id),
                                 embeddings.require(p.probe_id));
    if (display_scale) v = display_similarity(v);
    switch (p.label) {
      case PairLabel::mated: s.mated.push_back(v); break;
      case PairLabel::nonmated: s.nonmated.push_back(v); break;
      case PairLabel::doppelganger: s.attack.push_back(v); break;
    }
  }
  return s;
}

// Sample statistics; fields that need more data than provided stay unset
// rather than being fabricated. std uses the n-1 divisor; skewness is the
// adjusted Fisher-Pearson coefficient; kurtosis is bias-corrected excess.
struct DescriptiveStats {
  double mean = 0.0;
  std::optional<double> std_dev;          // needs n >= 2
  std::optional<double> skewness;         // needs n >= 3 and nonzero variance
  std::optional<double> excess_kurtosis;  // needs n >= 4 and nonzero variance
  std::size_t count = 0;
};

inline DescriptiveStats descriptive_stats(const std::vector<double>& scores) {
  if (scores.empty()) throw Error::data("statistics of an empty score list");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error::data("non-finite score in statistics input");
  DescriptiveStats st;
  auto n = static_cast<double>(scores.size());
  st.count = scores.size();
  st.mean = pairwise_sum(scores.data(), scores.size()) / n;

  if (scores.size() < 2) return st;
  std::vector<double> d2(scores.size()), d3(scores.size()), d4(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - st.mean;
    d2[i] = d * d;
    d3[i] = d2[i] * d;
    d4[i] = d2[i] * d2[i];
  }
  double s2 = pairwise_sum(d2.data(), d2.size());
  st.std_dev = std::sqrt(s2 / (n - 1.0));
  double m2 = s2 / n;
  if (m2 == 0.0) return st;  // constant sample: shape statistics undefined

  if (scores.size() >= 3) {
    double m3 = pairwise_sum(d3.data(), d3.size()) / n;
    double g1 = m3 / std::pow(m2, 1.5);
    st.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
  }
  if (scores.size() >= 4) {
    double m4 = pairwise_sum(d4.data(), d4.size()) / n;
    st.excess_kurtosis =
        (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * (m4 / (m2 * m2) - 3.0) + 6.0);
  }
  return st;
}

}  // namespace dgd
