#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

enum class DiffMode { signed_diff, absolute_diff };

// Feature-construction policy. Stored inside the model file so scoring
// always replays the training-time configuration.
struct FeatureConfig {
  DiffMode mode = DiffMode::signed_diff;
  bool normalize = true;   // unit-normalize embeddings before subtraction
  bool symmetrize = true;  // training also sees each pair in swapped order

  // Compact form used in the model header, e.g. "signed,norm,sym".
  std::string encode() const {
    std::string s = mode == DiffMode::signed_diff ? "signed" : "absolute";
    s += normalize ? ",norm" : ",raw";
    s += symmetrize ? ",sym" : ",nosym";
    return s;
  }

  static FeatureConfig decode(std::string_view s) {
    auto parts = split_char(s, ',');
    if (parts.size() != 3)
      throw Error::data("bad feature config '" + std::string(s) + "'");
    FeatureConfig c;
    if (parts[0] == "signed") c.mode = DiffMode::signed_diff;
    else if (parts[0] == "absolute") c.mode = DiffMode::absolute_diff;
    else throw Error::data("bad feature mode '" + parts[0] + "'");
    if (parts[1] == "norm") c.normalize = true;
    else if (parts[1] == "raw") c.normalize = false;
    else throw Error::data("bad normalization flag '" + parts[1] + "'");
    if (parts[2] == "sym") c.symmetrize = true;
    else if (parts[2] == "nosym") c.symmetrize = false;
    else throw Error::data("bad symmetrization flag '" + parts[2] + "'");
    return c;
  }
};

struct DifferenceVector {
  std::vector<double> values;
  std::string reference_id;
  std::string probe_id;
  std::optional<PairLabel> label;  // mated or doppelganger when present
};

inline Embedding normalize(const Embedding& e) {
  double ss = 0.0;
  for (double v : e.values) ss += v * v;
  if (ss == 0.0)
    throw Error::data("degenerate zero-norm embedding '" + e.image_id + "'");
  double inv = 1.0 / std::sqrt(ss);
  Embedding out = e;
  for (double& v : out.values) v *= inv;
  return out;
}

inline std::vector<double> normalized_values(const std::vector<double>& v,
                                             const std::string& id) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  if (ss == 0.0) throw Error::data("degenerate zero-norm embedding '" + id + "'");
  double inv = 1.0 / std::sqrt(ss);
  std::vector<double> out = v;
  for (double& x : out) x *= inv;
  return out;
}

inline DifferenceVector difference(const Embedding& reference, const Embedding& probe,
                                   DiffMode mode) {
  if (reference.values.size() != probe.values.size())
    throw Error::data("dimension mismatch: '" + reference.image_id + "' has " +
                      std::to_string(reference.values.size()) + ", '" + probe.image_id +
                      "' has " + std::to_string(probe.values.size()));
  DifferenceVector d;
  d.reference_id = reference.image_id;
  d.probe_id = probe.image_id;
  d.values.resize(reference.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    double v = reference.values[i] - probe.values[i];
    d.values[i] = mode == DiffMode::absolute_diff ? std::fabs(v) : v;
  }
  return d;
}

// One feature per mated/doppelganger pair, two when symmetrization is on
// (the swapped-order feature directly follows the original). Nonmated pairs
// are skipped: the detector separates mated from doppelganger only.
inline std::vector<DifferenceVector> build_feature_set(const std::vector<TrialPair>& pairs,
                                                       const EmbeddingSet& embeddings,
                                                       const FeatureConfig& config) {
  std::vector<DifferenceVector> out;
  out.reserve(pairs.size() * (config.symmetrize ? 2 : 1));
  for (const auto& p : pairs) {
    if (p.label == PairLabel::nonmated) continue;
    Embedding ref = embeddings.require(p.reference_id);
    Embedding probe = embeddings.require(p.probe_id);
    if (config.normalize) {
      ref = normalize(ref);
      probe = normalize(probe);
    }
    DifferenceVector d = difference(ref, probe, config.mode);
    d.label = p.label;
    out.push_back(std::move(d));
    if (config.symmetrize) {
      DifferenceVector r = difference(probe, ref, config.mode);
      r.label = p.label;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace dgd
