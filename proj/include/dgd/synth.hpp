#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

// Desk-scale stand-in for embedding databases: subjects are unit-sphere
// centroids, samples are angular-Gaussian perturbations, doppelganger duos
// are centroid pairs at a fixed angular distance, and morph embeddings are
// renormalized midpoints of duo samples.
struct SynthConfig {
  std::size_t dim = 128;
  std::size_t n_subjects = 200;         // first 2*n_dg_pairs of them form duos
  std::size_t n_dg_pairs = 100;
  std::size_t samples_per_subject = 4;
  double dg_angle_deg = 60.0;           // angle between duo centroids
  double noise = 0.1;                   // total angular perturbation per sample
  std::size_t n_nonmated = 5000;        // evaluation nonmated pairs
  std::uint64_t seed = 1;

  void validate() const {
    if (dim < 2) throw Error::usage("synth dim must be at least 2");
    if (n_dg_pairs < 2) throw Error::usage("synth needs at least 2 doppelganger pairings");
    if (n_subjects < 2 * n_dg_pairs)
      throw Error::usage("synth needs at least 2 subjects per doppelganger duo");
    if (n_subjects < 4) throw Error::usage("synth needs at least 4 subjects");
    if (n_subjects > 9999) throw Error::usage("synth supports at most 9999 subjects");
    if (samples_per_subject < 2)
      throw Error::usage("synth needs at least 2 samples per subject");
    if (!(dg_angle_deg >= 0.0 && dg_angle_deg <= 180.0))
      throw Error::usage("doppelganger angle must lie in [0,180] degrees");
    if (noise < 0.0) throw Error::usage("noise must be non-negative");
    if (n_nonmated == 0) throw Error::usage("synth needs nonmated pairs");
  }
};

struct SynthResult {
  std::vector<Embedding> embeddings;
  std::vector<TrialPair> train_pairs;  // mated + (target, morph) doppelganger
  std::vector<TrialPair> eval_pairs;   // mated + real doppelganger + nonmated
};

namespace detail {

inline std::string zero_pad4(std::size_t v) {
  std::string s = std::to_string(v);
  return std::string(s.size() >= 4 ? 0 : 4 - s.size(), '0') + s;
}

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.gaussian();
  return v;
}

inline void normalize_inplace(std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  double inv = 1.0 / std::sqrt(ss);
  for (double& x : v) x *= inv;
}

inline std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  for (;;) {
    auto v = gaussian_vector(rng, dim);
    double ss = 0.0;
    for (double x : v) ss += x * x;
    if (ss > 1e-12) {
      normalize_inplace(v);
      return v;
    }
  }
}

}  // namespace detail

inline SynthResult synthesize(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t dim = cfg.dim;
  const std::size_t n_duo_subjects = 2 * cfg.n_dg_pairs;
  const double theta = cfg.dg_angle_deg * 3.14159265358979323846 / 180.0;
  const double comp_sigma = cfg.noise / std::sqrt(static_cast<double>(dim));

  // Subject centroids. Duo partner = rotation of the first centroid by theta
  // within the plane spanned with an orthogonalized random direction.
  std::vector<std::vector<double>> centroids(cfg.n_subjects);
  for (std::size_t p = 0; p < cfg.n_dg_pairs; ++p) {
    auto c1 = detail::random_unit(rng, dim);
    std::vector<double> c2;
    if (cfg.dg_angle_deg == 0.0) {
      c2 = c1;
    } else {
      for (;;) {
        auto u = detail::random_unit(rng, dim);
        double proj = 0.0;
        for (std::size_t i = 0; i < dim; ++i) proj += u[i] * c1[i];
        double ss = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
          u[i] -= proj * c1[i];
          ss += u[i] * u[i];
        }
        if (ss <= 1e-12) continue;
        detail::normalize_inplace(u);
        c2.resize(dim);
        double ct = std::cos(theta), st = std::sin(theta);
        for (std::size_t i = 0; i < dim; ++i) c2[i] = ct * c1[i] + st * u[i];
        break;
      }
    }
    centroids[2 * p] = std::move(c1);
    centroids[2 * p + 1] = std::move(c2);
  }
  for (std::size_t k = n_duo_subjects; k < cfg.n_subjects; ++k)
    centroids[k] = detail::random_unit(rng, dim);

  SynthResult out;
  auto subject_id = [](std::size_t k) { return "s" + detail::zero_pad4(k); };
  auto sample_id = [&](std::size_t k, std::size_t j) {
    return subject_id(k) + "_i" + std::to_string(j);
  };
  auto morph_subject = [](std::size_t p) { return "m" + detail::zero_pad4(p); };
  auto morph_id = [&](std::size_t p, std::size_t j) {
    return morph_subject(p) + "_i" + std::to_string(j);
  };

  // Samples around each centroid.
  std::vector<std::vector<std::vector<double>>> samples(cfg.n_subjects);
  for (std::size_t k = 0; k < cfg.n_subjects; ++k) {
    samples[k].resize(cfg.samples_per_subject);
    for (std::size_t j = 0; j < cfg.samples_per_subject; ++j) {
      auto g = detail::gaussian_vector(rng, dim);
      auto x = centroids[k];
      for (std::size_t i = 0; i < dim; ++i) x[i] += comp_sigma * g[i];
      detail::normalize_inplace(x);
      samples[k][j] = std::move(x);
      out.embeddings.push_back({sample_id(k, j), subject_id(k), samples[k][j]});
    }
  }

  // Morph embeddings: renormalized midpoints of per-index duo samples.
  for (std::size_t p = 0; p < cfg.n_dg_pairs; ++p) {
    std::size_t a = 2 * p, b = 2 * p + 1;
    for (std::size_t j = 0; j < cfg.samples_per_subject; ++j) {
      std::vector<double> m(dim);
      for (std::size_t i = 0; i < dim; ++i)
        m[i] = 0.5 * samples[a][j][i] + 0.5 * samples[b][j][i];
      detail::normalize_inplace(m);
      out.embeddings.push_back({morph_id(p, j), morph_subject(p), std::move(m)});
    }
  }

  // Duo-level split keeps every evaluation doppelganger duo unseen at
  // training time.
  std::vector<std::size_t> duos(cfg.n_dg_pairs);
  for (std::size_t p = 0; p < cfg.n_dg_pairs; ++p) duos[p] = p;
  rng.shuffle(duos);
  const std::size_t n_train = cfg.n_dg_pairs / 2;

  const std::size_t s = cfg.samples_per_subject;
  for (std::size_t idx = 0; idx < cfg.n_dg_pairs; ++idx) {
    std::size_t p = duos[idx];
    std::size_t a = 2 * p, b = 2 * p + 1;
    bool train = idx < n_train;
    auto& pairs = train ? out.train_pairs : out.eval_pairs;
    for (std::size_t j = 0; j < s; ++j)
      pairs.push_back({sample_id(a, j), sample_id(a, (j + 1) % s), PairLabel::mated});
    if (train) {
      for (std::size_t j = 0; j < s; ++j)
        pairs.push_back({sample_id(a, j), morph_id(p, j), PairLabel::doppelganger});
    } else {
      for (std::size_t j = 0; j < s; ++j)
        pairs.push_back({sample_id(a, j), sample_id(b, j), PairLabel::doppelganger});
    }
  }

  // Nonmated volume: cross-subject pairs that are neither the same subject
  // nor doppelganger partners.
  auto partners = [&](std::size_t k1, std::size_t k2) {
    if (k1 >= n_duo_subjects || k2 >= n_duo_subjects) return false;
    return k1 / 2 == k2 / 2;
  };
  for (std::size_t k = 0; k < cfg.n_nonmated; ++k) {
    std::size_t r1 = rng.index(cfg.n_subjects);
    std::size_t r2;
    do {
      r2 = rng.index(cfg.n_subjects);
    } while (r2 == r1 || partners(r1, r2));
    out.eval_pairs.push_back({sample_id(r1, rng.index(s)), sample_id(r2, rng.index(s)),
                              PairLabel::nonmated});
  }
  return out;
}

}  // namespace dgd
