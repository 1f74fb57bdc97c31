#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "dgd/common.hpp"

namespace dgd {

// Decision convention, fixed globally: a score counts as "accepted" or
// "classified as attack" when score >= threshold. All rates are exact
// empirical fractions count / n with no smoothing.

struct Threshold {
  double value = 0.0;
  std::string criterion;
};

namespace detail {

inline std::vector<double> sorted_copy(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw Error::data(std::string("empty ") + what + " score list");
  for (double s : v)
    if (!std::isfinite(s)) throw Error::data(std::string("non-finite ") + what + " score");
  std::vector<double> out = v;
  std::sort(out.begin(), out.end());
  return out;
}

// Number of elements >= t in an ascending list.
inline std::size_t count_ge(const std::vector<double>& sorted, double t) {
  return sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t);
}

// Number of elements < t in an ascending list.
inline std::size_t count_lt(const std::vector<double>& sorted, double t) {
  return std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
}

// Every threshold at which any empirical rate over these scores can change,
// plus one candidate inside each flat segment and on both outer sides:
// the distinct scores themselves, midpoints of consecutive distinct scores,
// and sentinels below the minimum and above the maximum.
inline std::vector<double> candidate_thresholds(const std::vector<double>& pooled_sorted) {
  std::vector<double> distinct;
  for (double s : pooled_sorted)
    if (distinct.empty() || s != distinct.back()) distinct.push_back(s);
  std::vector<double> out;
  out.reserve(distinct.size() * 2 + 2);
  out.push_back(distinct.front() - 1.0);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (i > 0) {
      double mid = (distinct[i - 1] + distinct[i]) / 2.0;
      if (mid > distinct[i - 1] && mid < distinct[i]) out.push_back(mid);
    }
    out.push_back(distinct[i]);
  }
  out.push_back(distinct.back() + 1.0);
  return out;
}

}  // namespace detail

// Verification error rates. Scores are similarity scores.
inline double fmr(const std::vector<double>& nonmated, double t) {
  auto s = detail::sorted_copy(nonmated, "nonmated");
  return static_cast<double>(detail::count_ge(s, t)) / static_cast<double>(s.size());
}

inline double fnmr(const std::vector<double>& mated, double t) {
  auto s = detail::sorted_copy(mated, "mated");
  return static_cast<double>(detail::count_lt(s, t)) / static_cast<double>(s.size());
}

// Fraction of attack presentations whose similarity reaches the match
// threshold.
inline double iapmr(const std::vector<double>& attack, double t) {
  auto s = detail::sorted_copy(attack, "attack");
  return static_cast<double>(detail::count_ge(s, t)) / static_cast<double>(s.size());
}

// Detection error rates. Scores are detection scores (1 = attack side), so a
// missed attack is an attack score below the threshold.
inline double apcer(const std::vector<double>& attack, double t) {
  auto s = detail::sorted_copy(attack, "attack");
  return static_cast<double>(detail::count_lt(s, t)) / static_cast<double>(s.size());
}

inline double bpcer(const std::vector<double>& bonafide, double t) {
  auto s = detail::sorted_copy(bonafide, "bonafide");
  return static_cast<double>(detail::count_ge(s, t)) / static_cast<double>(s.size());
}

struct ThresholdAtFmr {
  Threshold threshold;
  double achieved_fmr = 0.0;
  bool unreachable = false;  // target below 1/n: only FMR = 0 satisfies it
};

// Smallest candidate threshold whose FMR does not exceed the target.
inline ThresholdAtFmr threshold_at_fmr(const std::vector<double>& nonmated,
                                       double target_fmr) {
  if (!(target_fmr > 0.0 && target_fmr < 1.0))
    throw Error::data("target FMR must lie strictly between 0 and 1");
  auto s = detail::sorted_copy(nonmated, "nonmated");
  auto n = static_cast<double>(s.size());
  ThresholdAtFmr r;
  r.unreachable = target_fmr * n < 1.0;
  for (double t : detail::candidate_thresholds(s)) {
    double v = static_cast<double>(detail::count_ge(s, t)) / n;
    if (v <= target_fmr) {
      r.threshold.value = t;
      r.achieved_fmr = v;
      r.threshold.criterion = "FMR<=" + format_double(target_fmr);
      return r;
    }
  }
  // Unreachable by construction: the above-max sentinel always yields FMR 0.
  throw Error::compute("threshold sweep exhausted without reaching the target");
}

struct DeerResult {
  double rate = 0.0;
  Threshold threshold;
  double apcer_at = 0.0;
  double bpcer_at = 0.0;
};

// Threshold minimizing |APCER - BPCER|; ties prefer lower BPCER, then lower
// threshold. Comparisons are exact: rates are compared as integer cross
// products, never as rounded doubles.
inline DeerResult d_eer(const std::vector<double>& attack,
                        const std::vector<double>& bonafide) {
  auto a = detail::sorted_copy(attack, "attack");
  auto b = detail::sorted_copy(bonafide, "bonafide");
  auto na = static_cast<std::int64_t>(a.size());
  auto nb = static_cast<std::int64_t>(b.size());

  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  bool have = false;
  std::int64_t best_gap = 0, best_cb = 0, best_ca = 0;
  double best_t = 0.0;
  for (double t : detail::candidate_thresholds(pooled)) {
    auto ca = static_cast<std::int64_t>(detail::count_lt(a, t));   // missed attacks
    auto cb = static_cast<std::int64_t>(detail::count_ge(b, t));   // flagged bona fides
    std::int64_t gap = std::llabs(ca * nb - cb * na);              // |APCER - BPCER| * na*nb
    if (!have || gap < best_gap ||
        (gap == best_gap && cb < best_cb)) {  // lower BPCER wins ties
      have = true;
      best_gap = gap;
      best_ca = ca;
      best_cb = cb;
      best_t = t;
    }
  }
  DeerResult r;
  r.apcer_at = static_cast<double>(best_ca) / static_cast<double>(na);
  r.bpcer_at = static_cast<double>(best_cb) / static_cast<double>(nb);
  r.rate = (r.apcer_at + r.bpcer_at) / 2.0;
  r.threshold.value = best_t;
  r.threshold.criterion = "D-EER";
  return r;
}

struct BpcerAtApcer {
  double bpcer = 0.0;
  Threshold threshold;
  double achieved_apcer = 0.0;
  bool unreachable = false;  // target below 1/n_attack: only APCER = 0 qualifies
};

// BPCER at the most permissive operating point still holding APCER within the
// target: the highest candidate threshold with APCER <= target (APCER grows
// with the threshold, BPCER shrinks, so this minimizes BPCER subject to the
// constraint).
inline BpcerAtApcer bpcer_at_apcer(const std::vector<double>& attack,
                                   const std::vector<double>& bonafide,
                                   double apcer_target) {
  if (!(apcer_target > 0.0 && apcer_target < 1.0))
    throw Error::data("APCER target must lie strictly between 0 and 1");
  auto a = detail::sorted_copy(attack, "attack");
  auto b = detail::sorted_copy(bonafide, "bonafide");
  auto na = static_cast<double>(a.size());

  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  BpcerAtApcer r;
  r.unreachable = apcer_target * na < 1.0;
  bool found = false;
  for (double t : detail::candidate_thresholds(pooled)) {
    double v = static_cast<double>(detail::count_lt(a, t)) / na;
    if (v <= apcer_target) {
      // Candidates ascend, so the last hit is the highest qualifying threshold.
      found = true;
      r.threshold.value = t;
      r.achieved_apcer = v;
    }
  }
  if (!found)
    throw Error::compute("APCER sweep found no qualifying threshold");  // below-min always qualifies
  r.bpcer = static_cast<double>(detail::count_ge(b, r.threshold.value)) /
            static_cast<double>(b.size());
  r.threshold.criterion = "APCER<=" + format_double(apcer_target);
  return r;
}

enum class DetAxes {
  detection,     // (APCER, BPCER): error1 rises with the threshold, error2 falls
  verification,  // (FMR, FNMR): error1 falls with the threshold, error2 rises
};

struct DetPoint {
  double threshold = 0.0;
  double error1 = 0.0;
  double error2 = 0.0;
};

struct DetCurve {
  DetAxes axes = DetAxes::detection;
  std::vector<DetPoint> points;  // thresholds strictly increasing
};

namespace detail {

inline std::vector<double> curve_thresholds(const std::vector<double>& a,
                                            const std::vector<double>& b) {
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  std::vector<double> ts;
  for (double s : pooled)
    if (ts.empty() || s != ts.back()) ts.push_back(s);
  ts.push_back(pooled.back() + 1.0);  // operating point rejecting everything
  return ts;
}

inline void subsample(std::vector<DetPoint>& pts, std::size_t n_points) {
  if (n_points < 2 || pts.size() <= n_points) return;
  std::vector<DetPoint> kept;
  kept.reserve(n_points);
  std::size_t last = pts.size() - 1;
  std::size_t prev_idx = pts.size();
  for (std::size_t k = 0; k < n_points; ++k) {
    std::size_t idx = (k * last + (n_points - 1) / 2) / (n_points - 1);
    if (idx != prev_idx) kept.push_back(pts[idx]);
    prev_idx = idx;
  }
  pts = std::move(kept);
}

}  // namespace detail

// Detection error tradeoff sampled at every distinct observed score plus the
// reject-all sentinel. n_points = 0 keeps every point; otherwise the curve is
// subsampled preserving both endpoints.
inline DetCurve det_curve(const std::vector<double>& attack,
                          const std::vector<double>& bonafide,
                          std::size_t n_points = 0) {
  auto a = detail::sorted_copy(attack, "attack");
  auto b = detail::sorted_copy(bonafide, "bonafide");
  DetCurve c;
  c.axes = DetAxes::detection;
  for (double t : detail::curve_thresholds(a, b)) {
    DetPoint p;
    p.threshold = t;
    p.error1 = static_cast<double>(detail::count_lt(a, t)) / static_cast<double>(a.size());
    p.error2 = static_cast<double>(detail::count_ge(b, t)) / static_cast<double>(b.size());
    c.points.push_back(p);
  }
  detail::subsample(c.points, n_points);
  return c;
}

inline DetCurve det_curve_verification(const std::vector<double>& nonmated,
                                       const std::vector<double>& mated,
                                       std::size_t n_points = 0) {
  auto nm = detail::sorted_copy(nonmated, "nonmated");
  auto m = detail::sorted_copy(mated, "mated");
  DetCurve c;
  c.axes = DetAxes::verification;
  for (double t : detail::curve_thresholds(nm, m)) {
    DetPoint p;
    p.threshold = t;
    p.error1 = static_cast<double>(detail::count_ge(nm, t)) / static_cast<double>(nm.size());
    p.error2 = static_cast<double>(detail::count_lt(m, t)) / static_cast<double>(m.size());
    c.points.push_back(p);
  }
  detail::subsample(c.points, n_points);
  return c;
}

}  // namespace dgd
