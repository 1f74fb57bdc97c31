#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"
#include "dgd/metrics.hpp"
#include "dgd/verify.hpp"

namespace dgd {

struct ScoredPair {
  std::string reference_id;
  std::string probe_id;
  double score = 0.0;
};

struct LabeledScore {
  PairLabel label = PairLabel::mated;
  double score = 0.0;
};

inline void write_score_csv(const std::string& path, const std::vector<ScoredPair>& rows,
                            const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (const auto& r : rows)
    out << r.reference_id << ',' << r.probe_id << ',' << format_double(r.score) << "\n";
}

inline void write_labeled_scores(const std::string& path, const std::vector<LabeledScore>& rows,
                                 const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (const auto& r : rows)
    out << label_name(r.label) << ',' << format_double(r.score) << "\n";
}

// Score rows in any of three layouts:
//   label,score
//   reference_id,probe_id,score            (labels joined from `pairs`)
//   reference_id,probe_id,label,score
// The layout is detected per file from the column count and must be uniform.
inline std::vector<LabeledScore> load_labeled_scores(const std::string& path,
                                                     const std::vector<TrialPair>* pairs = nullptr) {
  std::unordered_map<std::string, PairLabel> by_key;
  if (pairs)
    for (const auto& p : *pairs) by_key.emplace(p.reference_id + "\x1f" + p.probe_id, p.label);

  detail::LineReader r(path);
  std::string line;
  std::vector<LabeledScore> out;
  std::size_t cols = 0;
  while (r.next(line)) {
    auto f = split_char(line, ',');
    if (cols == 0) {
      cols = f.size();
      if (cols < 2 || cols > 4)
        detail::fail_at(path, r.line_no, "expected 2, 3, or 4 columns");
    }
    if (f.size() != cols)
      detail::fail_at(path, r.line_no, "inconsistent column count");
    LabeledScore ls;
    std::string_view score_field = trim(f[cols - 1]);
    if (!try_parse_double(score_field, ls.score))
      detail::fail_at(path, r.line_no, "invalid score '" + std::string(score_field) + "'");
    if (cols == 2 || cols == 4) {
      auto lab = parse_label(trim(f[cols - 2]));
      if (!lab) detail::fail_at(path, r.line_no, "unknown label '" + f[cols - 2] + "'");
      ls.label = *lab;
    } else {
      if (!pairs)
        detail::fail_at(path, r.line_no,
                        "3-column score file needs a pair list to supply labels");
      auto it = by_key.find(std::string(trim(f[0])) + "\x1f" + std::string(trim(f[1])));
      if (it == by_key.end())
        detail::fail_at(path, r.line_no, "no pair entry labels (" + f[0] + ", " + f[1] + ")");
      ls.label = it->second;
    }
    out.push_back(ls);
  }
  return out;
}

inline ScoreSet split_by_label(const std::vector<LabeledScore>& rows) {
  ScoreSet s;
  for (const auto& r : rows) {
    switch (r.label) {
      case PairLabel::mated: s.mated.push_back(r.score); break;
      case PairLabel::nonmated: s.nonmated.push_back(r.score); break;
      case PairLabel::doppelganger: s.attack.push_back(r.score); break;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation report: five fixed columns, one row per measured value.
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string dataset;
  std::string configuration;
  std::string metric;
  std::string operating_point;
  std::string value;
};

inline void write_report(const std::string& path, const std::vector<ReportRow>& rows,
                         const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "dataset,configuration,metric,operating_point,value\n";
  for (const auto& r : rows)
    out << r.dataset << ',' << r.configuration << ',' << r.metric << ','
        << r.operating_point << ',' << r.value << "\n";
}

inline void write_det_csv(const std::string& path, const DetCurve& curve,
                          const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << (curve.axes == DetAxes::detection ? "threshold,apcer,bpcer\n"
                                           : "threshold,fmr,fnmr\n");
  for (const auto& p : curve.points)
    out << format_double(p.threshold) << ',' << format_double(p.error1) << ','
        << format_double(p.error2) << "\n";
}

inline std::string stat_field(const std::optional<double>& v) {
  return v ? format_double(*v) : "undefined";
}

// Stats table: one row per score category, sample conventions documented in
// the writer's comment lines.
inline void write_stats_csv(const std::string& path,
                            const std::vector<std::pair<std::string, DescriptiveStats>>& rows,
                            const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "category,mean,std_dev,skewness,excess_kurtosis\n";
  for (const auto& [cat, st] : rows)
    out << cat << ',' << format_double(st.mean) << ',' << stat_field(st.std_dev) << ','
        << stat_field(st.skewness) << ',' << stat_field(st.excess_kurtosis) << "\n";
}

struct DetectionReport {
  DeerResult deer;
  BpcerAtApcer bpcer10;
  BpcerAtApcer bpcer20;
  DetCurve curve;
};

inline DetectionReport detection_report(const std::vector<double>& attack,
                                        const std::vector<double>& bonafide) {
  DetectionReport r;
  r.deer = d_eer(attack, bonafide);
  r.bpcer10 = bpcer_at_apcer(attack, bonafide, 0.10);
  r.bpcer20 = bpcer_at_apcer(attack, bonafide, 0.05);
  r.curve = det_curve(attack, bonafide);
  return r;
}

inline void append_detection_rows(std::vector<ReportRow>& rows, const std::string& dataset,
                                  const std::string& config, const DetectionReport& r) {
  rows.push_back({dataset, config, "D-EER", "APCER=BPCER", format_double(r.deer.rate)});
  rows.push_back({dataset, config, "D-EER-threshold", "APCER=BPCER",
                  format_double(r.deer.threshold.value)});
  rows.push_back({dataset, config, "BPCER10", "APCER<=0.1", format_double(r.bpcer10.bpcer)});
  rows.push_back({dataset, config, "BPCER20", "APCER<=0.05", format_double(r.bpcer20.bpcer)});
}

// Verification operating points at the conventional FMR targets.
inline const std::vector<double>& fmr_targets() {
  static const std::vector<double> t{0.01, 0.001, 0.0001};
  return t;
}

inline void append_verification_rows(std::vector<ReportRow>& rows, const std::string& dataset,
                                     const std::string& config, const ScoreSet& sims) {
  for (double target : fmr_targets()) {
    std::string op = "FMR<=" + format_double(target);
    auto tr = threshold_at_fmr(sims.nonmated, target);
    rows.push_back({dataset, config, "threshold", op, format_double(tr.threshold.value)});
    rows.push_back({dataset, config, "FMR", op, format_double(tr.achieved_fmr)});
    rows.push_back({dataset, config, "FNMR", op,
                    format_double(fnmr(sims.mated, tr.threshold.value))});
    if (!sims.attack.empty())
      rows.push_back({dataset, config, "IAPMR", op,
                      format_double(iapmr(sims.attack, tr.threshold.value))});
  }
}

inline void append_stats_rows(std::vector<ReportRow>& rows, const std::string& dataset,
                              const std::string& config, const ScoreSet& sims) {
  auto add = [&](const std::string& category, const std::vector<double>& scores) {
    if (scores.empty()) return;
    auto st = descriptive_stats(scores);
    rows.push_back({dataset, config, "mean", category, format_double(st.mean)});
    rows.push_back({dataset, config, "std_dev", category, stat_field(st.std_dev)});
    rows.push_back({dataset, config, "skewness", category, stat_field(st.skewness)});
    rows.push_back({dataset, config, "excess_kurtosis", category, stat_field(st.excess_kurtosis)});
  };
  add("mated", sims.mated);
  add("nonmated", sims.nonmated);
  add("doppelganger", sims.attack);
}

}  // namespace dgd
