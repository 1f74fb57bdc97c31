// Acceptance gate: one test case per criterion, each reported as a single
// [ACCEPTANCE] PASS/FAIL line by the listener at the bottom's registration.
// Everything runs from synthesized data; no fixture files are required.
#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"
#include "dgd/features.hpp"
#include "dgd/metrics.hpp"
#include "dgd/morph.hpp"
#include "dgd/png_io.hpp"
#include "dgd/report.hpp"
#include "dgd/svm.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using Catch::Matchers::WithinAbs;
using testutil::read_file;
using testutil::run;

namespace {

const std::string kBin = DGD_BIN;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Shared synthetic pipeline: synth -> train -> score -> stats -> evaluate,
// run through the CLI binary with relative paths so reruns in a second
// directory must be byte-identical. Builds are cached per tag.
// ---------------------------------------------------------------------------

struct PipelineRun {
  std::string cwd;
  std::map<std::string, double> report;  // "metric|operating_point" -> value
  double deer = 0.0;
};

testutil::TempDir& arena() {
  static testutil::TempDir dir;
  return dir;
}

double& pipeline_seconds() {
  static double total = 0.0;
  return total;
}

std::vector<std::string> report_data_lines(const std::string& path) {
  std::vector<std::string> out;
  std::string text = read_file(path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

const PipelineRun& pipeline(const std::string& tag, unsigned seed, const std::string& angle) {
  static std::map<std::string, PipelineRun> cache;
  auto it = cache.find(tag);
  if (it != cache.end()) return it->second;

  auto t0 = std::chrono::steady_clock::now();
  PipelineRun p;
  p.cwd = arena().file(tag);
  std::filesystem::create_directories(p.cwd);
  const std::string seed_s = std::to_string(seed);

  auto step = [&](const std::vector<std::string>& argv) {
    auto r = run(argv, p.cwd);
    INFO(argv[argv.size() - 1] << " stderr: " << r.err);
    REQUIRE(r.exit_code == 0);
  };
  step({kBin, "--seed", seed_s, "--dim", "128", "--out-dir", "data", "synth", "--subjects",
        "200", "--dg-pairs", "100", "--samples", "3", "--angle", angle, "--noise", "0.12",
        "--nonmated", "5000"});
  step({kBin, "--seed", seed_s, "--dim", "128", "--out-dir", "out", "train", "--embeddings",
        "data/embeddings.emb", "--pairs", "data/train_pairs.csv", "--model-out", "model.svm"});
  step({kBin, "--dim", "128", "--out-dir", "out", "score", "--model", "out/model.svm",
        "--embeddings", "data/embeddings.emb", "--pairs", "data/eval_pairs.csv", "--out",
        "scores.csv"});
  step({kBin, "--dim", "128", "--out-dir", "out", "stats", "--embeddings",
        "data/embeddings.emb", "--pairs", "data/eval_pairs.csv", "--out", "stats.csv",
        "--dump-scores", "sims.csv"});
  step({kBin, "--dim", "128", "--out-dir", "out", "evaluate", "--scores", "out/scores.csv",
        "--pairs", "data/eval_pairs.csv", "--similarity", "out/sims.csv"});

  auto lines = report_data_lines(p.cwd + "/out/report.csv");
  REQUIRE(!lines.empty());
  REQUIRE(lines[0] == "dataset,configuration,metric,operating_point,value");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      std::size_t c = lines[i].find(',', pos);
      if (c == std::string::npos) {
        f.push_back(lines[i].substr(pos));
        break;
      }
      f.push_back(lines[i].substr(pos, c - pos));
      pos = c + 1;
    }
    REQUIRE(f.size() == 5);
    p.report[f[2] + "|" + f[3]] = std::stod(f[4]);
  }
  REQUIRE(p.report.count("D-EER|APCER=BPCER") == 1);
  p.deer = p.report.at("D-EER|APCER=BPCER");

  pipeline_seconds() += seconds_since(t0);
  return cache.emplace(tag, std::move(p)).first->second;
}

// svm problems shared by the solver-equivalence criterion
dgd::DifferenceVector feat(std::vector<double> values, int label) {
  dgd::DifferenceVector f;
  f.values = std::move(values);
  f.label = label > 0 ? dgd::PairLabel::doppelganger : dgd::PairLabel::mated;
  return f;
}

std::vector<double> full_alpha(const dgd::SvmModel& m,
                               const std::vector<dgd::DifferenceVector>& f) {
  std::vector<double> alpha(f.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < f.size() && k < m.support_vectors.size(); ++i) {
    if (f[i].values == m.support_vectors[k]) {
      alpha[i] = std::fabs(m.coef[k]);
      ++k;
    }
  }
  REQUIRE(k == m.support_vectors.size());
  return alpha;
}

// convex hull (counterclockwise) and signed classification with a safety
// margin, shared by the morph invariants
std::vector<dgd::Point> hull_of(std::vector<dgd::Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const dgd::Point& a, const dgd::Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const dgd::Point& a, const dgd::Point& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  if (pts.size() < 3) return {};
  auto cross = [](const dgd::Point& o, const dgd::Point& a, const dgd::Point& b) {
    return static_cast<long double>(a.x - o.x) * (b.y - o.y) -
           static_cast<long double>(a.y - o.y) * (b.x - o.x);
  };
  std::vector<dgd::Point> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) return {};
  return h;
}

// +1 inside by at least `margin`, -1 outside by at least `margin`, 0 ambiguous
int classify_against_hull(const std::vector<dgd::Point>& hull, double px, double py,
                          double margin) {
  if (hull.empty()) return -1;
  int verdict = 1;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    long double nx = -(b.y - a.y), ny = b.x - a.x;
    long double len = std::sqrt(nx * nx + ny * ny);
    if (len == 0.0L) continue;
    long double d = ((px - a.x) * nx + (py - a.y) * ny) / len;
    if (d < -margin) return -1;
    if (d < margin) verdict = 0;
  }
  return verdict;
}

}  // namespace

// ---------------------------------------------------------------------------
// 1. Results measured on proprietary face corpora and a commercial comparator
// cannot be checked here; the substitute is a fully synthetic pipeline whose
// report must cover the same metric families those result tables use.
// ---------------------------------------------------------------------------
TEST_CASE("1. synthetic pipeline report covers all external-study metric families") {
  const auto& p = pipeline("a60", 42, "60");

  const std::vector<std::string> detection_keys = {
      "D-EER|APCER=BPCER", "D-EER-threshold|APCER=BPCER", "BPCER10|APCER<=0.1",
      "BPCER20|APCER<=0.05"};
  for (const auto& k : detection_keys) {
    INFO("missing report row " << k);
    REQUIRE(p.report.count(k) == 1);
    CHECK(std::isfinite(p.report.at(k)));
  }

  for (const std::string op : {"FMR<=0.01", "FMR<=0.001", "FMR<=1e-04"})
    for (const std::string metric : {"threshold", "FMR", "FNMR", "IAPMR"}) {
      INFO("missing report row " << metric << "|" << op);
      REQUIRE(p.report.count(metric + "|" + op) == 1);
    }

  for (const std::string cat : {"mated", "nonmated", "doppelganger"})
    for (const std::string metric : {"mean", "std_dev", "skewness", "excess_kurtosis"}) {
      INFO("missing report row " << metric << "|" << cat);
      REQUIRE(p.report.count(metric + "|" + cat) == 1);
    }

  std::string det = read_file(p.cwd + "/out/det.csv");
  CHECK(det.find("threshold,apcer,bpcer") != std::string::npos);
}

// ---------------------------------------------------------------------------
// 2. The working-set solver must match a brute-force reference QP solver on
// randomized small problems: dual objective within 1e-6, and training-point
// decision signs equal wherever the reference pins the bias (an interior
// support vector exists; without one the optimal bias is an interval and two
// optimal solvers may legitimately differ).
// ---------------------------------------------------------------------------
TEST_CASE("2. working-set svm solver matches a brute-force reference") {
  auto t0 = std::chrono::steady_clock::now();
  dgd::Rng rng(20240229);
  const double c_grid[] = {0.1, 1.0, 10.0};
  const double g_grid[] = {0.25, 1.0, 4.0};

  int reps = 220;
  std::size_t signs_checked = 0, pinned_reps = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const std::size_t n = 4 + rng.index(27);
    const std::size_t dim = 1 + rng.index(4);
    const double C = c_grid[rng.index(3)];
    const double gamma = g_grid[rng.index(3)];

    std::vector<dgd::DifferenceVector> f;
    oracle::QpProblem qp;
    qp.C = C;
    qp.gamma = gamma;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (auto& x : v) x = rng.gaussian();
      int label = i == 0 ? +1 : i == 1 ? -1 : (rng.index(2) ? +1 : -1);
      qp.x.push_back(v);
      qp.y.push_back(label);
      f.push_back(feat(std::move(v), label));
    }

    auto ref = oracle::solve_reference_qp(qp);
    REQUIRE(ref.kkt_gap < 1e-8);

    dgd::SvmConfig sc;
    sc.C = C;
    sc.gamma = gamma;
    sc.tolerance = 1e-10;
    sc.max_passes = 5'000'000;
    dgd::SvmModel model = dgd::train(f, sc);

    CAPTURE(rep, n, dim, C, gamma);
    CHECK_THAT(dgd::model_dual_objective(model), WithinAbs(ref.objective, 1e-6));
    REQUIRE(oracle::solution_kkt_gap(qp, full_alpha(model, f)) < 1e-6);

    bool pinned = false;
    for (double a : ref.alpha)
      if (a > 0.01 * C && a < 0.99 * C) pinned = true;
    if (!pinned) continue;
    ++pinned_reps;
    for (std::size_t i = 0; i < n; ++i) {
      double fo = oracle::qp_decision(qp, ref, qp.x[i]);
      if (std::fabs(fo) <= 1e-2) continue;
      double fm = dgd::decision_value(model, qp.x[i]);
      CAPTURE(i, fo, fm);
      REQUIRE((fo > 0.0) == (fm > 0.0));
      ++signs_checked;
    }
  }
  REQUIRE(pinned_reps >= static_cast<std::size_t>(reps) / 2);
  REQUIRE(signs_checked >= 500);
  CHECK(seconds_since(t0) < 30.0);
}

// ---------------------------------------------------------------------------
// 3. Every rate and every selected operating point must match an O(n*m)
// sweep oracle exactly; targets are dyadic rationals so the comparisons are
// free of rounding ambiguity.
// ---------------------------------------------------------------------------
TEST_CASE("3. metric selection matches the exhaustive sweep oracle exactly") {
  auto t0 = std::chrono::steady_clock::now();
  dgd::Rng rng(555);
  const oracle::Rational targets[] = {{1, 2}, {1, 4}, {3, 8}, {1, 8}, {1, 16},
                                      {5, 16}, {1, 32}, {1, 64}, {1, 128}, {1, 256}};

  auto random_scores = [&](std::size_t n) {
    std::vector<double> s(n);
    switch (rng.index(4)) {
      case 0:
        for (auto& v : s) v = static_cast<double>(rng.index(17)) / 16.0;
        break;
      case 1:
        for (auto& v : s) v = rng.uniform();
        break;
      case 2: {
        double c = rng.uniform();
        for (auto& v : s) v = c;
        break;
      }
      default:
        for (auto& v : s)
          v = (rng.index(2) ? 0.25 : 0.75) + static_cast<double>(rng.index(5)) / 64.0;
    }
    return s;
  };

  int reps = 520;
  int unreachable_seen = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::size_t na = 1 + rng.index(60);
    std::size_t nb = 1 + rng.index(60);
    if (rep % 12 == 0) (rep % 24 == 0 ? na : nb) = 1 + rng.index(1000);
    auto attack = random_scores(na);
    auto bona = random_scores(nb);
    CAPTURE(rep, na, nb);

    auto deer = dgd::d_eer(attack, bona);
    auto pick = oracle::sweep_d_eer(attack, bona);
    REQUIRE(pick.found);
    REQUIRE(deer.threshold.value == pick.threshold);
    REQUIRE(deer.apcer_at == static_cast<double>(pick.ca) / static_cast<double>(na));
    REQUIRE(deer.bpcer_at == static_cast<double>(pick.cb) / static_cast<double>(nb));
    REQUIRE(deer.rate == (deer.apcer_at + deer.bpcer_at) / 2.0);

    oracle::Rational target = targets[rng.index(10)];
    auto lib = dgd::bpcer_at_apcer(attack, bona, target.value());
    auto ora = oracle::sweep_bpcer_at_apcer(attack, bona, target);
    REQUIRE(ora.found);
    REQUIRE(lib.threshold.value == ora.threshold);
    REQUIRE(lib.bpcer == static_cast<double>(ora.cb) / static_cast<double>(nb));
    REQUIRE(lib.achieved_apcer == static_cast<double>(ora.ca) / static_cast<double>(na));
    REQUIRE(lib.unreachable ==
            (target.num * static_cast<std::int64_t>(na) < target.den));
    if (lib.unreachable) ++unreachable_seen;

    auto fpick = oracle::sweep_threshold_at_fmr(bona, target);
    auto flib = dgd::threshold_at_fmr(bona, target.value());
    REQUIRE(flib.threshold.value == fpick.threshold);
    REQUIRE(flib.achieved_fmr == static_cast<double>(fpick.c) / static_cast<double>(nb));
    REQUIRE(flib.unreachable == fpick.unreachable);

    for (int k = 0; k < 3; ++k) {
      double t;
      if (k == 0) t = attack[rng.index(na)];
      else if (k == 1) t = bona[rng.index(nb)];
      else t = rng.uniform();
      REQUIRE(dgd::fmr(bona, t) ==
              static_cast<double>(oracle::sweep_count_ge(bona, t)) / static_cast<double>(nb));
      REQUIRE(dgd::fnmr(bona, t) ==
              static_cast<double>(oracle::sweep_count_lt(bona, t)) / static_cast<double>(nb));
      REQUIRE(dgd::iapmr(attack, t) ==
              static_cast<double>(oracle::sweep_count_ge(attack, t)) / static_cast<double>(na));
      REQUIRE(dgd::apcer(attack, t) ==
              static_cast<double>(oracle::sweep_count_lt(attack, t)) / static_cast<double>(na));
      REQUIRE(dgd::bpcer(bona, t) ==
              static_cast<double>(oracle::sweep_count_ge(bona, t)) / static_cast<double>(nb));
    }
  }
  REQUIRE(unreachable_seen > 5);
  CHECK(seconds_since(t0) < 60.0);
}

// ---------------------------------------------------------------------------
// 4. Morphing invariants on randomized images: self-morph is the identity,
// zero warp + zero blend returns the target, pixels outside the landmark
// hull keep target values at feather 0, and landmark interpolation is exact
// at the endpoints and the midpoint.
// ---------------------------------------------------------------------------
TEST_CASE("4. morph invariants hold on randomized images") {
  auto t0 = std::chrono::steady_clock::now();
  dgd::Rng rng(4242);

  for (int rep = 0; rep < 50; ++rep) {
    const int w = rep % 10 == 9 ? 200 + static_cast<int>(rng.index(57))
                                : 32 + static_cast<int>(rng.index(97));
    const int h = rep % 10 == 9 ? 200 + static_cast<int>(rng.index(57))
                                : 32 + static_cast<int>(rng.index(97));
    const std::size_t k = 5 + rng.index(6);
    CAPTURE(rep, w, h, k);

    auto target = testutil::random_image(rng, w, h);
    auto source = testutil::random_image(rng, w, h);
    dgd::LandmarkSet tl{"t", testutil::random_landmarks(rng, w, h, k, 4.0)};
    dgd::LandmarkSet sl{"s", testutil::random_landmarks(rng, w, h, k, 4.0)};

    dgd::MorphParams p;
    p.warp_weight = rng.uniform();
    p.blend_alpha = rng.uniform();
    p.feather_radius = static_cast<int>(rng.index(5));
    auto self = dgd::generate_doppelganger_pair(target, tl, target, tl, p);
    REQUIRE(self.image.pixels == target.pixels);

    dgd::MorphParams zero;
    zero.warp_weight = 0.0;
    zero.blend_alpha = 0.0;
    zero.feather_radius = static_cast<int>(rng.index(5));
    auto kept = dgd::generate_doppelganger_pair(target, tl, source, sl, zero);
    REQUIRE(kept.image.pixels == target.pixels);
    REQUIRE(kept.landmarks.points.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      REQUIRE(kept.landmarks.points[i].x == tl.points[i].x);
      REQUIRE(kept.landmarks.points[i].y == tl.points[i].y);
    }

    dgd::MorphParams hard;
    hard.warp_weight = 0.5;
    hard.blend_alpha = 0.5;
    hard.feather_radius = 0;
    auto morph = dgd::generate_doppelganger_pair(target, tl, source, sl, hard);
    auto hull = hull_of(morph.landmarks.points);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (classify_against_hull(hull, x, y, 1e-6) != -1) continue;
        for (int c = 0; c < 3; ++c) {
          std::size_t idx = (static_cast<std::size_t>(y) * w + x) * 3 + c;
          REQUIRE(morph.image.pixels[idx] == target.pixels[idx]);
        }
      }

    auto at0 = dgd::interpolate_landmarks(tl, sl, 0.0);
    auto at1 = dgd::interpolate_landmarks(tl, sl, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
      REQUIRE(at0.points[i].x == tl.points[i].x);
      REQUIRE(at0.points[i].y == tl.points[i].y);
      REQUIRE(at1.points[i].x == sl.points[i].x);
      REQUIRE(at1.points[i].y == sl.points[i].y);
      REQUIRE(morph.landmarks.points[i].x == (tl.points[i].x + sl.points[i].x) / 2.0);
      REQUIRE(morph.landmarks.points[i].y == (tl.points[i].y + sl.points[i].y) / 2.0);
    }
  }
  CHECK(seconds_since(t0) < 60.0);
}

// ---------------------------------------------------------------------------
// 5. End-to-end synthetic pipeline: near-perfect detection at a wide duo
// angle, a cross-seed match within half a percentage point, and detection
// collapsing towards chance as the duo angle shrinks to zero.
// ---------------------------------------------------------------------------
TEST_CASE("5. detection quality tracks the synthetic doppelganger separation") {
  const auto& wide = pipeline("a60", 42, "60");
  const auto& wide_reseeded = pipeline("a60-seed43", 43, "60");
  const auto& mid = pipeline("a25", 42, "25");
  const auto& collapsed = pipeline("a0", 42, "0");

  CAPTURE(wide.deer, wide_reseeded.deer, mid.deer, collapsed.deer);
  CHECK(wide.deer < 0.25);
  CHECK(std::fabs(wide.deer - wide_reseeded.deer) <= 0.005);
  CHECK(wide.deer <= mid.deer + 1e-12);
  CHECK(mid.deer <= collapsed.deer + 1e-12);
  CHECK(collapsed.deer >= 0.40);
  CHECK(collapsed.deer <= 0.60);
  CHECK(pipeline_seconds() < 120.0);
}

// ---------------------------------------------------------------------------
// 6. Report protocol shape: verification operating points at FMR 1%, 0.1%,
// 0.01% with FNMR and IAPMR, detection summary with D-EER/BPCER10/BPCER20,
// and lookalike attacks must inflate the match rate at FMR 1% by >= 10x.
// ---------------------------------------------------------------------------
TEST_CASE("6. lookalike match rate dwarfs the false match rate at 1 percent") {
  const auto& p = pipeline("a60", 42, "60");

  REQUIRE(p.report.count("IAPMR|FMR<=0.01") == 1);
  REQUIRE(p.report.count("FMR|FMR<=0.01") == 1);
  REQUIRE(p.report.count("FNMR|FMR<=0.01") == 1);
  REQUIRE(p.report.count("BPCER10|APCER<=0.1") == 1);
  REQUIRE(p.report.count("BPCER20|APCER<=0.05") == 1);

  double iapmr = p.report.at("IAPMR|FMR<=0.01");
  double achieved_fmr = p.report.at("FMR|FMR<=0.01");
  CAPTURE(iapmr, achieved_fmr);
  REQUIRE(achieved_fmr > 0.0);
  CHECK(iapmr >= 10.0 * achieved_fmr);
}

// ---------------------------------------------------------------------------
// 7. Serialization: the model round-trips with bitwise-equal decision values
// on 100 random probes, and every text/image format the tools ingest
// round-trips byte-exact.
// ---------------------------------------------------------------------------
TEST_CASE("7. model and data formats round-trip exactly") {
  testutil::TempDir dir;
  dgd::Rng rng(99);

  std::vector<dgd::DifferenceVector> f;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> v(8);
    for (auto& x : v) x = rng.gaussian();
    f.push_back(feat(std::move(v), i < 2 ? (i == 0 ? 1 : -1) : (rng.index(2) ? 1 : -1)));
  }
  dgd::SvmConfig sc;
  dgd::SvmModel model = dgd::train(f, sc);
  dgd::calibrate(model, dgd::calibration_split(f, 0.25, 7));

  const std::string m1 = dir.file("m1.svm");
  const std::string m2 = dir.file("m2.svm");
  dgd::save_model(m1, model, {"roundtrip"});
  dgd::SvmModel loaded = dgd::load_model(m1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> probe(8);
    for (auto& x : probe) x = rng.gaussian();
    REQUIRE(dgd::decision_value(model, probe) == dgd::decision_value(loaded, probe));
    REQUIRE(dgd::detection_score(model, probe) == dgd::detection_score(loaded, probe));
  }
  dgd::save_model(m2, loaded, {"roundtrip"});
  REQUIRE(read_file(m1) == read_file(m2));

  std::vector<dgd::Embedding> embs;
  for (int i = 0; i < 12; ++i) {
    dgd::Embedding e;
    e.image_id = "img" + std::to_string(i);
    e.subject_id = "s" + std::to_string(i / 3);
    e.values.resize(6);
    for (auto& v : e.values) v = rng.gaussian();
    embs.push_back(std::move(e));
  }
  dgd::write_embeddings(dir.file("a.emb"), embs, 6, {"c"});
  dgd::write_embeddings(dir.file("b.emb"), dgd::load_embeddings(dir.file("a.emb")), 6, {"c"});
  REQUIRE(read_file(dir.file("a.emb")) == read_file(dir.file("b.emb")));

  std::vector<dgd::TrialPair> pairs = {{"img0", "img1", dgd::PairLabel::mated},
                                       {"img0", "img3", dgd::PairLabel::nonmated},
                                       {"img2", "img9", dgd::PairLabel::doppelganger}};
  dgd::write_pairs(dir.file("a.csv"), pairs, {"c"});
  dgd::write_pairs(dir.file("b.csv"), dgd::load_pairs(dir.file("a.csv")), {"c"});
  REQUIRE(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));

  std::vector<dgd::LandmarkSet> sets = {
      {"img0", testutil::random_landmarks(rng, 64, 64, 5)},
      {"img1", testutil::random_landmarks(rng, 64, 64, 5)}};
  dgd::write_landmarks(dir.file("a.lmk"), sets, 5, {"c"});
  dgd::write_landmarks(dir.file("b.lmk"), dgd::load_landmarks(dir.file("a.lmk")), 5, {"c"});
  REQUIRE(read_file(dir.file("a.lmk")) == read_file(dir.file("b.lmk")));

  std::vector<dgd::LabeledScore> scores;
  for (int i = 0; i < 20; ++i)
    scores.push_back({i % 3 == 0 ? dgd::PairLabel::doppelganger
                      : i % 3 == 1 ? dgd::PairLabel::mated
                                   : dgd::PairLabel::nonmated,
                      rng.uniform()});
  dgd::write_labeled_scores(dir.file("as.csv"), scores, {"c"});
  dgd::write_labeled_scores(dir.file("bs.csv"), dgd::load_labeled_scores(dir.file("as.csv")),
                            {"c"});
  REQUIRE(read_file(dir.file("as.csv")) == read_file(dir.file("bs.csv")));

  auto img = testutil::random_image(rng, 29, 13);
  dgd::write_png(dir.file("a.png"), img);
  dgd::write_png(dir.file("b.png"), dgd::read_png(dir.file("a.png")));
  REQUIRE(read_file(dir.file("a.png")) == read_file(dir.file("b.png")));
}

// ---------------------------------------------------------------------------
// 8. Rerunning the full pipeline with the same seed and the same relative
// arguments must reproduce every written file byte for byte.
// ---------------------------------------------------------------------------
TEST_CASE("8. same-seed pipeline reruns are byte-identical") {
  const auto& first = pipeline("a60", 42, "60");
  const auto& again = pipeline("a60-rerun", 42, "60");

  for (const char* rel :
       {"data/embeddings.emb", "data/train_pairs.csv", "data/eval_pairs.csv", "out/model.svm",
        "out/scores.csv", "out/stats.csv", "out/sims.csv", "out/report.csv", "out/det.csv"}) {
    INFO("file " << rel);
    REQUIRE(read_file(first.cwd + "/" + rel) == read_file(again.cwd + "/" + rel));
  }
}

namespace {

class AcceptanceReporter : public Catch::EventListenerBase {
 public:
  using Catch::EventListenerBase::EventListenerBase;
  void testCaseEnded(const Catch::TestCaseStats& stats) override {
    std::cout << "[ACCEPTANCE] " << stats.testInfo->name << ": "
              << (stats.totals.assertions.allOk() ? "PASS" : "FAIL") << "\n";
  }
};

}  // namespace

CATCH_REGISTER_LISTENER(AcceptanceReporter)
