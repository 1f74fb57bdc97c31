#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "dgd/svm.hpp"
#include "support/oracles.hpp"
#include "support/testutil.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

dgd::DifferenceVector feat(std::vector<double> v, dgd::PairLabel label) {
  dgd::DifferenceVector d;
  d.values = std::move(v);
  d.label = label;
  return d;
}

// Random two-class training set with at least one point per class.
std::vector<dgd::DifferenceVector> random_training_set(dgd::Rng& rng, std::size_t n,
                                                       std::size_t dim, double spread) {
  std::vector<dgd::DifferenceVector> f;
  for (std::size_t i = 0; i < n; ++i) {
    bool dg = i == 0 ? true : (i == 1 ? false : rng.uniform() < 0.5);
    f.push_back(feat(testutil::random_vector(rng, dim, spread),
                     dg ? dgd::PairLabel::doppelganger : dgd::PairLabel::mated));
  }
  return f;
}

oracle::QpProblem as_qp(const std::vector<dgd::DifferenceVector>& f, double C, double gamma) {
  oracle::QpProblem p;
  for (const auto& d : f) {
    p.x.push_back(d.values);
    p.y.push_back(d.label == dgd::PairLabel::doppelganger ? 1.0 : -1.0);
  }
  p.C = C;
  p.gamma = gamma;
  return p;
}

}  // namespace

namespace {

// Rebuild the full alpha vector from a model's nonzero signed coefficients.
// Support vectors keep training order, so a single forward scan suffices.
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

}  // namespace

TEST_CASE("solver matches an independent dense QP reference") {
  // Randomized equivalence sweep: small dense problems, solved to high
  // precision by both the solver under test and an accelerated projected
  // gradient reference with an exact active-set finish. The solver's alphas
  // are re-verified against the optimality conditions measured by the
  // reference code, and its objective must match the reference optimum.
  // Decision values are only compared when the reference solution has an
  // interior support vector; without one the bias is not unique and two
  // optimal solutions may legitimately disagree near the boundary.
  auto t0 = std::chrono::steady_clock::now();
  dgd::Rng rng(20240819);
  const double cs[] = {0.1, 1.0, 10.0};
  const double gammas[] = {0.25, 1.0, 4.0};
  int checked = 0;
  int decision_checked = 0;

  for (int rep = 0; rep < 220; ++rep) {
    std::size_t n = 4 + rng.index(27);    // 4..30
    std::size_t dim = 1 + rng.index(4);   // 1..4
    double C = cs[rng.index(3)];
    double gamma = gammas[rng.index(3)];
    auto f = random_training_set(rng, n, dim, 1.5);

    dgd::SvmConfig cfg;
    cfg.C = C;
    cfg.gamma = gamma;
    cfg.tolerance = 1e-10;
    cfg.max_passes = 5'000'000;
    dgd::SvmModel model = dgd::train(f, cfg);

    auto qp = as_qp(f, C, gamma);
    auto ref = oracle::solve_reference_qp(qp);
    INFO("rep " << rep << ": n=" << n << " dim=" << dim << " C=" << C << " gamma=" << gamma);
    REQUIRE(ref.kkt_gap < 1e-8);

    double obj_model = dgd::model_dual_objective(model);
    REQUIRE_THAT(obj_model, Catch::Matchers::WithinAbs(ref.objective, 1e-6));

    // Independent re-check of the solver's optimality conditions.
    auto alpha = full_alpha(model, f);
    REQUIRE(oracle::solution_kkt_gap(qp, alpha) < 1e-6);

    bool pinned_bias = false;
    for (double a : ref.alpha)
      if (a > 0.01 * C && a < 0.99 * C) pinned_bias = true;
    if (pinned_bias) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        double fm = dgd::decision_value(model, f[i]);
        double fo = oracle::qp_decision(qp, ref, f[i].values);
        INFO("point " << i << ": model " << fm << " reference " << fo);
        REQUIRE_THAT(fm, Catch::Matchers::WithinAbs(fo, 5e-3));
        if (std::fabs(fo) > 1e-2) REQUIRE((fm > 0.0) == (fo > 0.0));
      }
      ++decision_checked;
    }
    ++checked;
  }
  REQUIRE(checked >= 200);
  REQUIRE(decision_checked >= checked / 2);
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  INFO("equivalence sweep took " << elapsed << "s");
  REQUIRE(elapsed < 30.0);
}

TEST_CASE("two identical points with opposite labels hit the box corner") {
  // Q = [[1,-1],[-1,1]] is singular; the equality constraint forces
  // alpha_1 = alpha_2 and the linear term pushes both to C, objective -2C.
  for (double C : {0.1, 1.0, 10.0}) {
    std::vector<dgd::DifferenceVector> f = {
        feat({0.5, -0.25}, dgd::PairLabel::doppelganger),
        feat({0.5, -0.25}, dgd::PairLabel::mated),
    };
    dgd::SvmConfig cfg;
    cfg.C = C;
    cfg.gamma = 1.0;
    cfg.tolerance = 1e-10;
    auto m = dgd::train(f, cfg);
    REQUIRE(m.coef.size() == 2);
    CHECK(m.coef[0] == C);
    CHECK(m.coef[1] == -C);
    CHECK(dgd::model_dual_objective(m) == Catch::Approx(-2.0 * C).margin(1e-9));
    CHECK(m.bias == 0.0);
    CHECK(dgd::decision_value(m, f[0]) == 0.0);
  }
}

TEST_CASE("training rejects degenerate inputs with numeric errors") {
  auto two_ok = [] {
    return std::vector<dgd::DifferenceVector>{
        feat({1.0, 0.0}, dgd::PairLabel::doppelganger),
        feat({-1.0, 0.0}, dgd::PairLabel::mated),
    };
  };

  SECTION("single class") {
    std::vector<dgd::DifferenceVector> f = {
        feat({1.0}, dgd::PairLabel::mated), feat({2.0}, dgd::PairLabel::mated)};
    try {
      dgd::train(f, {});
      FAIL("expected an error");
    } catch (const dgd::Error& e) {
      CHECK(e.exit_code() == 3);
      CHECK_THAT(e.what(), ContainsSubstring("both mated and doppelganger"));
    }
  }

  SECTION("too few features") {
    std::vector<dgd::DifferenceVector> f = {feat({1.0}, dgd::PairLabel::mated)};
    REQUIRE_THROWS_AS(dgd::train(f, {}), dgd::Error);
  }

  SECTION("inconsistent dimensions") {
    auto f = two_ok();
    f.push_back(feat({1.0, 2.0, 3.0}, dgd::PairLabel::mated));
    REQUIRE_THROWS_WITH(dgd::train(f, {}), ContainsSubstring("inconsistent"));
  }

  SECTION("non-finite values") {
    auto f = two_ok();
    f[0].values[1] = std::nan("");
    REQUIRE_THROWS_WITH(dgd::train(f, {}), ContainsSubstring("non-finite"));
  }

  SECTION("unlabeled feature") {
    auto f = two_ok();
    f[1].label.reset();
    REQUIRE_THROWS_WITH(dgd::train(f, {}), ContainsSubstring("unlabeled"));
  }

  SECTION("bad config") {
    dgd::SvmConfig cfg;
    cfg.C = 0.0;
    REQUIRE_THROWS_AS(dgd::train(two_ok(), cfg), dgd::Error);
    cfg = {};
    cfg.tolerance = -1.0;
    REQUIRE_THROWS_AS(dgd::train(two_ok(), cfg), dgd::Error);
  }

  SECTION("iteration budget exhaustion") {
    dgd::SvmConfig cfg;
    cfg.max_passes = 1;
    try {
      dgd::train(two_ok(), cfg);
      FAIL("expected an error");
    } catch (const dgd::Error& e) {
      CHECK(e.exit_code() == 3);
      CHECK_THAT(e.what(), ContainsSubstring("did not converge"));
    }
  }
}

TEST_CASE("gamma resolves to the reciprocal feature dimension by default") {
  dgd::Rng rng(7);
  auto f = random_training_set(rng, 12, 4, 1.0);
  dgd::SvmModel auto_model = dgd::train(f, {});
  CHECK(auto_model.gamma == 0.25);

  dgd::SvmConfig cfg;
  cfg.gamma = 2.5;
  CHECK(dgd::train(f, cfg).gamma == 2.5);
}

TEST_CASE("training is deterministic") {
  dgd::Rng rng(99);
  auto f = random_training_set(rng, 24, 3, 1.2);
  auto run = [&] {
    std::ostringstream ss;
    dgd::save_model(ss, dgd::train(f, {}), {});
    return ss.str();
  };
  REQUIRE(run() == run());
}

TEST_CASE("a starved kernel cache changes nothing") {
  dgd::Rng rng(123);
  auto f = random_training_set(rng, 26, 3, 1.5);
  dgd::SvmConfig big;
  big.cache_bytes = 64 << 20;
  dgd::SvmConfig tiny = big;
  tiny.cache_bytes = 1;  // floor of two resident rows
  auto mb = dgd::train(f, big);
  auto mt = dgd::train(f, tiny);
  REQUIRE(mb.coef == mt.coef);
  REQUIRE(mb.support_vectors == mt.support_vectors);
  REQUIRE(mb.bias == mt.bias);
}

TEST_CASE("models round-trip through their file format bitwise") {
  testutil::TempDir dir;
  dgd::Rng rng(2024);
  auto f = random_training_set(rng, 20, 3, 1.5);
  dgd::SvmModel m = dgd::train(f, {});
  m.feature_config.mode = dgd::DiffMode::absolute_diff;
  m.feature_config.symmetrize = false;
  dgd::calibrate(m, f);

  auto path = dir.file("m.svm");
  dgd::save_model(path, m, {"header comment", "second line"});
  dgd::SvmModel back = dgd::load_model(path);

  CHECK(back.dim == m.dim);
  CHECK(back.gamma == m.gamma);
  CHECK(back.bias == m.bias);
  CHECK(back.A == m.A);
  CHECK(back.B == m.B);
  CHECK(back.feature_config.encode() == m.feature_config.encode());
  REQUIRE(back.coef == m.coef);
  REQUIRE(back.support_vectors == m.support_vectors);

  for (int i = 0; i < 100; ++i) {
    auto probe = testutil::random_vector(rng, 3, 2.0);
    REQUIRE(dgd::decision_value(back, probe) == dgd::decision_value(m, probe));
    REQUIRE(dgd::detection_score(back, probe) == dgd::detection_score(m, probe));
  }

  SECTION("saving the loaded model reproduces the same bytes") {
    std::ostringstream a, b;
    dgd::save_model(a, m);
    dgd::save_model(b, back);
    REQUIRE(a.str() == b.str());
  }
}

TEST_CASE("model files are validated on load") {
  testutil::TempDir dir;
  auto path = dir.file("m.svm");

  SECTION("wrong magic") {
    testutil::write_file(path, "xgb-v7 dim=1\n");
    REQUIRE_THROWS_WITH(dgd::load_model(path), ContainsSubstring("unsupported model format"));
  }

  SECTION("header field count") {
    testutil::write_file(path, "svm-v1 dim=1 nsv=0\n");
    REQUIRE_THROWS_WITH(dgd::load_model(path), ContainsSubstring("malformed"));
  }

  SECTION("truncated support vectors") {
    testutil::write_file(
        path, "svm-v1 dim=2 nsv=2 gamma=0.5 bias=0 A=-1 B=0 feat=signed,norm,sym\n1 0.5 0.5\n");
    REQUIRE_THROWS_WITH(dgd::load_model(path), ContainsSubstring("truncated"));
  }

  SECTION("wrong value count in a support vector") {
    testutil::write_file(
        path, "svm-v1 dim=2 nsv=1 gamma=0.5 bias=0 A=-1 B=0 feat=signed,norm,sym\n1 0.5\n");
    REQUIRE_THROWS_WITH(dgd::load_model(path), ContainsSubstring("wrong value count"));
  }

  SECTION("trailing content") {
    testutil::write_file(
        path,
        "svm-v1 dim=1 nsv=1 gamma=0.5 bias=0 A=-1 B=0 feat=signed,norm,sym\n1 0.5\n0.3 0.3\n");
    REQUIRE_THROWS_WITH(dgd::load_model(path), ContainsSubstring("trailing"));
  }

  SECTION("bad feature config token") {
    testutil::write_file(path, "svm-v1 dim=1 nsv=0 gamma=0.5 bias=0 A=-1 B=0 feat=magic\n");
    REQUIRE_THROWS_AS(dgd::load_model(path), dgd::Error);
  }
}

TEST_CASE("decision values reject mismatched probes") {
  dgd::Rng rng(5);
  auto f = random_training_set(rng, 8, 3, 1.0);
  auto m = dgd::train(f, {});
  REQUIRE_THROWS_WITH(dgd::decision_value(m, std::vector<double>{1.0}),
                      ContainsSubstring("dimension"));
}

TEST_CASE("calibration fits a negative slope on separable data") {
  // Well-separated classes along the first coordinate.
  dgd::Rng rng(31);
  std::vector<dgd::DifferenceVector> f;
  for (int i = 0; i < 30; ++i) {
    auto v = testutil::random_vector(rng, 2, 0.3);
    bool dg = i % 2 == 0;
    v[0] += dg ? 2.0 : -2.0;
    f.push_back(feat(std::move(v), dg ? dgd::PairLabel::doppelganger : dgd::PairLabel::mated));
  }
  dgd::SvmConfig cfg;
  cfg.gamma = 0.5;
  auto m = dgd::train(f, cfg);
  std::string warning;
  dgd::calibrate(m, f, &warning);
  CHECK(warning.empty());
  CHECK(m.A < 0.0);

  SECTION("scores order with the decision value and stay inside (0,1)") {
    std::vector<std::pair<double, double>> fs;  // (decision value, score)
    for (double x = -2.0; x <= 2.0; x += 0.25) {
      std::vector<double> p = {x, 0.0};
      double s = dgd::detection_score(m, p);
      CHECK(s > 0.0);
      CHECK(s < 1.0);
      fs.emplace_back(dgd::decision_value(m, p), s);
    }
    std::sort(fs.begin(), fs.end());
    for (std::size_t i = 1; i < fs.size(); ++i) CHECK(fs[i].second >= fs[i - 1].second);
    CHECK(dgd::detection_score(m, {2.0, 0.0}) > 0.5);
    CHECK(dgd::detection_score(m, {-2.0, 0.0}) < 0.5);
  }

  SECTION("extreme decision values saturate without overflow") {
    m.A = -500.0;
    m.B = 0.0;
    double hi = dgd::detection_score(m, {2.5, 0.0});
    double lo = dgd::detection_score(m, {-2.5, 0.0});
    CHECK(hi == Catch::Approx(1.0).margin(1e-12));
    CHECK(lo == Catch::Approx(0.0).margin(1e-12));
    CHECK(std::isfinite(hi));
    CHECK(std::isfinite(lo));
  }
}

TEST_CASE("anti-correlated calibration data falls back to the fixed map") {
  dgd::Rng rng(37);
  std::vector<dgd::DifferenceVector> f;
  for (int i = 0; i < 20; ++i) {
    auto v = testutil::random_vector(rng, 2, 0.3);
    bool dg = i % 2 == 0;
    v[0] += dg ? 2.0 : -2.0;
    f.push_back(feat(std::move(v), dg ? dgd::PairLabel::doppelganger : dgd::PairLabel::mated));
  }
  dgd::SvmConfig cfg;
  cfg.gamma = 0.5;
  auto m = dgd::train(f, cfg);

  // Swap every label so the held-out set contradicts the decision values.
  for (auto& d : f)
    d.label = d.label == dgd::PairLabel::doppelganger ? dgd::PairLabel::mated
                                                      : dgd::PairLabel::doppelganger;
  std::string warning;
  dgd::calibrate(m, f, &warning);
  CHECK_THAT(warning, ContainsSubstring("fallback"));
  CHECK(m.A == -1.0);
  CHECK(m.B == 0.0);
}

TEST_CASE("calibration requires both classes and labels") {
  dgd::Rng rng(41);
  auto f = random_training_set(rng, 10, 2, 1.0);
  auto m = dgd::train(f, {});

  std::vector<dgd::DifferenceVector> mated_only;
  for (const auto& d : f)
    if (d.label == dgd::PairLabel::mated) mated_only.push_back(d);
  REQUIRE_THROWS_AS(dgd::calibrate(m, mated_only), dgd::Error);

  auto unlabeled = f;
  unlabeled[0].label.reset();
  REQUIRE_THROWS_AS(dgd::calibrate(m, unlabeled), dgd::Error);
}

TEST_CASE("the calibration split is stratified, seeded, and order-stable") {
  std::vector<dgd::DifferenceVector> all;
  for (int i = 0; i < 40; ++i)
    all.push_back(feat({static_cast<double>(i)},
                       i < 25 ? dgd::PairLabel::mated : dgd::PairLabel::doppelganger));

  auto split = dgd::calibration_split(all, 0.2, 7);
  std::size_t n_mated = 0, n_dg = 0;
  for (const auto& d : split)
    (d.label == dgd::PairLabel::doppelganger ? n_dg : n_mated) += 1;
  CHECK(n_mated == 5);  // ceil(0.2 * 25)
  CHECK(n_dg == 3);     // ceil(0.2 * 15)

  SECTION("subset of the input, in input order") {
    double prev = -1.0;
    for (const auto& d : split) {
      CHECK(d.values[0] > prev);  // strictly increasing index order
      prev = d.values[0];
    }
  }

  SECTION("same seed same split, database-sized fraction floor of one") {
    auto again = dgd::calibration_split(all, 0.2, 7);
    REQUIRE(again.size() == split.size());
    for (std::size_t i = 0; i < split.size(); ++i)
      CHECK(again[i].values[0] == split[i].values[0]);

    auto tiny = dgd::calibration_split(all, 1e-9, 7);
    CHECK(tiny.size() == 2);  // one per class at minimum
  }

  SECTION("different seeds usually differ") {
    auto other = dgd::calibration_split(all, 0.2, 8);
    bool same = other.size() == split.size();
    if (same)
      for (std::size_t i = 0; i < split.size(); ++i)
        same = same && other[i].values[0] == split[i].values[0];
    CHECK_FALSE(same);
  }
}
