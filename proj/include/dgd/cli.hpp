#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgd/common.hpp"
#include "dgd/dataio.hpp"
#include "dgd/features.hpp"
#include "dgd/metrics.hpp"
#include "dgd/morph.hpp"
#include "dgd/png_io.hpp"
#include "dgd/report.hpp"
#include "dgd/svm.hpp"
#include "dgd/synth.hpp"
#include "dgd/verify.hpp"
#include "dgd/version.hpp"

namespace dgd::cli {

struct GlobalOpts {
  std::uint64_t seed = 1;
  long dim = 512;
  long threads = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
};

// First comment line of every text output: tool version, subcommand, seed,
// and a digest of the resolved configuration. No timestamps, so reruns with
// identical inputs produce identical bytes.
inline std::string header_line(const std::string& subcommand, std::uint64_t seed,
                               const std::string& canonical_config) {
  return std::string(kToolName) + " " + kVersion + " " + subcommand +
         " seed=" + std::to_string(seed) + " config=" + hex64(fnv1a64(canonical_config));
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
  return buf;
}

inline std::string path_stem(const std::string& p) {
  return std::filesystem::path(p).stem().string();
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error::data("cannot create output directory '" + dir + "'");
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// Written files land in --out-dir unless the given path is absolute.
inline std::string resolve_out(const GlobalOpts& g, const std::string& name) {
  if (name.empty()) return name;
  std::filesystem::path p(name);
  if (p.is_absolute() || g.out_dir.empty() || g.out_dir == ".") return name;
  return (std::filesystem::path(g.out_dir) / p).string();
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
  SynthConfig cfg;
};

inline int cmd_synth(const GlobalOpts& g, const SynthOpts& o) {
  SynthConfig cfg = o.cfg;
  cfg.seed = g.seed;
  cfg.dim = static_cast<std::size_t>(g.dim);
  ensure_out_dir(g.out_dir);

  std::string canonical =
      "dim=" + std::to_string(cfg.dim) + " subjects=" + std::to_string(cfg.n_subjects) +
      " dg_pairs=" + std::to_string(cfg.n_dg_pairs) +
      " samples=" + std::to_string(cfg.samples_per_subject) +
      " angle=" + format_double(cfg.dg_angle_deg) + " noise=" + format_double(cfg.noise) +
      " nonmated=" + std::to_string(cfg.n_nonmated) + " seed=" + std::to_string(cfg.seed);
  std::vector<std::string> header{header_line("synth", cfg.seed, canonical)};

  SynthResult r = synthesize(cfg);
  write_embeddings(join_path(g.out_dir, "embeddings.emb"), r.embeddings, cfg.dim, header);
  write_pairs(join_path(g.out_dir, "train_pairs.csv"), r.train_pairs, header);
  write_pairs(join_path(g.out_dir, "eval_pairs.csv"), r.eval_pairs, header);

  std::cout << "synth: " << r.embeddings.size() << " embeddings (dim " << cfg.dim << "), "
            << r.train_pairs.size() << " training pairs, " << r.eval_pairs.size()
            << " evaluation pairs -> " << g.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// morph
// ---------------------------------------------------------------------------

struct MorphOpts {
  std::string target, target_lmk, source, source_lmk, out, emit_landmarks;
  std::string pair_list, emit_pairs;
  bool source_pairs = false;
  double warp = 0.5;
  double blend_alpha = 0.5;
  int feather = -1;  // -1 = scale default_feather to the target width
};

namespace detail_cli {

inline LandmarkSet pick_landmarks(const std::string& lmk_path, const std::string& image_path) {
  auto sets = load_landmarks(lmk_path);
  if (sets.empty()) throw Error::data("'" + lmk_path + "' contains no landmark records");
  if (sets.size() == 1) return sets.front();
  std::string want = path_stem(image_path);
  for (auto& s : sets)
    if (s.image_id == want) return s;
  throw Error::data("'" + lmk_path + "' has no record for image id '" + want + "'");
}

struct MorphJob {
  std::string target, target_lmk, source, source_lmk, out, out_lmk;
};

inline void run_morph_job(const MorphJob& job, const MorphOpts& o,
                          const std::vector<std::string>& header) {
  ImageBuffer target = read_png(job.target);
  ImageBuffer source = read_png(job.source);
  LandmarkSet tl = detail_cli::pick_landmarks(job.target_lmk, job.target);
  LandmarkSet sl = detail_cli::pick_landmarks(job.source_lmk, job.source);

  MorphParams params;
  params.warp_weight = o.warp;
  params.blend_alpha = o.blend_alpha;
  params.feather_radius = o.feather >= 0 ? o.feather : default_feather(target.width);

  std::vector<std::string> warnings;
  MorphResult r = generate_doppelganger_pair(target, tl, source, sl, params, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  write_png(job.out, r.image);
  if (!job.out_lmk.empty()) {
    r.landmarks.image_id = path_stem(job.out);
    write_landmarks(job.out_lmk, {r.landmarks}, r.landmarks.points.size(), header);
  }
}

}  // namespace detail_cli

inline int cmd_morph(const GlobalOpts& g, const MorphOpts& o) {
  std::string canonical = "warp=" + format_double(o.warp) +
                          " blend=" + format_double(o.blend_alpha) +
                          " feather=" + std::to_string(o.feather) +
                          " source_pairs=" + (o.source_pairs ? "1" : "0");
  std::vector<std::string> header{header_line("morph", g.seed, canonical)};

  std::vector<detail_cli::MorphJob> jobs;
  if (!o.pair_list.empty()) {
    detail::LineReader r(o.pair_list);
    std::string line;
    while (r.next(line)) {
      auto f = split_char(line, ',');
      if (f.size() != 5 && f.size() != 6)
        detail::fail_at(o.pair_list, r.line_no,
                        "expected target,target_lmk,source,source_lmk,out[,out_lmk]");
      detail_cli::MorphJob j;
      j.target = trim(f[0]);
      j.target_lmk = trim(f[1]);
      j.source = trim(f[2]);
      j.source_lmk = trim(f[3]);
      j.out = resolve_out(g, std::string(trim(f[4])));
      if (f.size() == 6) j.out_lmk = resolve_out(g, std::string(trim(f[5])));
      jobs.push_back(std::move(j));
    }
    if (jobs.empty()) throw Error::data("'" + o.pair_list + "' lists no morph jobs");
  } else {
    if (o.target.empty() || o.target_lmk.empty() || o.source.empty() || o.source_lmk.empty() ||
        o.out.empty())
      throw Error::usage(
          "morph needs --target/--target-lmk/--source/--source-lmk/--out or --pair-list");
    jobs.push_back({o.target, o.target_lmk, o.source, o.source_lmk, resolve_out(g, o.out),
                    resolve_out(g, o.emit_landmarks)});
  }
  ensure_out_dir(g.out_dir);

  std::vector<std::string> failures(jobs.size());
  parallel_for(jobs.size(), resolve_threads(g.threads), [&](std::size_t i) {
    try {
      detail_cli::run_morph_job(jobs[i], o, header);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::size_t failed = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    std::cerr << "error: morph row " << i + 1 << " (" << jobs[i].target << " + "
              << jobs[i].source << "): " << failures[i] << "\n";
  }

  if (!o.emit_pairs.empty()) {
    std::vector<TrialPair> pairs;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!failures[i].empty()) continue;
      pairs.push_back({path_stem(jobs[i].target), path_stem(jobs[i].out),
                       PairLabel::doppelganger});
      if (o.source_pairs)
        pairs.push_back({path_stem(jobs[i].source), path_stem(jobs[i].out),
                         PairLabel::doppelganger});
    }
    write_pairs(resolve_out(g, o.emit_pairs), pairs, header);
  }

  std::cout << "morph: " << jobs.size() - failed << "/" << jobs.size() << " morphs written\n";
  if (failed > 0) throw Error::data(std::to_string(failed) + " morph job(s) failed");
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::vector<std::string> embeddings;
  std::vector<std::string> pairs;
  std::string manifest;
  std::string model_out = "model.svm";
  FeatureConfig feat;
  std::string mode = "signed";
  SvmConfig svm;
  double cache_mb = 64.0;
};

namespace detail_cli {

inline Dataset load_inputs(const GlobalOpts& g, const std::vector<std::string>& emb_files,
                           const std::vector<std::string>& pair_files,
                           const std::string& manifest) {
  DatasetManifest m;
  if (!manifest.empty()) {
    m = parse_manifest(manifest);
  } else {
    if (emb_files.empty()) throw Error::usage("no embedding files given");
    m.embedding_files = emb_files;
    m.pair_files = pair_files;
    m.dim = static_cast<int>(g.dim);
  }
  return load_dataset(m);
}

}  // namespace detail_cli

inline int cmd_train(const GlobalOpts& g, const TrainOpts& o) {
  FeatureConfig fc = o.feat;
  if (o.mode == "signed") fc.mode = DiffMode::signed_diff;
  else if (o.mode == "absolute") fc.mode = DiffMode::absolute_diff;
  else throw Error::usage("--mode must be 'signed' or 'absolute'");

  Dataset data = detail_cli::load_inputs(g, o.embeddings, o.pairs, o.manifest);
  if (data.pairs.empty()) throw Error::usage("training needs a pair list");

  auto features = build_feature_set(data.pairs, data.embeddings, fc);
  std::size_t n_mated = 0, n_dg = 0;
  for (const auto& f : features)
    (f.label == PairLabel::doppelganger ? n_dg : n_mated) += 1;

  SvmConfig sc = o.svm;
  sc.seed = g.seed;
  sc.cache_bytes = static_cast<std::size_t>(o.cache_mb * 1024.0 * 1024.0);

  SvmModel model = train(features, sc);
  model.feature_config = fc;

  auto held_out = calibration_split(features, sc.calibration_fraction, sc.seed);
  std::string warning;
  calibrate(model, held_out, &warning);
  if (!warning.empty()) std::cerr << "warning: " << warning << "\n";

  std::string canonical =
      "C=" + format_double(sc.C) + " gamma=" + format_double(model.gamma) +
      " tol=" + format_double(sc.tolerance) + " feat=" + fc.encode() +
      " calib=" + format_double(sc.calibration_fraction) + " seed=" + std::to_string(sc.seed);
  ensure_out_dir(g.out_dir);
  const std::string model_path = resolve_out(g, o.model_out);
  save_model(model_path, model, {header_line("train", sc.seed, canonical)});

  std::cout << "train: " << features.size() << " features (" << n_mated << " mated, " << n_dg
            << " doppelganger), " << model.coef.size() << " support vectors, gamma="
            << format_double(model.gamma) << ", calibration A=" << format_double(model.A)
            << " B=" << format_double(model.B) << " -> " << model_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreOpts {
  std::vector<std::string> embeddings;
  std::vector<std::string> pairs;
  std::string manifest;
  std::string model;
  std::string out = "scores.csv";
};

inline int cmd_score(const GlobalOpts& g, const ScoreOpts& o) {
  if (o.model.empty()) throw Error::usage("score needs --model");
  SvmModel model = load_model(o.model);
  Dataset data = detail_cli::load_inputs(g, o.embeddings, o.pairs, o.manifest);
  if (data.pairs.empty()) throw Error::usage("score needs a pair list");
  if (data.dim != 0 && data.dim != model.dim)
    throw Error::data("model dimension " + std::to_string(model.dim) +
                      " does not match embeddings dimension " + std::to_string(data.dim));

  const FeatureConfig& fc = model.feature_config;
  std::vector<ScoredPair> rows(data.pairs.size());
  parallel_for(data.pairs.size(), resolve_threads(g.threads), [&](std::size_t i) {
    const TrialPair& p = data.pairs[i];
    Embedding ref = data.embeddings.require(p.reference_id);
    Embedding probe = data.embeddings.require(p.probe_id);
    if (fc.normalize) {
      ref = normalize(ref);
      probe = normalize(probe);
    }
    DifferenceVector d = difference(ref, probe, fc.mode);
    rows[i] = {p.reference_id, p.probe_id, detection_score(model, d.values)};
  });

  std::string canonical = "model=" + o.model + " feat=" + fc.encode();
  ensure_out_dir(g.out_dir);
  const std::string out_path = resolve_out(g, o.out);
  write_score_csv(out_path, rows, {header_line("score", g.seed, canonical)});
  std::cout << "score: " << rows.size() << " pairs -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
  std::string scores;      // detection scores (2/3/4-column CSV)
  std::string pairs;       // labels for 3-column score files
  std::string similarity;  // labeled similarity scores for the verification side
  std::string dataset = "dataset";
  std::string configuration = "default";
};

inline int cmd_evaluate(const GlobalOpts& g, const EvaluateOpts& o) {
  if (o.scores.empty()) throw Error::usage("evaluate needs --scores");
  ensure_out_dir(g.out_dir);

  std::vector<TrialPair> pairs;
  if (!o.pairs.empty()) pairs = load_pairs(o.pairs);
  auto labeled = load_labeled_scores(o.scores, o.pairs.empty() ? nullptr : &pairs);
  ScoreSet detection = split_by_label(labeled);
  if (detection.attack.empty())
    throw Error::data("no doppelganger-labeled detection scores in '" + o.scores + "'");
  if (detection.mated.empty())
    throw Error::data("no mated-labeled detection scores in '" + o.scores + "'");

  std::string canonical = "scores=" + o.scores + " similarity=" + o.similarity +
                          " dataset=" + o.dataset + " config=" + o.configuration;
  std::vector<std::string> header{header_line("evaluate", g.seed, canonical)};

  DetectionReport det = detection_report(detection.attack, detection.mated);
  std::vector<ReportRow> rows;
  append_detection_rows(rows, o.dataset, o.configuration, det);
  if (det.bpcer10.unreachable)
    std::cerr << "warning: APCER<=0.1 is below the resolution of " << detection.attack.size()
              << " attack scores\n";
  if (det.bpcer20.unreachable)
    std::cerr << "warning: APCER<=0.05 is below the resolution of " << detection.attack.size()
              << " attack scores\n";

  if (!o.similarity.empty()) {
    auto sim_rows = load_labeled_scores(o.similarity);
    ScoreSet sims = split_by_label(sim_rows);
    if (sims.nonmated.empty() || sims.mated.empty())
      throw Error::data("similarity scores need mated and nonmated rows");
    for (double target : fmr_targets()) {
      auto tr = threshold_at_fmr(sims.nonmated, target);
      if (tr.unreachable)
        std::cerr << "warning: FMR<=" << format_double(target) << " is below the resolution of "
                  << sims.nonmated.size() << " nonmated scores\n";
    }
    append_verification_rows(rows, o.dataset, o.configuration, sims);
    append_stats_rows(rows, o.dataset, o.configuration, sims);
  }

  write_report(join_path(g.out_dir, "report.csv"), rows, header);
  write_det_csv(join_path(g.out_dir, "det.csv"), det.curve, header);

  std::cout << "evaluate: " << o.dataset << "/" << o.configuration << " D-EER "
            << percent(det.deer.rate) << ", BPCER10 " << percent(det.bpcer10.bpcer)
            << ", BPCER20 " << percent(det.bpcer20.bpcer) << " ("
            << detection.attack.size() << " attack, " << detection.mated.size()
            << " bona fide) -> " << join_path(g.out_dir, "report.csv") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOpts {
  std::vector<std::string> embeddings;
  std::vector<std::string> pairs;
  std::string manifest;
  std::string out = "stats.csv";
  std::string dump_scores;
  bool raw = false;
};

inline int cmd_stats(const GlobalOpts& g, const StatsOpts& o) {
  Dataset data = detail_cli::load_inputs(g, o.embeddings, o.pairs, o.manifest);
  if (data.pairs.empty()) throw Error::usage("stats needs a pair list");

  ScoreSet s = score_pairs(data.pairs, data.embeddings, !o.raw);
  std::string canonical = std::string("scale=") + (o.raw ? "raw" : "display");
  std::vector<std::string> header{
      header_line("stats", g.seed, canonical),
      "cosine similarity" + std::string(o.raw ? "" : " mapped to [0,1] via (s+1)/2"),
      "sample statistics: n-1 std, adjusted Fisher-Pearson skewness, bias-corrected excess kurtosis"};

  std::vector<std::pair<std::string, DescriptiveStats>> table;
  if (!s.mated.empty()) table.emplace_back("mated", descriptive_stats(s.mated));
  if (!s.nonmated.empty()) table.emplace_back("nonmated", descriptive_stats(s.nonmated));
  if (!s.attack.empty()) table.emplace_back("doppelganger", descriptive_stats(s.attack));
  if (table.empty()) throw Error::data("no scores to summarize");
  ensure_out_dir(g.out_dir);
  const std::string out_path = resolve_out(g, o.out);
  write_stats_csv(out_path, table, header);

  if (!o.dump_scores.empty()) {
    std::vector<LabeledScore> all;
    for (const auto& p : data.pairs) {
      double v = cosine_similarity(data.embeddings.require(p.reference_id),
                                   data.embeddings.require(p.probe_id));
      if (!o.raw) v = display_similarity(v);
      all.push_back({p.label, v});
    }
    write_labeled_scores(resolve_out(g, o.dump_scores), all, header);
  }

  for (const auto& [cat, st] : table)
    std::cout << "stats: " << cat << " n=" << st.count << " mean=" << format_double(st.mean)
              << " std=" << stat_field(st.std_dev) << " skew=" << stat_field(st.skewness)
              << " exkurt=" << stat_field(st.excess_kurtosis) << "\n";
  std::cout << "stats: -> " << out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"doppelganger detection toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "seed for all randomized steps")->capture_default_str();
  app.add_option("--dim", g.dim, "embedding dimension")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "output directory")->capture_default_str();

  SynthOpts synth_o;
  auto* synth = app.add_subcommand("synth", "generate a synthetic embedding dataset");
  synth->add_option("--subjects", synth_o.cfg.n_subjects, "number of subjects")
      ->capture_default_str();
  synth->add_option("--dg-pairs", synth_o.cfg.n_dg_pairs, "number of doppelganger duos")
      ->capture_default_str();
  synth->add_option("--samples", synth_o.cfg.samples_per_subject, "samples per subject")
      ->capture_default_str();
  synth->add_option("--angle", synth_o.cfg.dg_angle_deg, "duo angular distance in degrees")
      ->capture_default_str();
  synth->add_option("--noise", synth_o.cfg.noise, "angular sample noise")->capture_default_str();
  synth->add_option("--nonmated", synth_o.cfg.n_nonmated, "evaluation nonmated pairs")
      ->capture_default_str();

  MorphOpts morph_o;
  auto* morph = app.add_subcommand("morph", "morph face images into doppelganger pairs");
  morph->add_option("--target", morph_o.target, "target image (PNG)");
  morph->add_option("--target-lmk", morph_o.target_lmk, "target landmark file");
  morph->add_option("--source", morph_o.source, "source image (PNG)");
  morph->add_option("--source-lmk", morph_o.source_lmk, "source landmark file");
  morph->add_option("--out", morph_o.out, "output morph PNG");
  morph->add_option("--emit-landmarks", morph_o.emit_landmarks, "write interpolated landmarks");
  morph->add_option("--pair-list", morph_o.pair_list,
                    "batch CSV: target,target_lmk,source,source_lmk,out[,out_lmk]");
  morph->add_option("--emit-pairs", morph_o.emit_pairs, "write a (target,morph) pair CSV");
  morph->add_flag("--source-pairs", morph_o.source_pairs,
                  "also emit (source,morph) rows in --emit-pairs");
  morph->add_option("--warp", morph_o.warp, "warp weight in [0,1]")->capture_default_str();
  morph->add_option("--blend", morph_o.blend_alpha, "blend alpha in [0,1]")->capture_default_str();
  morph->add_option("--feather", morph_o.feather, "feather radius in pixels (-1 = auto)")
      ->capture_default_str();

  TrainOpts train_o;
  auto* train = app.add_subcommand("train", "train the doppelganger detector");
  train->add_option("--embeddings", train_o.embeddings, "embedding file(s)");
  train->add_option("--pairs", train_o.pairs, "labeled pair file(s)");
  train->add_option("--manifest", train_o.manifest, "dataset manifest file");
  train->add_option("--model-out", train_o.model_out, "model output path")->capture_default_str();
  train->add_option("--mode", train_o.mode, "difference mode: signed|absolute")
      ->capture_default_str();
  auto* no_norm = train->add_flag("--no-normalize", "subtract raw instead of unit embeddings");
  auto* no_sym = train->add_flag("--no-symmetrize", "train on one ordering per pair");
  train->add_option("--C", train_o.svm.C, "soft-margin cost")->capture_default_str();
  train->add_option("--gamma", train_o.svm.gamma, "RBF width (0 = 1/dim)")->capture_default_str();
  train->add_option("--tol", train_o.svm.tolerance, "KKT stopping tolerance")
      ->capture_default_str();
  train->add_option("--max-passes", train_o.svm.max_passes, "iteration cap (0 = auto)")
      ->capture_default_str();
  train->add_option("--cache-mb", train_o.cache_mb, "kernel cache budget in MiB")
      ->capture_default_str();
  train->add_option("--calib-fraction", train_o.svm.calibration_fraction,
                    "stratified calibration split")
      ->capture_default_str();

  ScoreOpts score_o;
  auto* score = app.add_subcommand("score", "score pairs with a trained model");
  score->add_option("--model", score_o.model, "model file");
  score->add_option("--embeddings", score_o.embeddings, "embedding file(s)");
  score->add_option("--pairs", score_o.pairs, "pair file(s)");
  score->add_option("--manifest", score_o.manifest, "dataset manifest file");
  score->add_option("--out", score_o.out, "score CSV output")->capture_default_str();

  EvaluateOpts eval_o;
  auto* evaluate = app.add_subcommand("evaluate", "compute detection and verification reports");
  evaluate->add_option("--scores", eval_o.scores, "detection score CSV");
  evaluate->add_option("--pairs", eval_o.pairs, "pair list labeling a 3-column score CSV");
  evaluate->add_option("--similarity", eval_o.similarity, "labeled similarity score CSV");
  evaluate->add_option("--dataset", eval_o.dataset, "dataset name in the report")
      ->capture_default_str();
  evaluate->add_option("--configuration", eval_o.configuration, "configuration name")
      ->capture_default_str();

  StatsOpts stats_o;
  auto* stats = app.add_subcommand("stats", "similarity score statistics per category");
  stats->add_option("--embeddings", stats_o.embeddings, "embedding file(s)");
  stats->add_option("--pairs", stats_o.pairs, "pair file(s)");
  stats->add_option("--manifest", stats_o.manifest, "dataset manifest file");
  stats->add_option("--out", stats_o.out, "stats CSV output")->capture_default_str();
  stats->add_option("--dump-scores", stats_o.dump_scores, "also write label,score CSV");
  stats->add_flag("--raw", stats_o.raw, "report raw cosine instead of [0,1] display scale");

  try {
    app.parse(argc, argv);
    train_o.feat.normalize = no_norm->count() == 0;
    train_o.feat.symmetrize = no_sym->count() == 0;

    if (synth->parsed()) return cmd_synth(g, synth_o);
    if (morph->parsed()) return cmd_morph(g, morph_o);
    if (train->parsed()) return cmd_train(g, train_o);
    if (score->parsed()) return cmd_score(g, score_o);
    if (evaluate->parsed()) return cmd_evaluate(g, eval_o);
    if (stats->parsed()) return cmd_stats(g, stats_o);
    throw Error::usage("no subcommand selected");
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dgd::cli
