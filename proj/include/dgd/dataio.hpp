#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dgd/common.hpp"

namespace dgd {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Embedding {
  std::string image_id;
  std::string subject_id;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct LandmarkSet {
  std::string image_id;
  std::vector<Point> points;
};

struct ImageBuffer {
  int width = 0;
  int height = 0;
  static constexpr int channels = 3;  // RGB
  std::vector<std::uint8_t> pixels;   // row-major, W*H*3

  static ImageBuffer create(int w, int h, std::uint8_t fill = 0) {
    ImageBuffer img;
    img.width = w;
    img.height = h;
    img.pixels.assign(static_cast<std::size_t>(w) * h * channels, fill);
    return img;
  }

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_size(const ImageBuffer& o) const {
    return width == o.width && height == o.height;
  }
};

enum class PairLabel { mated, nonmated, doppelganger };

inline const char* label_name(PairLabel l) {
  switch (l) {
    case PairLabel::mated: return "mated";
    case PairLabel::nonmated: return "nonmated";
    case PairLabel::doppelganger: return "doppelganger";
  }
  return "?";
}

inline std::optional<PairLabel> parse_label(std::string_view s) {
  if (s == "mated") return PairLabel::mated;
  if (s == "nonmated") return PairLabel::nonmated;
  if (s == "doppelganger") return PairLabel::doppelganger;
  return std::nullopt;
}

struct TrialPair {
  std::string reference_id;
  std::string probe_id;
  PairLabel label = PairLabel::mated;
};

// Id-indexed embedding collection. Immutable after ingestion.
class EmbeddingSet {
public:
  EmbeddingSet() = default;

  void add(Embedding e) {
    auto [it, inserted] = index_.emplace(e.image_id, items_.size());
    if (!inserted)
      throw Error::data("duplicate image_id '" + e.image_id + "'");
    items_.push_back(std::move(e));
  }

  const Embedding* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &items_[it->second];
  }

  const Embedding& require(const std::string& id) const {
    const Embedding* e = find(id);
    if (!e) throw Error::data("no embedding ingested for id '" + id + "'");
    return *e;
  }

  const std::vector<Embedding>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

private:
  std::vector<Embedding> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DatasetManifest {
  std::vector<std::string> embedding_files;
  std::vector<std::string> pair_files;
  int dim = 0;
  int landmark_count = 68;
};

// ---------------------------------------------------------------------------
// Line-oriented readers. '#' lines and blank lines are skipped everywhere.
// ---------------------------------------------------------------------------

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::data("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error::data("cannot open '" + path + "' for writing");
  return out;
}

[[noreturn]] inline void fail_at(const std::string& path, std::size_t line_no,
                                 const std::string& what) {
  throw Error::data(path + ":" + std::to_string(line_no) + ": " + what);
}

struct LineReader {
  std::ifstream in;
  std::string path;
  std::size_t line_no = 0;

  explicit LineReader(const std::string& p) : in(open_input(p)), path(p) {}

  // Next significant line (skips blank and '#' comment lines).
  bool next(std::string& out) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view t = trim(raw);
      if (t.empty() || t.front() == '#') continue;
      out.assign(t);
      return true;
    }
    return false;
  }
};

// Parses "key=<integer>" and validates positivity.
inline long parse_header_int(const LineReader& r, std::string_view token,
                             std::string_view key) {
  std::string prefix = std::string(key) + "=";
  if (token.substr(0, prefix.size()) != prefix)
    fail_at(r.path, r.line_no, "expected '" + prefix + "<n>' in header, found '" +
                                   std::string(token) + "'");
  long v = 0;
  if (!try_parse_long(token.substr(prefix.size()), v) || v <= 0)
    fail_at(r.path, r.line_no, "invalid " + std::string(key) + " in header");
  return v;
}

}  // namespace detail

// Format: header "emb-v1 dim=<D>", then "<image_id> <subject_id> <v1> ... <vD>".
inline std::vector<Embedding> load_embeddings(const std::string& path,
                                              std::size_t expected_dim) {
  detail::LineReader r(path);
  std::string line;
  if (!r.next(line)) detail::fail_at(path, r.line_no, "missing emb-v1 header");
  auto head = split_ws(line);
  if (head.size() != 2 || head[0] != "emb-v1")
    detail::fail_at(path, r.line_no, "expected header 'emb-v1 dim=<D>'");
  auto dim = static_cast<std::size_t>(detail::parse_header_int(r, head[1], "dim"));
  if (expected_dim != 0 && dim != expected_dim)
    detail::fail_at(path, r.line_no,
                    "header declares dim=" + std::to_string(dim) + ", expected " +
                        std::to_string(expected_dim));

  std::vector<Embedding> out;
  std::unordered_set<std::string> seen;
  while (r.next(line)) {
    auto tok = split_ws(line);
    if (tok.size() != dim + 2)
      detail::fail_at(path, r.line_no,
                      "expected " + std::to_string(dim) + " values, found " +
                          std::to_string(tok.size() < 2 ? 0 : tok.size() - 2));
    Embedding e;
    e.image_id.assign(tok[0]);
    e.subject_id.assign(tok[1]);
    e.values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double v = 0;
      if (!try_parse_double(tok[i + 2], v))
        detail::fail_at(path, r.line_no, "invalid number '" + std::string(tok[i + 2]) + "'");
      if (!std::isfinite(v))
        detail::fail_at(path, r.line_no, "non-finite value in embedding '" + e.image_id + "'");
      e.values[i] = v;
    }
    if (!seen.insert(e.image_id).second)
      detail::fail_at(path, r.line_no, "duplicate image_id '" + e.image_id + "'");
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<Embedding> load_embeddings(const std::string& path) {
  return load_embeddings(path, 0);
}

inline void write_embeddings(std::ostream& out, const std::vector<Embedding>& embeddings,
                             std::size_t dim,
                             const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "emb-v1 dim=" << dim << "\n";
  for (const auto& e : embeddings) {
    if (e.values.size() != dim)
      throw Error::data("embedding '" + e.image_id + "' has dim " +
                        std::to_string(e.values.size()) + ", expected " + std::to_string(dim));
    out << e.image_id << ' ' << e.subject_id;
    for (double v : e.values) {
      if (!std::isfinite(v))
        throw Error::data("refusing to write non-finite value for '" + e.image_id + "'");
      out << ' ' << format_double(v);
    }
    out << "\n";
  }
}

inline void write_embeddings(const std::string& path, const std::vector<Embedding>& embeddings,
                             std::size_t dim,
                             const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  write_embeddings(out, embeddings, dim, comments);
}

// Format: header "lmk-v1 n=<K>", then "<image_id> <x1> <y1> ... <xK> <yK>".
inline std::vector<LandmarkSet> load_landmarks(const std::string& path,
                                               std::size_t expected_count) {
  detail::LineReader r(path);
  std::string line;
  if (!r.next(line)) detail::fail_at(path, r.line_no, "missing lmk-v1 header");
  auto head = split_ws(line);
  if (head.size() != 2 || head[0] != "lmk-v1")
    detail::fail_at(path, r.line_no, "expected header 'lmk-v1 n=<K>'");
  auto count = static_cast<std::size_t>(detail::parse_header_int(r, head[1], "n"));
  if (expected_count != 0 && count != expected_count)
    detail::fail_at(path, r.line_no,
                    "header declares n=" + std::to_string(count) + ", expected " +
                        std::to_string(expected_count));

  std::vector<LandmarkSet> out;
  std::unordered_set<std::string> seen;
  while (r.next(line)) {
    auto tok = split_ws(line);
    if (tok.size() != 2 * count + 1)
      detail::fail_at(path, r.line_no,
                      "expected " + std::to_string(count) + " points, found " +
                          std::to_string(tok.size() < 1 ? 0 : (tok.size() - 1) / 2));
    LandmarkSet lm;
    lm.image_id.assign(tok[0]);
    lm.points.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      double x = 0, y = 0;
      if (!try_parse_double(tok[1 + 2 * i], x) || !try_parse_double(tok[2 + 2 * i], y))
        detail::fail_at(path, r.line_no, "non-numeric coordinate in '" + lm.image_id + "'");
      if (!std::isfinite(x) || !std::isfinite(y))
        detail::fail_at(path, r.line_no, "non-finite coordinate in '" + lm.image_id + "'");
      lm.points[i] = {x, y};
    }
    if (!seen.insert(lm.image_id).second)
      detail::fail_at(path, r.line_no, "duplicate image_id '" + lm.image_id + "'");
    out.push_back(std::move(lm));
  }
  return out;
}

inline std::vector<LandmarkSet> load_landmarks(const std::string& path) {
  return load_landmarks(path, 0);
}

inline void write_landmarks(std::ostream& out, const std::vector<LandmarkSet>& sets,
                            std::size_t count,
                            const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "lmk-v1 n=" << count << "\n";
  for (const auto& lm : sets) {
    if (lm.points.size() != count)
      throw Error::data("landmark set '" + lm.image_id + "' has " +
                        std::to_string(lm.points.size()) + " points, expected " +
                        std::to_string(count));
    out << lm.image_id;
    for (const auto& p : lm.points)
      out << ' ' << format_double(p.x) << ' ' << format_double(p.y);
    out << "\n";
  }
}

inline void write_landmarks(const std::string& path, const std::vector<LandmarkSet>& sets,
                            std::size_t count,
                            const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  write_landmarks(out, sets, count, comments);
}

// Format: CSV "reference_id,probe_id,label", labels lowercase, no header line.
inline std::vector<TrialPair> load_pairs(const std::string& path) {
  detail::LineReader r(path);
  std::string line;
  std::vector<TrialPair> out;
  while (r.next(line)) {
    auto fields = split_char(line, ',');
    if (fields.size() != 3)
      detail::fail_at(path, r.line_no, "expected 'reference_id,probe_id,label'");
    auto label = parse_label(trim(fields[2]));
    if (!label)
      detail::fail_at(path, r.line_no, "unknown label '" + fields[2] + "'");
    TrialPair p;
    p.reference_id = std::string(trim(fields[0]));
    p.probe_id = std::string(trim(fields[1]));
    p.label = *label;
    if (p.reference_id.empty() || p.probe_id.empty())
      detail::fail_at(path, r.line_no, "empty id");
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_pairs(std::ostream& out, const std::vector<TrialPair>& pairs,
                        const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << "\n";
  for (const auto& p : pairs) {
    if (p.reference_id.find(',') != std::string::npos ||
        p.probe_id.find(',') != std::string::npos)
      throw Error::data("pair ids must not contain commas: '" + p.reference_id + "'");
    out << p.reference_id << ',' << p.probe_id << ',' << label_name(p.label) << "\n";
  }
}

inline void write_pairs(const std::string& path, const std::vector<TrialPair>& pairs,
                        const std::vector<std::string>& comments = {}) {
  auto out = detail::open_output(path);
  write_pairs(out, pairs, comments);
}

// Every id referenced by a pair must resolve to an ingested embedding.
inline void check_referential(const std::vector<TrialPair>& pairs, const EmbeddingSet& set) {
  for (const auto& p : pairs) {
    if (!set.find(p.reference_id))
      throw Error::data("pair references unknown id '" + p.reference_id + "'");
    if (!set.find(p.probe_id))
      throw Error::data("pair references unknown id '" + p.probe_id + "'");
  }
}

// Consistency between the pair label and the embeddings' subject ids.
inline void check_label_consistency(const std::vector<TrialPair>& pairs,
                                    const EmbeddingSet& set) {
  for (const auto& p : pairs) {
    const Embedding* a = set.find(p.reference_id);
    const Embedding* b = set.find(p.probe_id);
    if (!a || !b || a->subject_id.empty() || b->subject_id.empty()) continue;
    bool same = a->subject_id == b->subject_id;
    if (p.label == PairLabel::mated && !same)
      throw Error::data("mated pair (" + p.reference_id + ", " + p.probe_id +
                        ") joins different subjects");
    if (p.label != PairLabel::mated && same)
      throw Error::data(std::string(label_name(p.label)) + " pair (" + p.reference_id +
                        ", " + p.probe_id + ") joins the same subject");
  }
}

// Manifest: simple key=value lines. Keys: dim, landmark_count, embeddings
// (repeatable), pairs (repeatable). Relative paths resolve against the
// manifest's directory.
inline DatasetManifest parse_manifest(const std::string& path) {
  detail::LineReader r(path);
  std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&](std::string_view p) {
    std::filesystem::path fp{std::string(p)};
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };
  DatasetManifest m;
  std::string line;
  while (r.next(line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos)
      detail::fail_at(path, r.line_no, "expected key=value");
    std::string_view key = trim(std::string_view(line).substr(0, eq));
    std::string_view value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) detail::fail_at(path, r.line_no, "empty value for '" + std::string(key) + "'");
    if (key == "dim") {
      long v = 0;
      if (!try_parse_long(value, v) || v <= 0) detail::fail_at(path, r.line_no, "invalid dim");
      m.dim = static_cast<int>(v);
    } else if (key == "landmark_count") {
      long v = 0;
      if (!try_parse_long(value, v) || v <= 0)
        detail::fail_at(path, r.line_no, "invalid landmark_count");
      m.landmark_count = static_cast<int>(v);
    } else if (key == "embeddings") {
      m.embedding_files.push_back(resolve(value));
    } else if (key == "pairs") {
      m.pair_files.push_back(resolve(value));
    } else {
      detail::fail_at(path, r.line_no, "unknown manifest key '" + std::string(key) + "'");
    }
  }
  return m;
}

struct Dataset {
  EmbeddingSet embeddings;
  std::vector<TrialPair> pairs;
  std::size_t dim = 0;
};

// Ingests all files named by a manifest and validates referential integrity.
inline Dataset load_dataset(const DatasetManifest& m) {
  if (m.embedding_files.empty()) throw Error::data("manifest names no embedding files");
  Dataset d;
  d.dim = static_cast<std::size_t>(m.dim);
  for (const auto& f : m.embedding_files) {
    auto embs = load_embeddings(f, d.dim);
    if (d.dim == 0 && !embs.empty()) d.dim = embs.front().dim();
    for (auto& e : embs) d.embeddings.add(std::move(e));
  }
  for (const auto& f : m.pair_files) {
    auto ps = load_pairs(f);
    d.pairs.insert(d.pairs.end(), ps.begin(), ps.end());
  }
  check_referential(d.pairs, d.embeddings);
  return d;
}

}  // namespace dgd
