#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dgd/common.hpp"
#include "dgd/dataio.hpp"

namespace dgd {

struct MorphParams {
  double warp_weight = 0.5;  // 0 = target shape, 1 = source shape
  double blend_alpha = 0.5;  // 0 = target texture, 1 = source texture
  int feather_radius = 0;    // pixels of linear cross-fade inside the hull edge

  void validate() const {
    if (!(warp_weight >= 0.0 && warp_weight <= 1.0))
      throw Error::data("warp weight must lie in [0,1]");
    if (!(blend_alpha >= 0.0 && blend_alpha <= 1.0))
      throw Error::data("blend alpha must lie in [0,1]");
    if (feather_radius < 0) throw Error::data("feather radius must be non-negative");
  }
};

struct Triangle {
  int a = 0, b = 0, c = 0;  // vertex indices, counterclockwise
};

struct TriangleMesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
};

struct MorphResult {
  ImageBuffer image;
  LandmarkSet landmarks;  // interpolated landmarks of the morph
  std::string target_id;
  std::string source_id;
  MorphParams params;
};

inline double cross2(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Linear landmark interpolation. Endpoint weights and coincident points
// reproduce their input bitwise, which the identity and self-morph
// guarantees of the pipeline rely on.
inline LandmarkSet interpolate_landmarks(const LandmarkSet& target, const LandmarkSet& source,
                                         double w) {
  if (target.points.size() != source.points.size())
    throw Error::data("landmark count mismatch: " + std::to_string(target.points.size()) +
                      " vs " + std::to_string(source.points.size()));
  if (!(w >= 0.0 && w <= 1.0)) throw Error::data("warp weight must lie in [0,1]");
  LandmarkSet out;
  out.image_id = target.image_id;
  out.points.resize(target.points.size());
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    const Point& t = target.points[i];
    const Point& s = source.points[i];
    if (w == 0.0 || (t.x == s.x && t.y == s.y)) out.points[i] = t;
    else if (w == 1.0) out.points[i] = s;
    else out.points[i] = {(1.0 - w) * t.x + w * s.x, (1.0 - w) * t.y + w * s.y};
  }
  return out;
}

// Fixed warp substrate of a W x H frame: the four corners followed by the
// four edge midpoints, in pixel-center coordinates.
inline std::vector<Point> frame_anchors(int width, int height) {
  double w = width - 1, h = height - 1;
  return {{0, 0}, {w, 0}, {w, h}, {0, h},
          {w / 2.0, 0}, {w, h / 2.0}, {w / 2.0, h}, {0, h / 2.0}};
}

inline int default_feather(int width) {
  return static_cast<int>(std::lround(11.0 * width / 512.0));
}

namespace detail {

// Bowyer-Watson incremental Delaunay. Predicates run on a translated and
// uniformly scaled copy of the points (circle-preserving, so the Delaunay
// property carries over) to keep determinant magnitudes well inside exact
// double range at any image scale.
class Delaunay {
public:
  static std::vector<Triangle> build(const std::vector<Point>& pts) {
    const std::size_t n = pts.size();
    if (n < 3) throw Error::data("triangulation needs at least 3 points");

    double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
      minx = std::min(minx, p.x); maxx = std::max(maxx, p.x);
      miny = std::min(miny, p.y); maxy = std::max(maxy, p.y);
    }
    double extent = std::max({maxx - minx, maxy - miny, 1e-12});
    double s = 1.0 / extent;

    std::vector<Point> sc(n + 3);
    for (std::size_t i = 0; i < n; ++i)
      sc[i] = {(pts[i].x - minx) * s, (pts[i].y - miny) * s};
    // Scaled data sits in [0,1]^2; the enclosing triangle is three orders of
    // magnitude larger so real circumcircles never reach its vertices.
    sc[n] = {-1000.0, -999.0};
    sc[n + 1] = {1001.0, -999.0};
    sc[n + 2] = {0.5, 1001.0};

    struct Tri { int a, b, c; bool alive; };
    std::vector<Tri> tris;
    tris.push_back({static_cast<int>(n), static_cast<int>(n + 1), static_cast<int>(n + 2), true});

    std::vector<bool> inserted(n, false);
    for (std::size_t ip = 0; ip < n; ++ip) {
      bool dup = false;
      for (std::size_t q = 0; q < ip; ++q)
        if (inserted[q] && sc[q].x == sc[ip].x && sc[q].y == sc[ip].y) { dup = true; break; }
      if (dup) continue;

      const Point& p = sc[ip];
      std::vector<std::array<int, 2>> boundary;
      std::vector<std::size_t> bad;
      for (std::size_t t = 0; t < tris.size(); ++t) {
        if (!tris[t].alive) continue;
        if (in_circumcircle(sc[tris[t].a], sc[tris[t].b], sc[tris[t].c], p)) bad.push_back(t);
      }
      // Cavity boundary: edges of bad triangles not shared by two of them.
      auto add_edge = [&](int u, int v) {
        for (auto& e : boundary) {
          if (e[0] == v && e[1] == u) {
            e[0] = -1;  // interior edge, cancels out
            return;
          }
        }
        boundary.push_back({u, v});
      };
      for (std::size_t t : bad) {
        add_edge(tris[t].a, tris[t].b);
        add_edge(tris[t].b, tris[t].c);
        add_edge(tris[t].c, tris[t].a);
        tris[t].alive = false;
      }
      for (const auto& e : boundary) {
        if (e[0] < 0) continue;
        tris.push_back({e[0], e[1], static_cast<int>(ip), true});
      }
      inserted[ip] = true;
    }

    std::vector<Triangle> out;
    for (const auto& t : tris) {
      if (!t.alive) continue;
      if (t.a >= static_cast<int>(n) || t.b >= static_cast<int>(n) || t.c >= static_cast<int>(n))
        continue;  // touches the enclosing triangle
      Triangle tri{t.a, t.b, t.c};
      double o = cross2(sc[tri.a], sc[tri.b], sc[tri.c]);
      if (o == 0.0) continue;  // degenerate sliver from exactly-collinear input
      if (o < 0.0) std::swap(tri.b, tri.c);
      // Canonical rotation: smallest index first, orientation preserved.
      while (tri.a > tri.b || tri.a > tri.c) {
        int tmp = tri.a;
        tri.a = tri.b;
        tri.b = tri.c;
        tri.c = tmp;
      }
      out.push_back(tri);
    }
    if (out.empty()) throw Error::data("triangulation degenerate: all points collinear");
    std::sort(out.begin(), out.end(), [](const Triangle& x, const Triangle& y) {
      if (x.a != y.a) return x.a < y.a;
      if (x.b != y.b) return x.b < y.b;
      return x.c < y.c;
    });
    return out;
  }

private:
  // Strict in-circle test; a, b, c counterclockwise or clockwise (sign-adjusted).
  static bool in_circumcircle(const Point& a, const Point& b, const Point& c, const Point& p) {
    double ax = a.x - p.x, ay = a.y - p.y;
    double bx = b.x - p.x, by = b.y - p.y;
    double cx = c.x - p.x, cy = c.y - p.y;
    double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                 (bx * bx + by * by) * (ax * cy - cx * ay) +
                 (cx * cx + cy * cy) * (ax * by - bx * ay);
    double orient = cross2(a, b, c);
    return orient > 0.0 ? det > 0.0 : det < 0.0;
  }
};

inline double clampd(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

inline double bilinear(const ImageBuffer& img, double sx, double sy, int ch) {
  sx = clampd(sx, 0.0, img.width - 1.0);
  sy = clampd(sy, 0.0, img.height - 1.0);
  int x0 = static_cast<int>(sx);
  int y0 = static_cast<int>(sy);
  int x1 = std::min(x0 + 1, img.width - 1);
  int y1 = std::min(y0 + 1, img.height - 1);
  double fx = sx - x0, fy = sy - y0;
  double top = (1.0 - fx) * img.at(x0, y0, ch) + fx * img.at(x1, y0, ch);
  double bot = (1.0 - fx) * img.at(x0, y1, ch) + fx * img.at(x1, y1, ch);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace dgd::detail

// Delaunay triangulation of a point set (landmarks plus any frame anchors the
// caller appended). Exactly duplicated points are merged onto their first
// occurrence; exactly collinear inputs are rejected.
inline TriangleMesh triangulate(const std::vector<Point>& points) {
  for (const auto& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw Error::data("non-finite triangulation point");
  TriangleMesh mesh;
  mesh.vertices = points;
  mesh.triangles = detail::Delaunay::build(points);
  return mesh;
}

// Inverse-mapped piecewise-affine warp. Triangles rasterize in mesh order
// over destination ("to") coordinates; the first triangle to claim a pixel
// keeps it. Samples are bilinear with clamped source coordinates; pixels
// outside every triangle copy the input.
inline ImageBuffer warp_image(const ImageBuffer& img, const std::vector<Point>& from,
                              const std::vector<Point>& to, const TriangleMesh& mesh,
                              std::vector<std::string>* warnings = nullptr) {
  if (from.size() != to.size())
    throw Error::data("warp point sets differ in size");
  for (const auto& t : mesh.triangles) {
    auto valid = [&](int i) { return i >= 0 && static_cast<std::size_t>(i) < from.size(); };
    if (!valid(t.a) || !valid(t.b) || !valid(t.c))
      throw Error::data("mesh index outside the warp point sets");
  }
  bool identity = true;
  for (std::size_t i = 0; i < from.size() && identity; ++i)
    identity = from[i].x == to[i].x && from[i].y == to[i].y;
  if (identity) return img;

  ImageBuffer out = ImageBuffer::create(img.width, img.height);
  std::vector<std::uint8_t> claimed(static_cast<std::size_t>(img.width) * img.height, 0);

  for (const auto& tri : mesh.triangles) {
    const Point& d0 = to[tri.a];
    const Point& d1 = to[tri.b];
    const Point& d2 = to[tri.c];
    double area = cross2(d0, d1, d2);
    if (area == 0.0) {
      if (warnings)
        warnings->push_back("skipping degenerate destination triangle (" +
                            std::to_string(tri.a) + "," + std::to_string(tri.b) + "," +
                            std::to_string(tri.c) + ")");
      continue;
    }
    const Point& s0 = from[tri.a];
    const Point& s1 = from[tri.b];
    const Point& s2 = from[tri.c];

    int x_lo = std::max(0, static_cast<int>(std::floor(std::min({d0.x, d1.x, d2.x}))));
    int x_hi = std::min(img.width - 1, static_cast<int>(std::ceil(std::max({d0.x, d1.x, d2.x}))));
    int y_lo = std::max(0, static_cast<int>(std::floor(std::min({d0.y, d1.y, d2.y}))));
    int y_hi = std::min(img.height - 1, static_cast<int>(std::ceil(std::max({d0.y, d1.y, d2.y}))));

    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        std::size_t pix = static_cast<std::size_t>(y) * img.width + x;
        if (claimed[pix]) continue;
        Point p{static_cast<double>(x), static_cast<double>(y)};
        double w0 = cross2(d1, d2, p);
        double w1 = cross2(d2, d0, p);
        double w2 = cross2(d0, d1, p);
        bool inside = area > 0.0 ? (w0 >= 0.0 && w1 >= 0.0 && w2 >= 0.0)
                                 : (w0 <= 0.0 && w1 <= 0.0 && w2 <= 0.0);
        if (!inside) continue;
        claimed[pix] = 1;
        double b0 = w0 / area, b1 = w1 / area, b2 = w2 / area;
        double sx = b0 * s0.x + b1 * s1.x + b2 * s2.x;
        double sy = b0 * s0.y + b1 * s1.y + b2 * s2.y;
        for (int c = 0; c < ImageBuffer::channels; ++c) {
          double v = detail::bilinear(img, sx, sy, c);
          out.at(x, y, c) = static_cast<std::uint8_t>(detail::clampd(std::lround(v), 0.0, 255.0));
        }
      }
    }
  }

  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      std::size_t pix = static_cast<std::size_t>(y) * img.width + x;
      if (claimed[pix]) continue;
      for (int c = 0; c < ImageBuffer::channels; ++c) out.at(x, y, c) = img.at(x, y, c);
    }
  return out;
}

inline ImageBuffer blend(const ImageBuffer& a, const ImageBuffer& b, double alpha) {
  if (!a.same_size(b)) throw Error::data("blend inputs differ in size");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error::data("blend alpha must lie in [0,1]");
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  ImageBuffer out = ImageBuffer::create(a.width, a.height);
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    double v = (1.0 - alpha) * a.pixels[i] + alpha * b.pixels[i];
    out.pixels[i] = static_cast<std::uint8_t>(detail::clampd(std::lround(v), 0.0, 255.0));
  }
  return out;
}

namespace detail {

// Strictly convex hull, counterclockwise, by monotone chain. Collinear
// boundary points are dropped.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return {};
  std::vector<Point> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h.size() >= 3 ? h : std::vector<Point>{};
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double wx = p.x - a.x, wy = p.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? clampd((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
  double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace dgd::detail

// Keeps the morph only inside the convex hull of the landmarks; everything
// outside stays the untouched target. Inside, a band of `feather` pixels
// along the hull boundary cross-fades linearly from target (at the edge) to
// morph (at depth feather). Hull boundary points count as inside.
inline ImageBuffer composite_inner_region(const ImageBuffer& morph, const ImageBuffer& target,
                                          const LandmarkSet& landmarks, int feather) {
  if (!morph.same_size(target)) throw Error::data("composite inputs differ in size");
  if (feather < 0) throw Error::data("feather radius must be non-negative");
  auto hull = detail::convex_hull(landmarks.points);
  ImageBuffer out = target;
  if (hull.empty()) return out;

  double minx = hull[0].x, maxx = hull[0].x, miny = hull[0].y, maxy = hull[0].y;
  for (const auto& p : hull) {
    minx = std::min(minx, p.x); maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y); maxy = std::max(maxy, p.y);
  }
  int x_lo = std::max(0, static_cast<int>(std::floor(minx)));
  int x_hi = std::min(target.width - 1, static_cast<int>(std::ceil(maxx)));
  int y_lo = std::max(0, static_cast<int>(std::floor(miny)));
  int y_hi = std::min(target.height - 1, static_cast<int>(std::ceil(maxy)));

  const std::size_t hn = hull.size();
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      Point p{static_cast<double>(x), static_cast<double>(y)};
      bool inside = true;
      for (std::size_t i = 0; i < hn && inside; ++i)
        inside = cross2(hull[i], hull[(i + 1) % hn], p) >= 0.0;
      if (!inside) continue;
      if (feather == 0) {
        for (int c = 0; c < ImageBuffer::channels; ++c) out.at(x, y, c) = morph.at(x, y, c);
        continue;
      }
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < hn; ++i)
        d = std::min(d, detail::point_segment_distance(p, hull[i], hull[(i + 1) % hn]));
      double w = std::min(1.0, d / feather);
      for (int c = 0; c < ImageBuffer::channels; ++c) {
        double v = (1.0 - w) * target.at(x, y, c) + w * morph.at(x, y, c);
        out.at(x, y, c) = static_cast<std::uint8_t>(detail::clampd(std::lround(v), 0.0, 255.0));
      }
    }
  }
  return out;
}

// Full morph pipeline: interpolate landmarks, warp both images onto the
// interpolated shape over one shared mesh (Delaunay of the averaged
// landmarks plus frame anchors), alpha-blend, then composite the inner
// region over the untouched target.
inline MorphResult generate_doppelganger_pair(const ImageBuffer& target_img,
                                              const LandmarkSet& target_lmk,
                                              const ImageBuffer& source_img,
                                              const LandmarkSet& source_lmk,
                                              const MorphParams& params,
                                              std::vector<std::string>* warnings = nullptr) {
  params.validate();
  if (target_lmk.points.size() != source_lmk.points.size())
    throw Error::data("landmark count mismatch between target and source");
  if (!target_img.same_size(source_img))
    throw Error::data("target and source images differ in size");
  if (target_img.width < 2 || target_img.height < 2)
    throw Error::data("images must be at least 2x2");

  LandmarkSet interp = interpolate_landmarks(target_lmk, source_lmk, params.warp_weight);
  LandmarkSet avg = interpolate_landmarks(target_lmk, source_lmk, 0.5);
  std::vector<Point> anchors = frame_anchors(target_img.width, target_img.height);

  std::vector<Point> mesh_pts = avg.points;
  mesh_pts.insert(mesh_pts.end(), anchors.begin(), anchors.end());
  TriangleMesh mesh = triangulate(mesh_pts);

  std::vector<Point> from_t = target_lmk.points;
  from_t.insert(from_t.end(), anchors.begin(), anchors.end());
  std::vector<Point> from_s = source_lmk.points;
  from_s.insert(from_s.end(), anchors.begin(), anchors.end());
  std::vector<Point> to = interp.points;
  to.insert(to.end(), anchors.begin(), anchors.end());

  ImageBuffer warped_t = warp_image(target_img, from_t, to, mesh, warnings);
  ImageBuffer warped_s = warp_image(source_img, from_s, to, mesh, warnings);
  ImageBuffer blended = blend(warped_t, warped_s, params.blend_alpha);

  MorphResult r;
  r.image = composite_inner_region(blended, target_img, interp, params.feather_radius);
  r.landmarks = interp;
  r.target_id = target_lmk.image_id;
  r.source_id = source_lmk.image_id;
  r.params = params;
  return r;
}

}  // namespace dgd
