#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bginv/signals.hpp"

namespace bginv {

struct RbfConfig {
  std::size_t r = 32;
  double radius = 32.0;
  double sigma = 10.0;
  std::size_t k = 32;

  void validate() const {
    if (r < 2) throw Error("grid size r must be >= 2");
    if (!(radius > 0.0)) throw Error("radius must be > 0");
    if (!(sigma > 0.0)) throw Error("sigma must be > 0");
    if (k < 1) throw Error("K must be >= 1");
  }
};

struct VarianceMatrix {
  std::string model_id;
  std::string position;
  std::size_t r = 0;
  double d_max = 0.0;
  std::vector<double> values;  // row-major; row index follows the first coordinate

  double at(std::size_t i, std::size_t j) const { return values[i * r + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * r + j]; }
};

/// Grid element index for a semantic distance.
inline std::size_t grid_index(double d, double d_max, std::size_t r) {
  const double g = std::round(d / d_max * static_cast<double>(r - 1));
  return static_cast<std::size_t>(std::clamp(g, 0.0, static_cast<double>(r - 1)));
}

struct GridPoint {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;
};

/// Point positions in continuous grid coordinates: d / d_max * (r - 1).
inline std::vector<GridPoint> to_grid(const PointCloud& cloud, std::size_t r) {
  if (cloud.points.empty()) throw Error("empty point cloud");
  if (!(cloud.d_max > 0.0)) throw Error("point cloud d_max must be > 0");
  const double scale = static_cast<double>(r - 1) / cloud.d_max;
  std::vector<GridPoint> out;
  out.reserve(cloud.points.size());
  for (const auto& p : cloud.points) out.push_back({p.da * scale, p.db * scale, p.v});
  return out;
}

inline double gaussian(double dist2, double sigma) { return std::exp(-dist2 / (2.0 * sigma * sigma)); }

inline double sq_dist(double ex, double ey, const GridPoint& p) {
  const double dx = ex - p.x;
  const double dy = ey - p.y;
  return dx * dx + dy * dy;
}

namespace detail {

/// Mean of the values at the given indices, summed in ascending index order
/// as offsets from the first value so that equal values average exactly.
inline double indexed_mean(std::vector<std::size_t> idx, const std::vector<GridPoint>& pts) {
  std::sort(idx.begin(), idx.end());
  const double ref = pts[idx.front()].v;
  double s = 0.0;
  for (std::size_t i : idx) s += pts[i].v - ref;
  return ref + s / static_cast<double>(idx.size());
}

/// (u + sum w v) / (1 + sum w), written as u + sum w (v - u) / (1 + sum w);
/// phi(0) = 1 weighs the fallback point at the element centre.
inline double blend(double fallback, const std::vector<std::size_t>& inside, const std::vector<double>& weights,
                    const std::vector<GridPoint>& pts) {
  double num = 0.0;
  double den = 1.0;
  for (std::size_t n = 0; n < inside.size(); ++n) {
    num += weights[n] * (pts[inside[n]].v - fallback);
    den += weights[n];
  }
  return fallback + num / den;
}

}  // namespace detail

/// Fallback value u(e): mean of the K nearest points (ties at equal distance
/// resolved toward lower point index). Exhaustive scan.
inline double knn_value_bruteforce(const std::vector<GridPoint>& pts, double ex, double ey, std::size_t k) {
  if (pts.empty()) throw Error("empty point cloud");
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d.push_back({sq_dist(ex, ey, pts[i]), i});
  const std::size_t take = std::min(k, d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
  std::vector<std::size_t> idx;
  for (std::size_t n = 0; n < take; ++n) idx.push_back(d[n].second);
  return detail::indexed_mean(std::move(idx), pts);
}

/// Uniform bucket grid over [0, r)^2 with unit cells; out-of-range points are
/// clamped into edge cells, which only makes distance lower bounds looser.
class PointGrid {
 public:
  PointGrid(const std::vector<GridPoint>& pts, std::size_t r) : pts_(pts), n_(r), cells_(r * r) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[cell_of(pts[i].x) * n_ + cell_of(pts[i].y)].push_back(i);
  }

  std::size_t cell_of(double c) const {
    const double f = std::floor(c);
    if (f < 0.0) return 0;
    if (f >= static_cast<double>(n_ - 1)) return n_ - 1;
    return static_cast<std::size_t>(f);
  }

  /// Indices of points with squared distance <= radius^2, ascending.
  std::vector<std::size_t> within(double ex, double ey, double radius) const {
    const double r2 = radius * radius;
    std::vector<std::size_t> out;
    const std::size_t i0 = cell_of(ex - radius), i1 = cell_of(ex + radius);
    const std::size_t j0 = cell_of(ey - radius), j1 = cell_of(ey + radius);
    for (std::size_t i = i0; i <= i1; ++i)
      for (std::size_t j = j0; j <= j1; ++j)
        for (std::size_t p : cells_[i * n_ + j])
          if (sq_dist(ex, ey, pts_[p]) <= r2) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Ring search outward from the element's cell; stops once the K-th best
  /// distance is strictly inside the bound for all unvisited rings.
  double knn_value(double ex, double ey, std::size_t k) const {
    const std::size_t want = std::min(k, pts_.size());
    const auto ci = static_cast<long>(cell_of(ex));
    const auto cj = static_cast<long>(cell_of(ey));
    const auto n = static_cast<long>(n_);
    std::vector<std::pair<double, std::size_t>> found;
    for (long ring = 0;; ++ring) {
      for (long i = ci - ring; i <= ci + ring; ++i) {
        for (long j = cj - ring; j <= cj + ring; ++j) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != ring) continue;
          if (i < 0 || j < 0 || i >= n || j >= n) continue;
          for (std::size_t p : cells_[static_cast<std::size_t>(i * n + j)]) found.push_back({sq_dist(ex, ey, pts_[p]), p});
        }
      }
      const bool exhausted = ci - ring <= 0 && cj - ring <= 0 && ci + ring >= n - 1 && cj + ring >= n - 1;
      if (exhausted) break;
      if (found.size() >= want) {
        const double lo_x = static_cast<double>(ci - ring), hi_x = static_cast<double>(ci + ring + 1);
        const double lo_y = static_cast<double>(cj - ring), hi_y = static_cast<double>(cj + ring + 1);
        const double bound = std::min({ex - lo_x, hi_x - ex, ey - lo_y, hi_y - ey});
        std::nth_element(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(want - 1), found.end());
        if (found[want - 1].first < bound * bound) break;
      }
    }
    std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(want), found.end());
    std::vector<std::size_t> idx;
    for (std::size_t m = 0; m < want; ++m) idx.push_back(found[m].second);
    return detail::indexed_mean(std::move(idx), pts_);
  }

 private:
  const std::vector<GridPoint>& pts_;
  std::size_t n_;
  std::vector<std::vector<std::size_t>> cells_;
};

inline double knn_value(const PointCloud& cloud, std::size_t r, std::size_t i, std::size_t j, std::size_t k) {
  const auto pts = to_grid(cloud, r);
  return PointGrid(pts, r).knn_value(static_cast<double>(i), static_cast<double>(j), k);
}

/// Gaussian RBF resampling with a KNN fallback point at every element:
///   value(e) = (u(e) + sum phi(|e-p|) v) / (1 + sum phi(|e-p|)), |e-p| <= radius.
inline VarianceMatrix interpolate(const PointCloud& cloud, const RbfConfig& cfg) {
  cfg.validate();
  const auto pts = to_grid(cloud, cfg.r);
  const PointGrid grid(pts, cfg.r);
  VarianceMatrix m{cloud.model_id, cloud.position, cfg.r, cloud.d_max, std::vector<double>(cfg.r * cfg.r)};
  std::vector<double> w;
  for (std::size_t i = 0; i < cfg.r; ++i) {
    for (std::size_t j = 0; j < cfg.r; ++j) {
      const auto ex = static_cast<double>(i), ey = static_cast<double>(j);
      const auto inside = grid.within(ex, ey, cfg.radius);
      w.clear();
      for (std::size_t p : inside) w.push_back(gaussian(sq_dist(ex, ey, pts[p]), cfg.sigma));
      m.at(i, j) = detail::blend(grid.knn_value(ex, ey, cfg.k), inside, w, pts);
    }
  }
  return m;
}

/// Direct O(r^2 N) evaluation without a spatial index. With
/// `with_fallback == false` it evaluates the plain ratio of kernel sums and
/// leaves elements with an empty circle as NaN.
inline VarianceMatrix interpolate_bruteforce(const PointCloud& cloud, const RbfConfig& cfg, bool with_fallback = true) {
  cfg.validate();
  const auto pts = to_grid(cloud, cfg.r);
  VarianceMatrix m{cloud.model_id, cloud.position, cfg.r, cloud.d_max, std::vector<double>(cfg.r * cfg.r)};
  const double r2 = cfg.radius * cfg.radius;
  for (std::size_t i = 0; i < cfg.r; ++i) {
    for (std::size_t j = 0; j < cfg.r; ++j) {
      const auto ex = static_cast<double>(i), ey = static_cast<double>(j);
      std::vector<std::size_t> inside;
      std::vector<double> w;
      for (std::size_t p = 0; p < pts.size(); ++p) {
        const double d2 = sq_dist(ex, ey, pts[p]);
        if (d2 <= r2) {
          inside.push_back(p);
          w.push_back(gaussian(d2, cfg.sigma));
        }
      }
      if (with_fallback) {
        m.at(i, j) = detail::blend(knn_value_bruteforce(pts, ex, ey, cfg.k), inside, w, pts);
      } else {
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < inside.size(); ++n) {
          num += w[n] * pts[inside[n]].v;
          den += w[n];
        }
        m.at(i, j) = den > 0.0 ? num / den : std::nan("");
      }
    }
  }
  return m;
}

inline json matrix_to_json(const VarianceMatrix& m) {
  return {{"model_id", m.model_id}, {"position", m.position}, {"r", m.r}, {"d_max", m.d_max}, {"values", m.values}};
}

inline VarianceMatrix matrix_from_json(const json& j) {
  VarianceMatrix m;
  m.model_id = j.at("model_id").get<std::string>();
  m.position = j.at("position").get<std::string>();
  m.r = j.at("r").get<std::size_t>();
  m.d_max = j.at("d_max").get<double>();
  m.values = j.at("values").get<std::vector<double>>();
  if (m.r < 2 || m.values.size() != m.r * m.r) throw Error("matrix value count does not match r*r");
  for (double v : m.values)
    if (!std::isfinite(v)) throw Error("matrix contains non-finite values");
  return m;
}

inline VarianceMatrix load_matrix_file(const std::string& path) {
  try {
    return matrix_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

using Rgb = std::array<std::uint8_t, 3>;

namespace colors {
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kGreen{0, 150, 60};
inline constexpr Rgb kYellow{250, 210, 20};
inline constexpr Rgb kRed{200, 20, 20};
}  // namespace colors

inline Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>(std::lround(a[c] + (b[c] - a[c]) * t));
  return out;
}

/// Diverging map on t in [-1, 1]: green <- white -> yellow -> red.
inline Rgb diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  if (t < 0.0) return lerp(colors::kWhite, colors::kGreen, -t);
  if (t <= 0.5) return lerp(colors::kWhite, colors::kYellow, 2.0 * t);
  return lerp(colors::kYellow, colors::kRed, 2.0 * t - 1.0);
}

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;  // row-major, top row first

  std::string to_ppm() const {
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + pixels.size() * 3);
    for (const auto& p : pixels) out.append(reinterpret_cast<const char*>(p.data()), 3);
    return out;
  }
};

/// Symmetric scale at +-max|value|; each element becomes a scale x scale block.
inline Image render_matrix(const VarianceMatrix& m, std::size_t scale) {
  if (scale < 1) throw Error("render scale must be >= 1");
  double maxabs = 0.0;
  for (double v : m.values) {
    if (!std::isfinite(v)) throw Error("cannot render a non-finite matrix");
    maxabs = std::max(maxabs, std::abs(v));
  }
  Image img{m.r * scale, m.r * scale, {}};
  img.pixels.resize(img.width * img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      const double v = m.at(y / scale, x / scale);
      img.pixels[y * img.width + x] = diverging_color(maxabs > 0.0 ? v / maxabs : 0.0);
    }
  return img;
}

/// Scatter view of a point cloud on a white canvas, same color scale.
inline Image render_scatter(const PointCloud& cloud, std::size_t size) {
  if (size < 2) throw Error("scatter size must be >= 2");
  Image img{size, size, std::vector<Rgb>(size * size, colors::kWhite)};
  if (cloud.points.empty() || !(cloud.d_max > 0.0)) return img;
  double maxabs = 0.0;
  for (const auto& p : cloud.points) maxabs = std::max(maxabs, std::abs(p.v));
  for (const auto& p : cloud.points) {
    const std::size_t row = grid_index(p.da, cloud.d_max, size);
    const std::size_t col = grid_index(p.db, cloud.d_max, size);
    Rgb c = diverging_color(maxabs > 0.0 ? p.v / maxabs : 0.0);
    if (c == colors::kWhite) c = {128, 128, 128};
    img.pixels[row * size + col] = c;
  }
  return img;
}

}  // namespace bginv
