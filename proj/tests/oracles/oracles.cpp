#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

pnsr::Tensor conv2d(const pnsr::Tensor& x, const pnsr::Tensor& w, const pnsr::Tensor& b) {
  const int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  const int O = w.dim(0), k = w.dim(2), pad = k / 2;
  pnsr::Tensor y({O, H, W});
  for (int o = 0; o < O; ++o) {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W; ++j) {
        double acc = b[static_cast<std::size_t>(o)];
        for (int c = 0; c < C; ++c) {
          for (int di = 0; di < k; ++di) {
            for (int dj = 0; dj < k; ++dj) {
              const int yi = i + di - pad, xj = j + dj - pad;
              if (yi < 0 || yi >= H || xj < 0 || xj >= W) continue;
              const std::size_t wi = ((static_cast<std::size_t>(o) * C + c) * k + di) * k + dj;
              acc += w[wi] * x.at(c, yi, xj);
            }
          }
        }
        y.at(o, i, j) = acc;
      }
    }
  }
  return y;
}

pnsr::Tensor pixel_shuffle(const pnsr::Tensor& x, int r) {
  const int C = x.dim(0) / (r * r), H = x.dim(1), W = x.dim(2);
  pnsr::Tensor y({C, H * r, W * r});
  for (int c = 0; c < C; ++c)
    for (int yy = 0; yy < H * r; ++yy)
      for (int xx = 0; xx < W * r; ++xx) y.at(c, yy, xx) = x.at(c * r * r + (yy % r) * r + (xx % r), yy / r, xx / r);
  return y;
}

std::vector<std::size_t> nearest_valid(std::span<const std::uint8_t> valid, int w, int h) {
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::size_t> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    const long long pu = static_cast<long long>(p % w), pv = static_cast<long long>(p / w);
    long long best = std::numeric_limits<long long>::max();
    std::size_t arg = n;
    for (std::size_t q = 0; q < n; ++q) {
      if (!valid[q]) continue;
      const long long du = static_cast<long long>(q % w) - pu, dv = static_cast<long long>(q / w) - pv;
      const long long d2 = du * du + dv * dv;
      if (d2 < best) {
        best = d2;
        arg = q;
      }
    }
    out[p] = arg;
  }
  return out;
}

std::vector<std::uint8_t> window_and(std::span<const std::uint8_t> valid, int w, int h, int r) {
  const int lw = w / r, lh = h / r;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(lw) * static_cast<std::size_t>(lh));
  for (int y = 0; y < lh; ++y) {
    for (int x = 0; x < lw; ++x) {
      bool all = true;
      for (int dy = 0; dy < r; ++dy)
        for (int dx = 0; dx < r; ++dx) all = all && valid[static_cast<std::size_t>(y * r + dy) * w + (x * r + dx)];
      out[static_cast<std::size_t>(y) * lw + x] = all ? 1 : 0;
    }
  }
  return out;
}

namespace {

double kernel(double t, double a) {
  t = std::abs(t);
  if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
  if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
  return 0.0;
}

// Weights (normalized) and clamped source indices along one axis.
std::vector<std::pair<int, double>> axis_weights(int in, int out, int dst, double a) {
  const double scale = static_cast<double>(out) / in;
  const double support = scale < 1.0 ? 2.0 / scale : 2.0;
  const double stretch = scale < 1.0 ? scale : 1.0;
  const double center = (dst + 0.5) / scale - 0.5;
  std::vector<std::pair<int, double>> taps;
  double total = 0.0;
  for (int i = static_cast<int>(std::floor(center - support)); i <= static_cast<int>(std::ceil(center + support)); ++i) {
    const double wgt = kernel((i - center) * stretch, a);
    if (wgt == 0.0) continue;
    taps.emplace_back(std::clamp(i, 0, in - 1), wgt);
    total += wgt;
  }
  for (auto& t : taps) t.second /= total;
  return taps;
}

}  // namespace

double bicubic_sample(const pnsr::Image& img, int c, int out_w, int out_h, int x, int y, double a) {
  const auto wx = axis_weights(img.width, out_w, x, a);
  const auto wy = axis_weights(img.height, out_h, y, a);
  double acc = 0.0;
  for (const auto& [iy, gy] : wy)
    for (const auto& [ix, gx] : wx) acc += gy * gx * img.at(c, ix, iy);
  return acc;
}

double plane_depth(double depth, double sx, double sy, const pnsr::Intrinsics& intr, double u, double v) {
  // Solve z = depth + sx * X + sy * Y with X = z (u - cx) / fx, Y = z (v - cy) / fy.
  const double ray_x = (u - intr.cx) / intr.fx;
  const double ray_y = (v - intr.cy) / intr.fy;
  return depth / (1.0 - sx * ray_x - sy * ray_y);
}

double sphere_depth(double cx, double cy, double cz, double radius, const pnsr::Intrinsics& intr,
                    double u, double v) {
  const double dx = (u - intr.cx) / intr.fx, dy = (v - intr.cy) / intr.fy;
  // |t d - C|^2 = R^2 with d = (dx, dy, 1), quadratic in t.
  const double A = dx * dx + dy * dy + 1.0;
  const double B = -2.0 * (dx * cx + dy * cy + cz);
  const double Cc = cx * cx + cy * cy + cz * cz - radius * radius;
  const double disc = B * B - 4.0 * A * Cc;
  if (disc < 0.0) return 0.0;
  const double t = (-B - std::sqrt(disc)) / (2.0 * A);
  return t > 0.0 ? t : 0.0;
}

std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace oracle
