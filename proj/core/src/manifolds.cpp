#include "fgsgd/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

void require_shape(const ManifoldSpec& spec, const Matrix& m, const char* what) {
  if (m.rows() != spec.rows || m.cols() != spec.cols) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(spec.rows) + "x" +
                     std::to_string(spec.cols) + ", got " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()));
  }
}

// w * diag(d) where d is given per column.
Matrix scale_columns(const Matrix& w, const std::vector<double>& d) {
  Matrix out = w;
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) out(r, c) *= d[c];
  return out;
}

std::vector<double> column_dots(const Matrix& a, const Matrix& b) {
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += a(r, c) * b(r, c);
  return out;
}

// Geodesic step on a sphere of radius `radius` through unit-free point w (|w| = radius).
void sphere_geodesic(std::span<double> w, std::span<const double> v, double radius) {
  double vn2 = 0.0;
  for (double e : v) vn2 += e * e;
  const double vn = std::sqrt(vn2);
  if (vn == 0.0) return;
  const double angle = vn / radius;
  const double cw = std::cos(angle);
  const double cv = radius * std::sin(angle) / vn;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = cw * w[i] + cv * v[i];
}

}  // namespace

std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::euclidean: return "euclidean";
    case ManifoldKind::sphere: return "sphere";
    case ManifoldKind::oblique: return "oblique";
    case ManifoldKind::stiefel: return "stiefel";
  }
  return "unknown";
}

std::optional<ManifoldKind> parse_manifold_kind(std::string_view name) {
  if (name == "euclidean" || name == "euc" || name == "Euc" || name == "Euc.") return ManifoldKind::euclidean;
  if (name == "sphere" || name == "sp" || name == "Sp") return ManifoldKind::sphere;
  if (name == "oblique" || name == "ob" || name == "Ob") return ManifoldKind::oblique;
  if (name == "stiefel" || name == "st" || name == "St") return ManifoldKind::stiefel;
  return std::nullopt;
}

std::string_view to_string(MapKind kind) {
  return kind == MapKind::retraction ? "retraction" : "exponential";
}

std::optional<MapKind> parse_map_kind(std::string_view name) {
  if (name == "retraction") return MapKind::retraction;
  if (name == "exponential" || name == "exp") return MapKind::exponential;
  return std::nullopt;
}

ManifoldSpec ManifoldSpec::make(ManifoldKind kind, std::size_t rows, std::size_t cols,
                                double scale) {
  if (rows == 0 || cols == 0) throw ShapeError("ManifoldSpec: empty shape");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValueError("ManifoldSpec: scale must be positive and finite");
  }
  if ((kind == ManifoldKind::oblique || kind == ManifoldKind::stiefel) && rows < cols) {
    throw ShapeError(std::string(to_string(kind)) + " manifold needs rows >= cols, got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
  return ManifoldSpec{kind, rows, cols, scale};
}

double ManifoldSpec::curvature_bound() const {
  return kind == ManifoldKind::euclidean ? 0.0 : 1.0 / scale;
}

double ManifoldSpec::frobenius_budget() const {
  switch (kind) {
    case ManifoldKind::sphere: return scale;
    case ManifoldKind::oblique:
    case ManifoldKind::stiefel: return static_cast<double>(cols) * scale;
    case ManifoldKind::euclidean: break;
  }
  return 0.0;
}

ManifoldSpec ManifoldSpec::with_scale(double new_scale) const {
  return make(kind, rows, cols, new_scale);
}

double check_constraint(const ManifoldSpec& spec, const Matrix& m) {
  require_shape(spec, m, "check_constraint");
  switch (spec.kind) {
    case ManifoldKind::euclidean: return 0.0;
    case ManifoldKind::sphere: return std::abs(m.squared_norm() - spec.scale);
    case ManifoldKind::oblique: {
      const double target = std::sqrt(spec.scale);
      double worst = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c)
        worst = std::max(worst, std::abs(m.column_norm(c) - target));
      return worst;
    }
    case ManifoldKind::stiefel: {
      Matrix gram = matmul_tn(m, m);
      for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) -= spec.scale;
      return max_abs(gram);
    }
  }
  return 0.0;
}

double tangency_residual(const ManifoldSpec& spec, const Matrix& w, const Matrix& v) {
  require_shape(spec, w, "tangency_residual");
  require_shape(spec, v, "tangency_residual");
  switch (spec.kind) {
    case ManifoldKind::euclidean: return 0.0;
    case ManifoldKind::sphere: return std::abs(dot(w, v)) / spec.scale;
    case ManifoldKind::oblique: {
      double worst = 0.0;
      for (double d : column_dots(w, v)) worst = std::max(worst, std::abs(d));
      return worst / spec.scale;
    }
    case ManifoldKind::stiefel: return max_abs(sym(matmul_tn(w, v))) / spec.scale;
  }
  return 0.0;
}

Matrix random_point(const ManifoldSpec& spec, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    const Matrix g = random_gaussian(spec.rows, spec.cols, seed + attempt);
    try {
      switch (spec.kind) {
        case ManifoldKind::euclidean:
          return g * std::sqrt(spec.scale / static_cast<double>(spec.rows));
        case ManifoldKind::sphere: {
          const double n = g.frobenius_norm();
          if (n == 0.0) continue;
          return g * (std::sqrt(spec.scale) / n);
        }
        case ManifoldKind::oblique: {
          std::vector<double> inv(g.cols());
          bool degenerate = false;
          for (std::size_t c = 0; c < g.cols(); ++c) {
            const double n = g.column_norm(c);
            degenerate = degenerate || n == 0.0;
            inv[c] = n == 0.0 ? 0.0 : std::sqrt(spec.scale) / n;
          }
          if (degenerate) continue;
          return scale_columns(g, inv);
        }
        case ManifoldKind::stiefel:
          return qr_orthonormal(g) * std::sqrt(spec.scale);
      }
    } catch (const RankDeficientError&) {
      continue;
    }
  }
}

Matrix project_tangent(const ManifoldSpec& spec, const Matrix& w, const Matrix& mu) {
  require_shape(spec, w, "project_tangent");
  require_shape(spec, mu, "project_tangent");
  switch (spec.kind) {
    case ManifoldKind::euclidean: return mu;
    case ManifoldKind::sphere: return mu - (dot(w, mu) / spec.scale) * w;
    case ManifoldKind::oblique: {
      std::vector<double> d = column_dots(w, mu);
      for (double& e : d) e /= spec.scale;
      return mu - scale_columns(w, d);
    }
    case ManifoldKind::stiefel:
      return mu - matmul(w, sym(matmul_tn(w, mu))) * (1.0 / spec.scale);
  }
  return mu;
}

Matrix retract(const ManifoldSpec& spec, const Matrix& w, const Matrix& v) {
  require_shape(spec, w, "retract");
  require_shape(spec, v, "retract");
  Matrix z = w + v;
  switch (spec.kind) {
    case ManifoldKind::euclidean: return z;
    case ManifoldKind::sphere: {
      const double n = z.frobenius_norm();
      if (!(n > 0.0)) throw DegenerateRetractionError("retract: sphere step reached w + v = 0");
      return z * (std::sqrt(spec.scale) / n);
    }
    case ManifoldKind::oblique: {
      std::vector<double> inv(z.cols());
      for (std::size_t c = 0; c < z.cols(); ++c) {
        const double n = z.column_norm(c);
        if (!(n > 0.0)) {
          throw DegenerateRetractionError("retract: oblique column " + std::to_string(c) +
                                          " of w + v is zero");
        }
        inv[c] = std::sqrt(spec.scale) / n;
      }
      return scale_columns(z, inv);
    }
    case ManifoldKind::stiefel:
      return qr_orthonormal(z) * std::sqrt(spec.scale);
  }
  return z;
}

Matrix exp_map(const ManifoldSpec& spec, const Matrix& w, const Matrix& v) {
  require_shape(spec, w, "exp_map");
  require_shape(spec, v, "exp_map");
  switch (spec.kind) {
    case ManifoldKind::euclidean: return w + v;
    case ManifoldKind::sphere: {
      Matrix out = w;
      sphere_geodesic(out.values(), v.values(), std::sqrt(spec.scale));
      return out;
    }
    case ManifoldKind::oblique: {
      Matrix out = w;
      const double radius = std::sqrt(spec.scale);
      std::vector<double> wc(w.rows());
      std::vector<double> vc(w.rows());
      for (std::size_t c = 0; c < w.cols(); ++c) {
        for (std::size_t r = 0; r < w.rows(); ++r) {
          wc[r] = w(r, c);
          vc[r] = v(r, c);
        }
        sphere_geodesic(wc, vc, radius);
        for (std::size_t r = 0; r < w.rows(); ++r) out(r, c) = wc[r];
      }
      return out;
    }
    case ManifoldKind::stiefel: {
      if (v.squared_norm() == 0.0) return w;
      // Work on the unit Stiefel manifold: y = w / s, ydot = v / s with s = sqrt(Re).
      const double s = std::sqrt(spec.scale);
      const Matrix y = w * (1.0 / s);
      const Matrix yd = v * (1.0 / s);
      const std::size_t p = spec.cols;
      const std::size_t n = spec.rows;
      const Matrix a = matmul_tn(y, yd);
      const Matrix gram = matmul_tn(yd, yd);
      // Block generator [[A, -S], [I, A]] of the embedded-metric geodesic.
      Matrix block(2 * p, 2 * p);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          block(i, j) = a(i, j);
          block(i, p + j) = -gram(i, j);
          block(p + i, p + j) = a(i, j);
        }
        block(p + i, i) = 1.0;
      }
      const Matrix e = matrix_exp(block);
      const Matrix e_neg_a = matrix_exp(-a);
      // [y yd] * e[:, :p] * exp(-A)
      Matrix lead(n, p);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < p; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k < p; ++k) acc += y(r, k) * e(k, j) + yd(r, k) * e(p + k, j);
          lead(r, j) = acc;
        }
      return matmul(lead, e_neg_a) * s;
    }
  }
  return w;
}

Matrix move(const ManifoldSpec& spec, const Matrix& w, const Matrix& v, MapKind map) {
  return map == MapKind::retraction ? retract(spec, w, v) : exp_map(spec, w, v);
}

Matrix transport_scale(const ManifoldSpec& spec, const Matrix& w, double new_scale) {
  require_shape(spec, w, "transport_scale");
  if (spec.kind == ManifoldKind::euclidean || new_scale == spec.scale) return w;
  if (!(new_scale > 0.0)) throw ValueError("transport_scale: scale must be positive");
  return w * std::sqrt(new_scale / spec.scale);
}

double sphere_arc_length(const ManifoldSpec& spec, const Matrix& a, const Matrix& b) {
  require_shape(spec, a, "sphere_arc_length");
  require_shape(spec, b, "sphere_arc_length");
  const double cosine = std::clamp(dot(a, b) / spec.scale, -1.0, 1.0);
  return std::sqrt(spec.scale) * std::acos(cosine);
}

}  // namespace fgsgd
