#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fgsgd/matkernel.hpp"

namespace fgsgd {

enum class ManifoldKind { euclidean, sphere, oblique, stiefel };

std::string_view to_string(ManifoldKind kind);
std::optional<ManifoldKind> parse_manifold_kind(std::string_view name);

/// One component weight space of shape rows x cols.
///
/// `scale` is the squared radius Re of the component:
///   - sphere:  |w|_F^2 = Re
///   - oblique: every column has squared norm Re
///   - stiefel: w^T w = Re * I
/// Scale 1 gives the unit manifolds. Euclidean components ignore the scale.
struct ManifoldSpec {
  ManifoldKind kind = ManifoldKind::euclidean;
  std::size_t rows = 1;
  std::size_t cols = 1;
  double scale = 1.0;

  /// Validating constructor: positive shape, positive finite scale, rows >= cols
  /// for oblique and Stiefel.
  static ManifoldSpec make(ManifoldKind kind, std::size_t rows, std::size_t cols,
                           double scale = 1.0);

  // Upper bound on sectional curvature: 1/Re for the compact kinds, 0 for Euclidean.
  double curvature_bound() const;

  // |w|_F^2 of every point on the manifold (Re for the sphere, cols * Re otherwise).
  double frobenius_budget() const;

  ManifoldSpec with_scale(double new_scale) const;

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;
};

enum class MapKind { retraction, exponential };

std::string_view to_string(MapKind kind);
std::optional<MapKind> parse_map_kind(std::string_view name);

/// Distance of `m` from the manifold; 0 iff `m` lies on it.
///
/// sphere: ||m|_F^2 - Re|; oblique: max_b ||m_b| - sqrt(Re)|;
/// stiefel: max |m^T m - Re I|; euclidean: 0.
double check_constraint(const ManifoldSpec& spec, const Matrix& m);

/// How far `v` is from the tangent space at `w`, scale-normalized:
/// sphere |<w, v>| / Re, oblique max |diag(w^T v)| / Re, stiefel max |sym(w^T v)| / Re.
double tangency_residual(const ManifoldSpec& spec, const Matrix& w, const Matrix& v);

// Deterministic Gaussian sample mapped onto the manifold.
Matrix random_point(const ManifoldSpec& spec, std::uint64_t seed);

/// Orthogonal projection of an ambient (Euclidean) gradient onto T_w M.
Matrix project_tangent(const ManifoldSpec& spec, const Matrix& w, const Matrix& mu);

// Normalization retraction: scaled sphere normalization, column normalization, or QR factor.
Matrix retract(const ManifoldSpec& spec, const Matrix& w, const Matrix& v);

// Riemannian exponential map of the embedded metric.
Matrix exp_map(const ManifoldSpec& spec, const Matrix& w, const Matrix& v);

Matrix move(const ManifoldSpec& spec, const Matrix& w, const Matrix& v, MapKind map);

/// Maps a point of the manifold at `spec.scale` onto the same manifold at `new_scale`
/// by multiplying with sqrt(new_scale / spec.scale). Euclidean points are returned as-is.
Matrix transport_scale(const ManifoldSpec& spec, const Matrix& w, double new_scale);

// Geodesic distance on a (scaled) sphere; used for diagnostics only.
double sphere_arc_length(const ManifoldSpec& spec, const Matrix& a, const Matrix& b);

}  // namespace fgsgd
