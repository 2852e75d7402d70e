#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgsgd/manifolds.hpp"
#include "fgsgd/matkernel.hpp"

namespace fgsgd {

/// Group-construction scheme for one layer.
///   PI:  groups hold a fixed input channel c and a subset of output channels.
///   PO:  groups hold a fixed output channel d and a subset of input channels.
///   PIO: input channels are split into subsets; even-numbered subsets are grouped
///        PI-style, odd-numbered subsets PO-style.
enum class Scheme { pi, po, pio };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

// (input channel, output channel), zero-based.
struct Coord {
  std::size_t in = 0;
  std::size_t out = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

struct Group {
  std::vector<Coord> members;
  std::vector<ManifoldKind> kinds;  // one per member
  friend bool operator==(const Group&, const Group&) = default;
};

/// Partition of a layer's C x D weight coordinates into groups. Immutable once built.
class GroupLayout {
 public:
  GroupLayout(int layer, Scheme scheme, std::size_t in_channels, std::size_t out_channels,
              std::size_t subset_count, std::uint64_t seed, std::vector<Group> groups);

  int layer() const noexcept { return layer_; }
  Scheme scheme() const noexcept { return scheme_; }
  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t out_channels() const noexcept { return out_channels_; }
  std::size_t subset_count() const noexcept { return subset_count_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }

  // True when every (c, d) appears in exactly one group.
  bool is_partition() const;

  friend bool operator==(const GroupLayout&, const GroupLayout&) = default;

 private:
  int layer_;
  Scheme scheme_;
  std::size_t in_channels_;
  std::size_t out_channels_;
  std::size_t subset_count_;
  std::uint64_t seed_;
  std::vector<Group> groups_;
};

/// Builds a layout. Channel indices are shuffled with a seeded Fisher-Yates
/// pass and sliced into `subset_count` contiguous subsets (remainders go one
/// per subset to the first subsets). Kinds are assigned per group round-robin
/// from `kinds_pool` in group order.
///
/// Throws ValueError if subset_count is 0 or exceeds the split axis (D for PI
/// and PIO, C for PO). PIO splits the input axis into min(subset_count, C).
GroupLayout build_layout(Scheme scheme, std::size_t in_channels, std::size_t out_channels,
                         std::size_t subset_count, std::span<const ManifoldKind> kinds_pool,
                         std::uint64_t seed, int layer = 0);

nlohmann::json layout_to_json(const GroupLayout& layout);
GroupLayout layout_from_json(const nlohmann::json& j);

/// A point on a product of component manifolds, one component per group member.
struct ProductPoint {
  std::vector<ManifoldSpec> specs;
  std::vector<Matrix> parts;

  std::size_t size() const noexcept { return parts.size(); }
};

struct ProductTangent {
  std::vector<Matrix> parts;
};

ProductTangent product_project(const ProductPoint& w, std::span<const Matrix> mu);

// Pythagorean norm (sum_i |g_i|_F^2)^(1/2).
double product_grad_norm(const ProductTangent& g);

ProductPoint product_retract(const ProductPoint& w, const ProductTangent& v,
                             MapKind map = MapKind::retraction);

// max over components; 0 for all-Euclidean products.
double curvature_bound(std::span<const ManifoldSpec> specs);

double max_violation(const ProductPoint& w);

}  // namespace fgsgd
