#include "fgsgd/pom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(idx[i - 1], idx[pick(rng)]);
  }
  return idx;
}

std::vector<std::vector<std::size_t>> slice(const std::vector<std::size_t>& perm,
                                            std::size_t parts) {
  std::vector<std::vector<std::size_t>> out(parts);
  const std::size_t base = perm.size() / parts;
  const std::size_t extra = perm.size() % parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    out[p].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                  perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

void require_subsets(std::size_t k, std::size_t axis, const char* axis_name) {
  if (k == 0) throw ValueError("build_layout: subset_count must be positive");
  if (k > axis) {
    throw ValueError("build_layout: subset_count " + std::to_string(k) + " exceeds " +
                     axis_name + " count " + std::to_string(axis));
  }
}

void require_same_size(const ProductPoint& w, std::size_t n, const char* what) {
  if (w.specs.size() != w.parts.size()) {
    throw ShapeError(std::string(what) + ": product point has mismatched specs/parts");
  }
  if (n != w.parts.size()) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(w.parts.size()) +
                     " components, got " + std::to_string(n));
  }
}

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::pi: return "PI";
    case Scheme::po: return "PO";
    case Scheme::pio: return "PIO";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "PI" || name == "pi") return Scheme::pi;
  if (name == "PO" || name == "po") return Scheme::po;
  if (name == "PIO" || name == "pio") return Scheme::pio;
  return std::nullopt;
}

GroupLayout::GroupLayout(int layer, Scheme scheme, std::size_t in_channels,
                         std::size_t out_channels, std::size_t subset_count, std::uint64_t seed,
                         std::vector<Group> groups)
    : layer_(layer),
      scheme_(scheme),
      in_channels_(in_channels),
      out_channels_(out_channels),
      subset_count_(subset_count),
      seed_(seed),
      groups_(std::move(groups)) {
  for (const Group& g : groups_) {
    if (g.members.size() != g.kinds.size()) {
      throw ValueError("GroupLayout: every member needs exactly one manifold kind");
    }
    for (const Coord& m : g.members) {
      if (m.in >= in_channels_ || m.out >= out_channels_) {
        throw ValueError("GroupLayout: coordinate outside the C x D grid");
      }
    }
  }
}

bool GroupLayout::is_partition() const {
  std::vector<int> hits(in_channels_ * out_channels_, 0);
  for (const Group& g : groups_) {
    if (g.members.empty()) return false;
    for (const Coord& m : g.members) ++hits[m.in * out_channels_ + m.out];
  }
  return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
}

GroupLayout build_layout(Scheme scheme, std::size_t in_channels, std::size_t out_channels,
                         std::size_t subset_count, std::span<const ManifoldKind> kinds_pool,
                         std::uint64_t seed, int layer) {
  if (in_channels == 0 || out_channels == 0) throw ValueError("build_layout: empty channel axis");
  if (kinds_pool.empty()) throw ValueError("build_layout: empty manifold kind pool");

  std::mt19937_64 rng(seed);
  std::vector<std::vector<Coord>> member_sets;

  auto add_pi_groups = [&](const std::vector<std::size_t>& inputs,
                           const std::vector<std::vector<std::size_t>>& out_subsets) {
    for (std::size_t c : inputs)
      for (const auto& subset : out_subsets) {
        std::vector<Coord> g;
        for (std::size_t d : subset) g.push_back({c, d});
        member_sets.push_back(std::move(g));
      }
  };
  auto add_po_groups = [&](const std::vector<std::size_t>& input_subset) {
    for (std::size_t d = 0; d < out_channels; ++d) {
      std::vector<Coord> g;
      for (std::size_t c : input_subset) g.push_back({c, d});
      member_sets.push_back(std::move(g));
    }
  };

  switch (scheme) {
    case Scheme::pi: {
      require_subsets(subset_count, out_channels, "output channel");
      const auto outs = slice(shuffled_indices(out_channels, rng), subset_count);
      std::vector<std::size_t> inputs(in_channels);
      std::iota(inputs.begin(), inputs.end(), std::size_t{0});
      add_pi_groups(inputs, outs);
      break;
    }
    case Scheme::po: {
      require_subsets(subset_count, in_channels, "input channel");
      const auto ins = slice(shuffled_indices(in_channels, rng), subset_count);
      for (std::size_t d = 0; d < out_channels; ++d)
        for (const auto& subset : ins) {
          std::vector<Coord> g;
          for (std::size_t c : subset) g.push_back({c, d});
          member_sets.push_back(std::move(g));
        }
      break;
    }
    case Scheme::pio: {
      require_subsets(subset_count, out_channels, "output channel");
      const auto ins =
          slice(shuffled_indices(in_channels, rng), std::min(subset_count, in_channels));
      const auto outs = slice(shuffled_indices(out_channels, rng), subset_count);
      for (std::size_t a = 0; a < ins.size(); ++a) {
        if (a % 2 == 0) {
          add_pi_groups(ins[a], outs);
        } else {
          add_po_groups(ins[a]);
        }
      }
      break;
    }
  }

  std::vector<Group> groups;
  groups.reserve(member_sets.size());
  for (std::size_t g = 0; g < member_sets.size(); ++g) {
    const ManifoldKind kind = kinds_pool[g % kinds_pool.size()];
    Group group;
    group.kinds.assign(member_sets[g].size(), kind);
    group.members = std::move(member_sets[g]);
    groups.push_back(std::move(group));
  }
  return GroupLayout(layer, scheme, in_channels, out_channels, subset_count, seed,
                     std::move(groups));
}

nlohmann::json layout_to_json(const GroupLayout& layout) {
  nlohmann::json groups = nlohmann::json::array();
  for (const Group& g : layout.groups()) {
    nlohmann::json coords = nlohmann::json::array();
    nlohmann::json kinds = nlohmann::json::array();
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      coords.push_back({g.members[i].in, g.members[i].out});
      kinds.push_back(std::string(to_string(g.kinds[i])));
    }
    groups.push_back({{"coords", coords}, {"kinds", kinds}});
  }
  return {{"layer", layout.layer()},
          {"scheme", std::string(to_string(layout.scheme()))},
          {"in_channels", layout.in_channels()},
          {"out_channels", layout.out_channels()},
          {"subset_count", layout.subset_count()},
          {"seed", layout.seed()},
          {"groups", groups}};
}

GroupLayout layout_from_json(const nlohmann::json& j) {
  try {
    const auto scheme = parse_scheme(j.at("scheme").get<std::string>());
    if (!scheme) throw InputError("layout: unknown scheme " + j.at("scheme").dump());
    std::vector<Group> groups;
    for (const auto& gj : j.at("groups")) {
      Group g;
      for (const auto& c : gj.at("coords")) {
        g.members.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
      }
      for (const auto& k : gj.at("kinds")) {
        const auto kind = parse_manifold_kind(k.get<std::string>());
        if (!kind) throw InputError("layout: unknown manifold kind " + k.dump());
        g.kinds.push_back(*kind);
      }
      groups.push_back(std::move(g));
    }
    return GroupLayout(j.at("layer").get<int>(), *scheme, j.at("in_channels").get<std::size_t>(),
                       j.at("out_channels").get<std::size_t>(),
                       j.at("subset_count").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                       std::move(groups));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("layout: ") + e.what());
  } catch (const ValueError& e) {
    throw InputError(std::string("layout: ") + e.what());
  }
}

ProductTangent product_project(const ProductPoint& w, std::span<const Matrix> mu) {
  require_same_size(w, mu.size(), "product_project");
  ProductTangent out;
  out.parts.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out.parts.push_back(project_tangent(w.specs[i], w.parts[i], mu[i]));
  return out;
}

double product_grad_norm(const ProductTangent& g) {
  double s = 0.0;
  for (const Matrix& part : g.parts) s += part.squared_norm();
  return std::sqrt(s);
}

ProductPoint product_retract(const ProductPoint& w, const ProductTangent& v, MapKind map) {
  require_same_size(w, v.parts.size(), "product_retract");
  ProductPoint out;
  out.specs = w.specs;
  out.parts.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out.parts.push_back(move(w.specs[i], w.parts[i], v.parts[i], map));
  return out;
}

double curvature_bound(std::span<const ManifoldSpec> specs) {
  double c = 0.0;
  for (const ManifoldSpec& s : specs) c = std::max(c, s.curvature_bound());
  return c;
}

double max_violation(const ProductPoint& w) {
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    worst = std::max(worst, check_constraint(w.specs[i], w.parts[i]));
  return worst;
}

}  // namespace fgsgd
