#include "fgsgd/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

constexpr std::array<char, 4> kMagic{'F', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kFormat = "fgsgd-checkpoint";
constexpr const char* kManifest = "checkpoint.json";
constexpr const char* kBlob = "checkpoint.bin";

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(value >> (8 * i))));
  }
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string source) : bytes_(bytes), source_(std::move(source)) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw InputError(source_ + ": truncated");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  void expect_magic() {
    if (bytes_.size() < kMagic.size() || std::memcmp(bytes_.data(), kMagic.data(), 4) != 0) {
      throw InputError(source_ + ": not a checkpoint blob");
    }
    pos_ = kMagic.size();
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

std::vector<Matrix> read_blob(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, path.string());
  r.expect_magic();
  if (r.get<std::uint32_t>() != kVersion) throw InputError(path.string() + ": unsupported version");
  const std::uint32_t count = r.get<std::uint32_t>();
  std::vector<Matrix> records;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t rows = r.get<std::uint32_t>();
    const std::uint32_t cols = r.get<std::uint32_t>();
    const std::uint64_t n = r.get<std::uint64_t>();
    if (n != static_cast<std::uint64_t>(rows) * cols) {
      throw InputError(path.string() + ": record " + std::to_string(k) + " length mismatch");
    }
    std::vector<double> entries(n);
    for (double& v : entries) v = std::bit_cast<double>(r.get<std::uint64_t>());
    try {
      records.emplace_back(rows, cols, std::move(entries));
    } catch (const Error& e) {
      throw InputError(path.string() + ": record " + std::to_string(k) + ": " + e.what());
    }
  }
  if (!r.at_end()) throw InputError(path.string() + ": trailing bytes");
  return records;
}

template <typename T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(where + ": bad \"" + key + "\"");
  }
}

}  // namespace

Checkpoint checkpoint_from_model(const Model& model, std::size_t epoch,
                                 const nlohmann::json& config) {
  Checkpoint ckpt;
  ckpt.epoch = epoch;
  ckpt.config = config;
  for (std::size_t l = 0; l < model.layouts.size(); ++l) {
    const GroupLayout& layout = model.layouts[l];
    const LayerShape& s = model.shapes[l];
    CheckpointLayer layer;
    layer.layer = layout.layer();
    layer.scheme = layout.scheme();
    layer.in_channels = layout.in_channels();
    layer.out_channels = layout.out_channels();
    layer.subset_count = layout.subset_count();
    layer.seed = layout.seed();
    for (std::size_t g = 0; g < layout.groups().size(); ++g) {
      const Group& grp = layout.groups()[g];
      CheckpointGroup cg;
      for (std::size_t i = 0; i < grp.members.size(); ++i) {
        const ComponentState& comp = model.components[l][g][i];
        cg.members.push_back({grp.members[i], comp.spec, comp.scale,
                              model.weights[l][s.index(grp.members[i].in, grp.members[i].out)]});
      }
      layer.groups.push_back(std::move(cg));
    }
    ckpt.layers.push_back(std::move(layer));
  }
  return ckpt;
}

std::filesystem::path save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string blob(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(blob, kVersion);
  std::size_t count = 0;
  for (const auto& layer : ckpt.layers)
    for (const auto& g : layer.groups) count += g.members.size();
  put_le<std::uint32_t>(blob, static_cast<std::uint32_t>(count));

  nlohmann::json layers = nlohmann::json::array();
  std::size_t index = 0;
  for (const auto& layer : ckpt.layers) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : layer.groups) {
      nlohmann::json members = nlohmann::json::array();
      for (const auto& m : g.members) {
        put_le<std::uint32_t>(blob, static_cast<std::uint32_t>(m.weight.rows()));
        put_le<std::uint32_t>(blob, static_cast<std::uint32_t>(m.weight.cols()));
        put_le<std::uint64_t>(blob, m.weight.size());
        for (double v : m.weight.values()) put_le<std::uint64_t>(blob, std::bit_cast<std::uint64_t>(v));
        members.push_back({{"in", m.coord.in},
                           {"out", m.coord.out},
                           {"kind", std::string(to_string(m.spec.kind))},
                           {"rows", m.spec.rows},
                           {"cols", m.spec.cols},
                           {"scale", m.spec.scale},
                           {"gamma", m.scale.gamma},
                           {"lambda", m.scale.lambda},
                           {"re", m.scale.re},
                           {"ema_momentum", m.scale.ema_momentum},
                           {"blob_index", index++}});
      }
      groups.push_back({{"members", members}});
    }
    layers.push_back({{"layer", layer.layer},
                      {"scheme", std::string(to_string(layer.scheme))},
                      {"in_channels", layer.in_channels},
                      {"out_channels", layer.out_channels},
                      {"subset_count", layer.subset_count},
                      {"seed", layer.seed},
                      {"groups", groups}});
  }
  const nlohmann::json manifest = {{"format", kFormat},   {"version", kVersion},
                                   {"epoch", ckpt.epoch}, {"config", ckpt.config},
                                   {"layout", "layout.json"}, {"blob", kBlob},
                                   {"layers", layers}};
  write_file(dir / kBlob, blob);
  const auto manifest_path = dir / kManifest;
  write_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto manifest_path = std::filesystem::is_directory(path) ? path / kManifest : path;
  const std::string where = manifest_path.string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(where + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kFormat) {
    throw InputError(where + ": not an fgsgd checkpoint manifest");
  }
  if (field<std::uint32_t>(j, "version", where) != kVersion) {
    throw InputError(where + ": unsupported version");
  }

  Checkpoint ckpt;
  ckpt.epoch = field<std::size_t>(j, "epoch", where);
  if (j.contains("config")) ckpt.config = j["config"];
  const auto blob_name = field<std::string>(j, "blob", where);
  const auto& layers = j.contains("layers") ? j["layers"] : nlohmann::json();
  if (!layers.is_array() || layers.empty()) throw InputError(where + ": checkpoint has no layers");

  const std::vector<Matrix> records = read_blob(manifest_path.parent_path() / blob_name);
  std::size_t member_total = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string lw = where + ": layers[" + std::to_string(l) + "]";
    const auto& jl = layers[l];
    CheckpointLayer layer;
    layer.layer = field<int>(jl, "layer", lw);
    const auto scheme = parse_scheme(field<std::string>(jl, "scheme", lw));
    if (!scheme) throw InputError(lw + ": unknown scheme");
    layer.scheme = *scheme;
    layer.in_channels = jl.value("in_channels", std::size_t{0});
    layer.out_channels = jl.value("out_channels", std::size_t{0});
    layer.subset_count = jl.value("subset_count", std::size_t{0});
    layer.seed = jl.value("seed", std::uint64_t{0});
    const auto& groups = jl.contains("groups") ? jl["groups"] : nlohmann::json();
    if (!groups.is_array() || groups.empty()) throw InputError(lw + ": no groups");
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::string gw = lw + ".groups[" + std::to_string(g) + "]";
      const auto& members = groups[g].contains("members") ? groups[g]["members"] : nlohmann::json();
      if (!members.is_array() || members.empty()) throw InputError(gw + ": no members");
      CheckpointGroup cg;
      for (std::size_t i = 0; i < members.size(); ++i) {
        const std::string mw = gw + ".members[" + std::to_string(i) + "]";
        const auto& jm = members[i];
        CheckpointMember m;
        m.coord = {field<std::size_t>(jm, "in", mw), field<std::size_t>(jm, "out", mw)};
        const auto kind = parse_manifold_kind(field<std::string>(jm, "kind", mw));
        if (!kind) throw InputError(mw + ": unknown manifold kind");
        const auto index = field<std::size_t>(jm, "blob_index", mw);
        if (index >= records.size()) throw InputError(mw + ": blob_index out of range");
        m.weight = records[index];
        try {
          m.spec = ManifoldSpec::make(*kind, field<std::size_t>(jm, "rows", mw),
                                      field<std::size_t>(jm, "cols", mw),
                                      field<double>(jm, "scale", mw));
        } catch (const InputError&) {
          throw;
        } catch (const Error& e) {
          throw InputError(mw + ": " + e.what());
        }
        if (m.weight.rows() != m.spec.rows || m.weight.cols() != m.spec.cols) {
          throw InputError(mw + ": blob shape does not match rows/cols");
        }
        m.scale.gamma = jm.value("gamma", 1.0);
        m.scale.lambda = jm.value("lambda", 1.0);
        m.scale.re = jm.value("re", m.spec.scale);
        m.scale.ema_momentum = jm.value("ema_momentum", 0.9);
        cg.members.push_back(std::move(m));
        ++member_total;
      }
      layer.groups.push_back(std::move(cg));
    }
    ckpt.layers.push_back(std::move(layer));
  }
  if (member_total == 0) throw InputError(where + ": checkpoint has no weights");
  return ckpt;
}

Model model_from_checkpoint(const Checkpoint& ckpt, std::span<const LayerShape> shapes) {
  if (ckpt.layers.size() != shapes.size()) {
    throw ShapeError("model_from_checkpoint: layer count mismatch");
  }
  Model model;
  model.shapes.assign(shapes.begin(), shapes.end());
  model.weights = zero_weights(shapes);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    const CheckpointLayer& cl = ckpt.layers[l];
    std::vector<Group> groups;
    auto& layer = model.components.emplace_back();
    for (const CheckpointGroup& cg : cl.groups) {
      Group grp;
      auto& comps = layer.emplace_back();
      for (const CheckpointMember& m : cg.members) {
        if (m.coord.in >= s.in_channels || m.coord.out >= s.out_channels ||
            m.weight.rows() != s.kernel_rows || m.weight.cols() != s.kernel_cols) {
          throw ShapeError("model_from_checkpoint: member does not fit layer " +
                           std::to_string(l));
        }
        grp.members.push_back(m.coord);
        grp.kinds.push_back(m.spec.kind);
        comps.push_back({m.spec, m.scale});
        model.weights[l][s.index(m.coord.in, m.coord.out)] = m.weight;
      }
      groups.push_back(std::move(grp));
    }
    GroupLayout layout(cl.layer, cl.scheme, s.in_channels, s.out_channels, cl.subset_count,
                       cl.seed, std::move(groups));
    if (!layout.is_partition()) {
      throw ShapeError("model_from_checkpoint: groups of layer " + std::to_string(l) +
                       " do not partition its kernels");
    }
    model.layouts.push_back(std::move(layout));
  }
  return model;
}

}  // namespace fgsgd
