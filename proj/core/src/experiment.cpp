#include "fgsgd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "fgsgd/error.hpp"
#include "fgsgd/normbounds.hpp"

namespace fgsgd {

namespace {

using nlohmann::json;

std::size_t line_at_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Best-effort source line of a JSON pointer: follows its object keys through the text.
std::size_t line_of_pointer(const std::string& text, const json::json_pointer& ptr) {
  std::size_t pos = 0;
  std::string path = ptr.to_string();
  std::size_t start = 1;
  while (start <= path.size() && !path.empty()) {
    std::size_t end = path.find('/', start);
    if (end == std::string::npos) end = path.size();
    const std::string token = path.substr(start, end - start);
    start = end + 1;
    if (!token.empty() && std::all_of(token.begin(), token.end(), ::isdigit)) continue;
    const std::string quoted = "\"" + token + "\"";
    for (std::size_t at = text.find(quoted, pos); at != std::string::npos;
         at = text.find(quoted, at + 1)) {
      std::size_t k = at + quoted.size();
      while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
      if (k < text.size() && text[k] == ':') {
        pos = at;
        break;
      }
    }
  }
  return line_at_offset(text, pos);
}

class ConfigReader {
 public:
  ConfigReader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const json::json_pointer& ptr, const std::string& msg) const {
    throw InputError(source_ + ":" + std::to_string(line_of_pointer(text_, ptr)) + ": " +
                     (ptr.empty() ? std::string("/") : ptr.to_string()) + ": " + msg);
  }

  const json& object(const json& parent, const json::json_pointer& ptr, const char* key,
                     bool required = true) const {
    static const json empty = json::object();
    if (!parent.contains(key)) {
      if (required) fail(ptr, std::string("missing \"") + key + "\"");
      return empty;
    }
    const json& j = parent.at(key);
    if (!j.is_object()) fail(ptr / key, "expected an object");
    return j;
  }

  void only_keys(const json& obj, const json::json_pointer& ptr,
                 std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(ptr / key, "unknown key");
      }
    }
  }

  std::uint64_t uint(const json& obj, const json::json_pointer& ptr, const char* key,
                     std::optional<std::uint64_t> fallback = std::nullopt) const {
    if (!obj.contains(key)) {
      if (!fallback) fail(ptr, std::string("missing \"") + key + "\"");
      return *fallback;
    }
    const json& j = obj.at(key);
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    fail(ptr / key, "expected a non-negative integer");
  }

  std::size_t positive(const json& obj, const json::json_pointer& ptr, const char* key,
                       std::optional<std::uint64_t> fallback = std::nullopt) const {
    const std::uint64_t v = uint(obj, ptr, key, fallback);
    if (v == 0) fail(ptr / key, "must be positive");
    return static_cast<std::size_t>(v);
  }

  double real(const json& obj, const json::json_pointer& ptr, const char* key,
              double fallback) const {
    if (!obj.contains(key)) return fallback;
    const json& j = obj.at(key);
    if (!j.is_number()) fail(ptr / key, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(ptr / key, "must be finite");
    return v;
  }

  std::string string(const json& obj, const json::json_pointer& ptr, const char* key) const {
    if (!obj.contains(key)) fail(ptr, std::string("missing \"") + key + "\"");
    const json& j = obj.at(key);
    if (!j.is_string()) fail(ptr / key, "expected a string");
    return j.get<std::string>();
  }

 private:
  const std::string& text_;
  std::string source_;
};

std::vector<LayerSpec> parse_layers(const ConfigReader& r, const json& net,
                                    const json::json_pointer& ptr) {
  if (!net.contains("layers") || !net["layers"].is_array() || net["layers"].empty()) {
    r.fail(ptr / "layers", "expected a non-empty array of layers");
  }
  std::vector<LayerSpec> layers;
  const json& arr = net["layers"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto lp = ptr / "layers" / i;
    const json& j = arr[i];
    if (!j.is_object()) r.fail(lp, "expected an object");
    const std::string type = r.string(j, lp, "type");
    if (type == "dense") {
      r.only_keys(j, lp, {"type", "out"});
      layers.push_back(DenseLayer{r.positive(j, lp, "out")});
    } else if (type == "conv2d") {
      r.only_keys(j, lp, {"type", "out_channels", "kernel_h", "kernel_w", "stride"});
      Conv2dLayer c;
      c.out_channels = r.positive(j, lp, "out_channels");
      c.kernel_h = r.positive(j, lp, "kernel_h");
      c.kernel_w = r.positive(j, lp, "kernel_w");
      c.stride = r.positive(j, lp, "stride", 1);
      layers.push_back(c);
    } else {
      r.fail(lp / "type", "unknown layer type \"" + type + "\" (expected dense or conv2d)");
    }
  }
  return layers;
}

std::vector<LayoutChoice> parse_layout(const ConfigReader& r, const json& j,
                                       const json::json_pointer& ptr, std::size_t layer_count,
                                       std::uint64_t seed) {
  r.only_keys(j, ptr, {"scheme", "kinds", "subset_count", "seed"});
  LayoutChoice base;
  const std::string scheme = j.contains("scheme") ? r.string(j, ptr, "scheme") : "PI";
  const auto parsed = parse_scheme(scheme);
  if (!parsed) r.fail(ptr / "scheme", "unknown scheme \"" + scheme + "\" (expected PI, PO or PIO)");
  base.scheme = *parsed;
  if (j.contains("kinds")) {
    const json& kinds = j["kinds"];
    if (!kinds.is_array() || kinds.empty()) r.fail(ptr / "kinds", "expected a non-empty array");
    base.kinds.clear();
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      const auto k = kinds[i].is_string() ? parse_manifold_kind(kinds[i].get<std::string>())
                                          : std::nullopt;
      if (!k) r.fail(ptr / "kinds" / i, "unknown manifold kind");
      base.kinds.push_back(*k);
    }
  }
  base.seed = r.uint(j, ptr, "seed", seed);

  std::vector<LayoutChoice> out(layer_count, base);
  if (!j.contains("subset_count")) return out;
  const json& sc = j["subset_count"];
  if (sc.is_array()) {
    if (sc.size() != layer_count) {
      r.fail(ptr / "subset_count", "expected one entry per layer (" + std::to_string(layer_count) + ")");
    }
    for (std::size_t l = 0; l < layer_count; ++l) {
      if (!sc[l].is_number_integer() || sc[l].get<std::int64_t>() <= 0) {
        r.fail(ptr / "subset_count" / l, "must be a positive integer");
      }
      out[l].subset_count = sc[l].get<std::size_t>();
    }
  } else {
    const std::size_t k = r.positive(j, ptr, "subset_count");
    for (auto& c : out) c.subset_count = k;
  }
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LayerDeltas deltas(const Checkpoint& ckpt, double NormTriple::*which) {
  LayerDeltas d;
  for (const auto& layer : ckpt.layers) {
    auto& row = d.emplace_back();
    for (const auto& g : layer.groups) {
      std::vector<Matrix> ms;
      for (const auto& m : g.members) ms.push_back(m.weight);
      row.push_back(group_norms(ms).*which);
    }
  }
  return d;
}

json triple_json(const NormTriple& t) {
  return {{"frobenius", t.frobenius}, {"spectral", t.spectral}, {"l2to1", t.l2to1}};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte == 0 ? 0 : e.byte - 1;
    throw InputError(source + ":" + std::to_string(line_at_offset(text, at)) +
                     ": syntax error: " + e.what());
  }
  const ConfigReader r(text, source);
  const json::json_pointer top;
  if (!root.is_object()) r.fail(top, "expected a JSON object");
  r.only_keys(root, top, {"seed", "net", "data", "layout", "optimizer", "output"});

  ExperimentConfig cfg;
  cfg.seed = r.uint(root, top, "seed");
  if (seed_override) {
    cfg.seed = *seed_override;
    root["seed"] = *seed_override;
  }

  // net
  const auto np = top / "net";
  const json& net = r.object(root, top, "net");
  r.only_keys(net, np, {"input", "layers", "classes"});
  const json& input = r.object(net, np, "input");
  r.only_keys(input, np / "input", {"channels", "height", "width"});
  cfg.net.input = {r.positive(input, np / "input", "channels", 1),
                   r.positive(input, np / "input", "height", 1),
                   r.positive(input, np / "input", "width", 1)};
  cfg.net.layers = parse_layers(r, net, np);
  cfg.net.classes = r.positive(net, np, "classes");
  if (cfg.net.classes < 2) r.fail(np / "classes", "need at least 2 classes");
  std::vector<LayerShape> shapes;
  try {
    shapes = resolve_shapes(cfg.net);
  } catch (const Error& e) {
    r.fail(np / "layers", e.what());
  }

  // data
  const auto dp = top / "data";
  const json& data = r.object(root, top, "data");
  r.only_keys(data, dp, {"synthetic", "csv"});
  if (data.contains("csv") == data.contains("synthetic")) {
    r.fail(dp, "exactly one of \"synthetic\" or \"csv\" is required");
  }
  cfg.data.classes = cfg.net.classes;
  if (data.contains("csv")) {
    const std::filesystem::path p = r.string(data, dp, "csv");
    cfg.data.csv = p.is_absolute() ? p : base_dir / p;
  } else {
    const auto sp = dp / "synthetic";
    const json& syn = r.object(data, dp, "synthetic");
    r.only_keys(syn, sp, {"classes", "per_class", "spread", "seed"});
    cfg.data.classes = r.positive(syn, sp, "classes", cfg.net.classes);
    if (cfg.data.classes != cfg.net.classes) r.fail(sp / "classes", "must equal net.classes");
    cfg.data.per_class = static_cast<std::size_t>(r.uint(syn, sp, "per_class"));
    cfg.data.spread = r.real(syn, sp, "spread", 1.0);
    if (cfg.data.spread < 0.0) r.fail(sp / "spread", "must be >= 0");
    cfg.data.seed = r.uint(syn, sp, "seed", cfg.seed + 1);
  }

  // layout
  cfg.layouts = parse_layout(r, r.object(root, top, "layout", false), top / "layout",
                             shapes.size(), cfg.seed + 2);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    try {
      (void)build_layout(cfg.layouts[l].scheme, shapes[l].in_channels, shapes[l].out_channels,
                         cfg.layouts[l].subset_count, cfg.layouts[l].kinds, cfg.layouts[l].seed);
    } catch (const Error& e) {
      r.fail(top / "layout" / "subset_count", "layer " + std::to_string(l) + ": " + e.what());
    }
  }

  // optimizer
  const auto op = top / "optimizer";
  const json& opt = r.object(root, top, "optimizer", false);
  r.only_keys(opt, op, {"base_lr", "schedule_decay", "momentum", "euclid_decay", "epochs", "map",
                        "rho_bound", "batch_size", "lambda_momentum"});
  OptConfig& o = cfg.optimizer;
  o.base_lr = r.real(opt, op, "base_lr", o.base_lr);
  if (o.base_lr < 0.0) r.fail(op / "base_lr", "must be >= 0");
  o.schedule_decay = r.real(opt, op, "schedule_decay", o.schedule_decay);
  if (o.schedule_decay <= 0.0) r.fail(op / "schedule_decay", "must be positive");
  o.momentum = r.real(opt, op, "momentum", o.momentum);
  if (o.momentum < 0.0 || o.momentum >= 1.0) r.fail(op / "momentum", "must lie in [0, 1)");
  o.euclid_decay = r.real(opt, op, "euclid_decay", o.euclid_decay);
  if (o.euclid_decay <= 0.0) r.fail(op / "euclid_decay", "must be positive");
  o.epochs = static_cast<std::size_t>(r.uint(opt, op, "epochs", o.epochs));
  if (opt.contains("map")) {
    const auto m = parse_map_kind(r.string(opt, op, "map"));
    if (!m) r.fail(op / "map", "expected retraction or exponential");
    o.map = *m;
  }
  o.rho_bound = r.real(opt, op, "rho_bound", o.rho_bound);
  if (o.rho_bound < 0.0) r.fail(op / "rho_bound", "must be >= 0");
  cfg.train.batch_size = static_cast<std::size_t>(r.uint(opt, op, "batch_size", 0));
  cfg.train.shuffle_seed = cfg.seed + 3;
  cfg.lambda_momentum = r.real(opt, op, "lambda_momentum", 0.9);
  if (cfg.lambda_momentum <= 0.0 || cfg.lambda_momentum >= 1.0) {
    r.fail(op / "lambda_momentum", "must lie in (0, 1)");
  }

  // output
  if (root.contains("output")) {
    const std::string out = r.string(root, top, "output");
    if (out.empty()) r.fail(top / "output", "must not be empty");
    cfg.output = out;
  } else {
    cfg.output = std::filesystem::path("runs") / std::filesystem::path(source).stem();
  }

  cfg.effective = std::move(root);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
  const std::string text = read_text(path);
  return parse_config(text, path.string(), path.parent_path(), seed_override);
}

Dataset load_dataset(const ExperimentConfig& config) {
  Dataset data;
  if (config.data.csv) {
    if (!std::filesystem::exists(*config.data.csv)) {
      throw InputError("dataset file not found: " + config.data.csv->string());
    }
    data = read_dataset_csv(*config.data.csv);
    data.classes = std::max(data.classes, config.net.classes);
  } else {
    data = synth_blobs(config.data.classes, config.data.per_class, config.net.input.size(),
                       config.data.spread, config.data.seed);
  }
  if (data.size() > 0 && data.dim != config.net.input.size()) {
    throw InputError("dataset has " + std::to_string(data.dim) + " features but the net expects " +
                     std::to_string(config.net.input.size()));
  }
  data.dim = config.net.input.size();
  if (data.classes > config.net.classes) throw InputError("dataset labels exceed net.classes");
  data.validate();
  return data;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  const char* root = std::getenv(kOutputRootEnv);
  if (root == nullptr || *root == '\0') return config.output;
  const std::filesystem::path rel =
      config.output.is_absolute() ? config.output.filename() : config.output;
  return std::filesystem::path(root) / rel;
}

std::string metrics_header() {
  return "epoch,loss,accuracy,mean_grad_norm,max_grad_norm,max_violation,lr";
}

std::string metrics_row(const EpochMetrics& m) {
  return std::to_string(m.epoch) + "," + fmt(m.loss) + "," + fmt(m.accuracy) + "," +
         fmt(m.mean_grad_norm) + "," + fmt(m.max_grad_norm) + "," + fmt(m.max_violation) + "," +
         fmt(m.lr);
}

RunResult run_experiment(const ExperimentConfig& config) {
  const Dataset data = load_dataset(config);
  const std::vector<LayerShape> shapes = resolve_shapes(config.net);

  RunResult run;
  run.dir = resolve_output_dir(config);
  std::filesystem::create_directories(run.dir);
  run.model = init_model(shapes, config.layouts, config.seed, config.lambda_momentum);

  write_text(run.dir / "config.json", config.effective.dump(2) + "\n");
  json layouts = json::array();
  for (const auto& layout : run.model.layouts) layouts.push_back(layout_to_json(layout));
  write_text(run.dir / "layout.json", layouts.dump(2) + "\n");

  std::ofstream metrics(run.dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!metrics) throw InputError("cannot write " + (run.dir / "metrics.csv").string());
  metrics << metrics_header() << '\n' << std::flush;

  OptState state = make_opt_state(run.model);
  for (std::size_t e = 0; e < config.optimizer.epochs; ++e) {
    const EpochMetrics m = train_epoch(run.model, state, config.optimizer, data, config.train);
    metrics << metrics_row(m) << '\n' << std::flush;
    run.metrics.push_back(m);
  }
  save_checkpoint(checkpoint_from_model(run.model, state.epoch(), config.effective), run.dir);
  return run;
}

GradcheckReport gradient_check(std::span<const LayerShape> shapes,
                               std::span<const std::vector<double>> batch,
                               std::span<const int> labels, std::uint64_t seed, std::size_t draws,
                               bool corrupt) {
  constexpr double kSteps[] = {1e-4, 1e-5, 1e-6};
  GradcheckReport report;
  for (double h : kSteps) report.sweep.push_back({h, 0.0});

  for (std::size_t draw = 0; draw < draws; ++draw) {
    NetWeights w = random_weights(shapes, seed + draw);
    NetWeights analytic = backward(shapes, w, forward(shapes, w, batch), labels);
    if (corrupt) {
      double& g = analytic.front().front()(0, 0);
      g = g * 1.5 + 1e-2;
    }
    for (std::size_t l = 0; l < w.size(); ++l)
      for (std::size_t k = 0; k < w[l].size(); ++k)
        for (std::size_t e = 0; e < w[l][k].size(); ++e) {
          if (draw == 0) ++report.coordinates;
          double& x = w[l][k].values()[e];
          const double a = analytic[l][k].values()[e];
          const double saved = x;
          for (auto& s : report.sweep) {
            x = saved + s.h;
            const double up = loss_at(shapes, w, batch, labels);
            x = saved - s.h;
            const double down = loss_at(shapes, w, batch, labels);
            x = saved;
            const double numeric = (up - down) / (2.0 * s.h);
            const double denom = std::max({std::abs(a), std::abs(numeric), kGradcheckFloor});
            s.max_rel_error = std::max(s.max_rel_error, std::abs(a - numeric) / denom);
          }
        }
  }
  for (const auto& s : report.sweep)
    if (s.h == 1e-5) report.max_rel_error = s.max_rel_error;
  return report;
}

json norm_report(const Checkpoint& ckpt) {
  json groups = json::array();
  bool pass = true;
  bool l2to1_pass = true;
  for (std::size_t l = 0; l < ckpt.layers.size(); ++l) {
    const auto& layer = ckpt.layers[l];
    for (std::size_t g = 0; g < layer.groups.size(); ++g) {
      json members = json::array();
      std::vector<Matrix> ms;
      for (const auto& m : layer.groups[g].members) {
        json entry = triple_json(norms_of(m.weight));
        entry["in"] = m.coord.in;
        entry["out"] = m.coord.out;
        entry["kind"] = std::string(to_string(m.spec.kind));
        members.push_back(std::move(entry));
        ms.push_back(m.weight);
      }
      const NormTriple concat = group_norms(ms);
      const NormCapFlags flags = check_norm_caps(concat);
      pass = pass && flags.frobenius && flags.spectral;
      l2to1_pass = l2to1_pass && flags.l2to1;
      groups.push_back({{"layer", layer.layer},
                        {"group", g},
                        {"members", members},
                        {"concatenated", triple_json(concat)},
                        {"flags",
                         {{"frobenius", flags.frobenius},
                          {"spectral", flags.spectral},
                          {"l2to1", flags.l2to1}}}});
    }
  }
  return {{"tolerance", kNormCapTolerance},
          {"groups", groups},
          {"pass", pass},
          {"l2to1_pass", l2to1_pass}};
}

json bounds_report(const Checkpoint& ckpt, std::size_t samples, double width) {
  const LayerDeltas d_f = deltas(ckpt, &NormTriple::frobenius);
  const LayerDeltas d_2 = deltas(ckpt, &NormTriple::spectral);
  const LayerDeltas d_21 = deltas(ckpt, &NormTriple::l2to1);
  return {{"layers", ckpt.layers.size()},
          {"samples", samples},
          {"width", width},
          {"neyshabur15", bound_neyshabur15(d_f, samples)},
          {"bartlett", bound_bartlett(d_2, d_21, samples)},
          {"neyshabur18", bound_neyshabur18(d_2, d_f, width, samples)}};
}

int cmd_train(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
              std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config, seed);
    const RunResult run = run_experiment(cfg);
    if (!run.metrics.empty()) {
      const EpochMetrics& last = run.metrics.back();
      out << "epochs " << run.metrics.size() << " loss " << fmt(last.loss) << " accuracy "
          << fmt(last.accuracy) << " max_violation " << fmt(last.max_violation) << '\n';
    }
    out << "run directory " << run.dir.string() << '\n';
    return kExitOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int cmd_gradcheck(const std::filesystem::path& config, std::ostream& out, std::ostream& err,
                  bool corrupt) {
  try {
    const ExperimentConfig cfg = load_config(config);
    const Dataset data = load_dataset(cfg);
    const std::vector<LayerShape> shapes = resolve_shapes(cfg.net);
    const std::size_t n = std::min<std::size_t>(data.size(), 8);
    if (n == 0) throw InputError("gradcheck needs at least one sample");
    const std::vector<std::vector<double>> batch(data.inputs.begin(),
                                                 data.inputs.begin() + static_cast<std::ptrdiff_t>(n));
    const std::vector<int> labels(data.labels.begin(),
                                  data.labels.begin() + static_cast<std::ptrdiff_t>(n));
    const GradcheckReport rep = gradient_check(shapes, batch, labels, cfg.seed, 10, corrupt);
    for (const auto& s : rep.sweep) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "h=%.0e max_rel_error=%.3e", s.h, s.max_rel_error);
      out << buf << '\n';
    }
    const bool pass = rep.max_rel_error < kGradcheckTolerance;
    char buf[128];
    std::snprintf(buf, sizeof buf, "coordinates=%zu draws=10 max_rel_error=%.3e tolerance=%.0e %s",
                  rep.coordinates, rep.max_rel_error, kGradcheckTolerance, pass ? "PASS" : "FAIL");
    out << buf << '\n';
    return pass ? kExitOk : kExitCheckFailed;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

int cmd_norms(const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& err) {
  try {
    const json report = norm_report(load_checkpoint(checkpoint));
    out << report.dump(2) << '\n';
    return report["pass"].get<bool>() ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

int cmd_bounds(const std::filesystem::path& checkpoint, std::size_t samples, double width,
               std::ostream& out, std::ostream& err) {
  try {
    if (samples == 0) throw InputError("--samples must be >= 1");
    if (!(width > 0.0)) throw InputError("--width must be positive");
    out << bounds_report(load_checkpoint(checkpoint), samples, width).dump(2) << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace fgsgd
