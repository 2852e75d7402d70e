#include "fgsgd/tinynet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    p[k] = std::exp(z[k] - m);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

void conv_forward(const LayerShape& s, const LayerWeights& w, const std::vector<double>& x,
                  std::vector<double>& y) {
  const std::size_t ih = s.in.height, iw = s.in.width;
  const std::size_t oh = s.out.height, ow = s.out.width;
  y.assign(s.out.size(), 0.0);
  for (std::size_t d = 0; d < s.out_channels; ++d)
    for (std::size_t c = 0; c < s.in_channels; ++c) {
      const Matrix& k = w[s.index(c, d)];
      const double* xc = x.data() + c * ih * iw;
      double* yd = y.data() + d * oh * ow;
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = 0.0;
          for (std::size_t p = 0; p < s.kernel_rows; ++p)
            for (std::size_t q = 0; q < s.kernel_cols; ++q)
              acc += k(p, q) * xc[(i * s.stride + p) * iw + (j * s.stride + q)];
          yd[i * ow + j] += acc;
        }
    }
}

void dense_forward(const LayerShape& s, const LayerWeights& w, const std::vector<double>& x,
                   std::vector<double>& y) {
  y.assign(s.out_channels, 0.0);
  for (std::size_t d = 0; d < s.out_channels; ++d) {
    const Matrix& k = w[d];
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += k(i, 0) * x[i];
    y[d] = acc;
  }
}

// Accumulates dW and (optionally) dx for one sample.
void conv_backward(const LayerShape& s, const LayerWeights& w, const std::vector<double>& x,
                   const std::vector<double>& dy, LayerWeights& dw, std::vector<double>* dx) {
  const std::size_t ih = s.in.height, iw = s.in.width;
  const std::size_t oh = s.out.height, ow = s.out.width;
  for (std::size_t d = 0; d < s.out_channels; ++d)
    for (std::size_t c = 0; c < s.in_channels; ++c) {
      const Matrix& k = w[s.index(c, d)];
      Matrix& g = dw[s.index(c, d)];
      const double* xc = x.data() + c * ih * iw;
      const double* dyd = dy.data() + d * oh * ow;
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const double delta = dyd[i * ow + j];
          if (delta == 0.0) continue;
          for (std::size_t p = 0; p < s.kernel_rows; ++p)
            for (std::size_t q = 0; q < s.kernel_cols; ++q) {
              const std::size_t at = (i * s.stride + p) * iw + (j * s.stride + q);
              g(p, q) += delta * xc[at];
              if (dx) (*dx)[c * ih * iw + at] += delta * k(p, q);
            }
        }
    }
}

void dense_backward(const LayerShape& s, const LayerWeights& w, const std::vector<double>& x,
                    const std::vector<double>& dy, LayerWeights& dw, std::vector<double>* dx) {
  for (std::size_t d = 0; d < s.out_channels; ++d) {
    const double delta = dy[d];
    if (delta == 0.0) continue;
    Matrix& g = dw[d];
    for (std::size_t i = 0; i < x.size(); ++i) g(i, 0) += delta * x[i];
    if (dx) {
      const Matrix& k = w[d];
      for (std::size_t i = 0; i < x.size(); ++i) (*dx)[i] += delta * k(i, 0);
    }
  }
}

void require_weights(std::span<const LayerShape> shapes, const NetWeights& weights) {
  if (weights.size() != shapes.size()) throw ShapeError("net: weight/layer count mismatch");
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    if (weights[l].size() != s.kernel_count()) {
      throw ShapeError("net: layer " + std::to_string(l) + " has wrong kernel count");
    }
    for (const Matrix& k : weights[l]) {
      if (k.rows() != s.kernel_rows || k.cols() != s.kernel_cols) {
        throw ShapeError("net: layer " + std::to_string(l) + " kernel shape mismatch");
      }
    }
  }
}

}  // namespace

LayerGeometry LayerShape::geometry() const {
  if (dense) return {in.size(), out_channels};
  return {in_channels * kernel_rows * kernel_cols, out.height * out.width * out_channels};
}

std::vector<LayerShape> resolve_shapes(const NetSpec& net) {
  if (net.classes < 2) throw ValueError("net: need at least 2 classes");
  if (net.layers.empty()) throw ValueError("net: no layers");
  if (net.input.size() == 0) throw ShapeError("net: empty input shape");
  std::vector<LayerShape> shapes;
  TensorShape cur = net.input;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    LayerShape s;
    s.in = cur;
    if (const auto* dense = std::get_if<DenseLayer>(&net.layers[l])) {
      if (dense->out == 0) throw ShapeError("net: dense layer with zero outputs");
      s.dense = true;
      s.in_channels = 1;
      s.out_channels = dense->out;
      s.kernel_rows = cur.size();
      s.kernel_cols = 1;
      s.out = {dense->out, 1, 1};
    } else {
      const auto& conv = std::get<Conv2dLayer>(net.layers[l]);
      if (conv.out_channels == 0 || conv.kernel_h == 0 || conv.kernel_w == 0 || conv.stride == 0) {
        throw ShapeError("net: conv layer " + std::to_string(l) + " has a zero dimension");
      }
      if (conv.kernel_h > cur.height || conv.kernel_w > cur.width) {
        throw ShapeError("net: conv layer " + std::to_string(l) + " kernel larger than input");
      }
      s.in_channels = cur.channels;
      s.out_channels = conv.out_channels;
      s.kernel_rows = conv.kernel_h;
      s.kernel_cols = conv.kernel_w;
      s.stride = conv.stride;
      s.out = {conv.out_channels, (cur.height - conv.kernel_h) / conv.stride + 1,
               (cur.width - conv.kernel_w) / conv.stride + 1};
    }
    cur = s.out;
    shapes.push_back(s);
  }
  if (cur.size() != net.classes) {
    throw ShapeError("net: final layer emits " + std::to_string(cur.size()) + " values for " +
                     std::to_string(net.classes) + " classes");
  }
  return shapes;
}

NetWeights zero_weights(std::span<const LayerShape> shapes) {
  NetWeights w;
  for (const LayerShape& s : shapes)
    w.emplace_back(s.kernel_count(), Matrix(s.kernel_rows, s.kernel_cols));
  return w;
}

NetWeights random_weights(std::span<const LayerShape> shapes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetWeights w;
  for (const LayerShape& s : shapes) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(s.geometry().fan_in));
    LayerWeights layer;
    for (std::size_t i = 0; i < s.kernel_count(); ++i)
      layer.push_back(random_gaussian(s.kernel_rows, s.kernel_cols, rng) * scale);
    w.push_back(std::move(layer));
  }
  return w;
}

ForwardResult forward(std::span<const LayerShape> shapes, const NetWeights& weights,
                      std::span<const std::vector<double>> batch) {
  require_weights(shapes, weights);
  const std::size_t n = batch.size();
  ForwardResult res;
  res.cache.inputs.resize(shapes.size());
  res.cache.preact.resize(shapes.size());
  res.channel_std.resize(shapes.size());

  std::vector<std::vector<double>> cur(batch.begin(), batch.end());
  for (const auto& x : cur) {
    if (x.size() != shapes.front().in.size()) {
      throw ShapeError("forward: sample has " + std::to_string(x.size()) + " features, expected " +
                       std::to_string(shapes.front().in.size()));
    }
  }

  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    // Feature statistics of the channels entering this layer.
    const std::size_t stat_channels = s.dense ? 1 : s.in.channels;
    const std::size_t per_channel = s.in.size() / stat_channels;
    std::vector<double> values;
    for (std::size_t c = 0; c < stat_channels; ++c) {
      values.clear();
      for (const auto& x : cur)
        values.insert(values.end(), x.begin() + static_cast<std::ptrdiff_t>(c * per_channel),
                      x.begin() + static_cast<std::ptrdiff_t>((c + 1) * per_channel));
      res.channel_std[l].push_back(population_std(values));
    }

    std::vector<std::vector<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (s.dense) {
        dense_forward(s, weights[l], cur[i], out[i]);
      } else {
        conv_forward(s, weights[l], cur[i], out[i]);
      }
    }
    res.cache.inputs[l] = std::move(cur);
    res.cache.preact[l] = out;
    if (l + 1 < shapes.size()) {
      for (auto& v : out)
        for (double& e : v) e = std::max(0.0, e);
    }
    cur = std::move(out);
  }
  res.logits = std::move(cur);
  return res;
}

LossStats softmax_cross_entropy(std::span<const std::vector<double>> logits,
                                std::span<const int> labels) {
  if (logits.size() != labels.size()) throw ShapeError("loss: logits/labels size mismatch");
  LossStats stats;
  if (logits.empty()) return stats;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const auto& z = logits[i];
    const auto y = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || y >= z.size()) throw ValueError("loss: label out of range");
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    stats.loss += (m + std::log(sum)) - z[y];
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    if (best == y) ++stats.correct;
  }
  stats.loss /= static_cast<double>(logits.size());
  return stats;
}

NetWeights backward(std::span<const LayerShape> shapes, const NetWeights& weights,
                    const ForwardResult& fwd, std::span<const int> labels) {
  require_weights(shapes, weights);
  const std::size_t n = fwd.logits.size();
  if (labels.size() != n) throw ShapeError("backward: labels do not match cached batch");
  if (fwd.cache.inputs.size() != shapes.size()) throw ShapeError("backward: stale cache");

  NetWeights grads = zero_weights(shapes);
  if (n == 0) return grads;

  std::vector<std::vector<double>> delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    delta[i] = softmax(fwd.logits[i]);
    delta[i][static_cast<std::size_t>(labels[i])] -= 1.0;
    for (double& v : delta[i]) v /= static_cast<double>(n);
  }

  for (std::size_t l = shapes.size(); l-- > 0;) {
    const LayerShape& s = shapes[l];
    const auto& inputs = fwd.cache.inputs[l];
    if (inputs.size() != n || fwd.cache.preact[l].size() != n) {
      throw ShapeError("backward: stale cache at layer " + std::to_string(l));
    }
    std::vector<std::vector<double>> dx(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (delta[i].size() != s.out.size() || inputs[i].size() != s.in.size()) {
        throw ShapeError("backward: stale cache at layer " + std::to_string(l));
      }
      std::vector<double>* dxi = nullptr;
      if (l > 0) {
        dx[i].assign(s.in.size(), 0.0);
        dxi = &dx[i];
      }
      if (s.dense) {
        dense_backward(s, weights[l], inputs[i], delta[i], grads[l], dxi);
      } else {
        conv_backward(s, weights[l], inputs[i], delta[i], grads[l], dxi);
      }
    }
    if (l > 0) {
      // Through the ReLU that produced this layer's input.
      const auto& pre = fwd.cache.preact[l - 1];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dx[i].size(); ++k)
          if (pre[i][k] <= 0.0) dx[i][k] = 0.0;
      delta = std::move(dx);
    }
  }
  return grads;
}

double loss_at(std::span<const LayerShape> shapes, const NetWeights& weights,
               std::span<const std::vector<double>> batch, std::span<const int> labels) {
  return softmax_cross_entropy(forward(shapes, weights, batch).logits, labels).loss;
}

void Dataset::validate() const {
  if (inputs.size() != labels.size()) throw InputError("dataset: inputs/labels length mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != dim) {
      throw InputError("dataset: sample " + std::to_string(i) + " has " +
                       std::to_string(inputs[i].size()) + " features, expected " +
                       std::to_string(dim));
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw InputError("dataset: label out of range at sample " + std::to_string(i));
    }
  }
}

Dataset synth_blobs(std::size_t classes, std::size_t n_per_class, std::size_t dim, double spread,
                    std::uint64_t seed) {
  if (classes < 2) throw ValueError("synth_blobs: need at least 2 classes");
  if (dim == 0) throw ValueError("synth_blobs: dim must be positive");
  if (!(spread >= 0.0)) throw ValueError("synth_blobs: spread must be >= 0");

  std::mt19937_64 rng(seed);
  const double radius = 3.0 * spread;

  std::vector<std::vector<double>> means(classes, std::vector<double>(dim, 0.0));
  if (classes <= dim) {
    const Matrix basis = qr_orthonormal(random_gaussian(dim, classes, rng));
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        double centroid = 0.0;
        for (std::size_t j = 0; j < classes; ++j) centroid += basis(i, j);
        means[k][i] = basis(i, k) - centroid / static_cast<double>(classes);
      }
    }
  } else {
    for (auto& m : means) {
      const Matrix g = random_gaussian(dim, 1, rng);
      for (std::size_t i = 0; i < dim; ++i) m[i] = g(i, 0);
    }
  }
  for (auto& m : means) {
    double n2 = 0.0;
    for (double v : m) n2 += v * v;
    const double s = n2 > 0.0 ? radius / std::sqrt(n2) : 0.0;
    for (double& v : m) v *= s;
  }

  Dataset data;
  data.dim = dim;
  data.classes = classes;
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < classes; ++k)
    for (std::size_t n = 0; n < n_per_class; ++n) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = means[k][i] + spread * gauss(rng);
      data.inputs.push_back(std::move(x));
      data.labels.push_back(static_cast<int>(k));
    }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write dataset " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.inputs[i]) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, res.ptr - buf);
      out.put(',');
    }
    out << data.labels[i] << '\n';
  }
  if (!out) throw InputError("failed writing dataset " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const char* first = line.data() + pos;
      const char* last = line.data() + end;
      while (first < last && *first == ' ') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad number");
      }
      fields.push_back(v);
      pos = end + 1;
    }
    if (fields.size() < 2) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": need features and label");
    }
    const double label = fields.back();
    if (label < 0 || label != std::floor(label)) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad label");
    }
    fields.pop_back();
    if (data.inputs.empty()) {
      data.dim = fields.size();
    } else if (fields.size() != data.dim) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(data.dim) + " features");
    }
    data.inputs.push_back(std::move(fields));
    data.labels.push_back(static_cast<int>(label));
    max_label = std::max(max_label, static_cast<int>(label));
  }
  data.classes = static_cast<std::size_t>(std::max(2, max_label + 1));
  return data;
}

}  // namespace fgsgd
