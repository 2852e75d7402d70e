#include "fgsgd/normbounds.hpp"

#include <cmath>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

void require_layers(const LayerDeltas& a, const LayerDeltas& b, const char* what) {
  if (a.size() != b.size()) throw ShapeError(std::string(what) + ": layer counts differ");
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].size() != b[l].size()) {
      throw ShapeError(std::string(what) + ": group counts differ at layer " + std::to_string(l));
    }
  }
}

double product_of(const LayerDeltas& d) {
  double p = 1.0;
  for (const auto& layer : d)
    for (double v : layer) p *= v;
  return p;
}

double inv_sqrt_samples(std::size_t samples) {
  if (samples == 0) throw ValueError("bound: sample count must be >= 1");
  return 1.0 / std::sqrt(static_cast<double>(samples));
}

}  // namespace

double frobenius(const Matrix& m) { return m.frobenius_norm(); }

double spectral(const Matrix& m) { return top_singular_value(m); }

double l2to1(const Matrix& m) {
  double total = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * m(r, c);
    total += std::sqrt(s);
  }
  return total;
}

NormTriple norms_of(const Matrix& m) { return {frobenius(m), spectral(m), l2to1(m)}; }

Matrix concatenate_columns(std::span<const Matrix> members) {
  if (members.empty()) throw ShapeError("concatenate_columns: no members");
  const std::size_t rows = members.front().rows();
  std::size_t cols = 0;
  for (const Matrix& m : members) {
    if (m.rows() != rows) throw ShapeError("concatenate_columns: row counts differ");
    cols += m.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Matrix& m : members) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) out(r, offset + c) = m(r, c);
    offset += m.cols();
  }
  return out;
}

NormTriple group_norms(std::span<const Matrix> members) {
  return norms_of(concatenate_columns(members));
}

NormCapFlags check_norm_caps(const NormTriple& group) {
  constexpr double limit = 1.0 + kNormCapTolerance;
  return {group.frobenius <= limit, group.spectral <= limit, group.l2to1 <= limit};
}

NormCapFlags check_norm_caps(std::span<const Matrix> rescaled_members) {
  return check_norm_caps(group_norms(rescaled_members));
}

double bound_neyshabur15(const LayerDeltas& delta_f, std::size_t samples) {
  const double layers = static_cast<double>(delta_f.size());
  return std::pow(2.0, layers) * product_of(delta_f) * inv_sqrt_samples(samples);
}

double bound_bartlett(const LayerDeltas& delta_2, const LayerDeltas& delta_2to1,
                      std::size_t samples) {
  require_layers(delta_2, delta_2to1, "bound_bartlett");
  const double spectral_product = product_of(delta_2);
  const double scale = inv_sqrt_samples(samples);
  if (spectral_product == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t l = 0; l < delta_2.size(); ++l) {
    double p = 1.0;
    for (std::size_t g = 0; g < delta_2[l].size(); ++g)
      p *= std::pow(delta_2to1[l][g] / delta_2[l][g], 2.0 / 3.0);
    sum += p;
  }
  return spectral_product * scale * std::pow(sum, 1.5);
}

double bound_neyshabur18(const LayerDeltas& delta_2, const LayerDeltas& delta_f, double width,
                         std::size_t samples) {
  require_layers(delta_2, delta_f, "bound_neyshabur18");
  if (!(width > 0.0)) throw ValueError("bound_neyshabur18: width must be positive");
  const double spectral_product = product_of(delta_2);
  const double scale = inv_sqrt_samples(samples);
  if (spectral_product == 0.0) return 0.0;
  const double layers = static_cast<double>(delta_2.size());
  double sum = 0.0;
  for (std::size_t l = 0; l < delta_2.size(); ++l) {
    double p = 1.0;
    for (std::size_t g = 0; g < delta_2[l].size(); ++g) {
      const double ratio = delta_f[l][g] / delta_2[l][g];
      p *= ratio * ratio;
    }
    sum += p;
  }
  return spectral_product * scale * std::sqrt(layers * layers * width * sum);
}

}  // namespace fgsgd
