#include "fgsgd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

void OptConfig::validate() const {
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) throw ValueError("base_lr must be >= 0");
  if (!(schedule_decay > 0.0)) throw ValueError("schedule_decay must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValueError("momentum must lie in [0, 1)");
  if (!(euclid_decay > 0.0)) throw ValueError("euclid_decay must be positive");
  if (!(rho_bound >= 0.0)) throw ValueError("rho_bound must be >= 0");
}

double lr_schedule(std::size_t t, const OptConfig& config) {
  return config.base_lr / (1.0 + config.schedule_decay * static_cast<double>(t));
}

double regularizer(double grad_norm, double rho, double curvature) {
  const double r = grad_norm;
  const double gamma2 = std::max((2.0 * rho + r) * (2.0 * rho + r), 1.0 + curvature * (rho + r));
  const double gamma1 = r * r * gamma2;
  return std::sqrt(std::max(1.0, gamma1));
}

double sphere_regularizer(double grad_norm) {
  const double r = grad_norm;
  return std::sqrt(std::max(1.0, r * r * (2.0 + r) * (2.0 + r)));
}

RegularizerChoice choose_regularizer(std::span<const ManifoldSpec> specs,
                                     const OptConfig& config) {
  const bool sphere_like = std::all_of(specs.begin(), specs.end(), [](const ManifoldSpec& s) {
    return s.kind == ManifoldKind::sphere || s.kind == ManifoldKind::oblique;
  });
  if (sphere_like && !specs.empty()) return {RegularizerForm::sphere, 1.0, 1.0};

  const bool has_euclidean = std::any_of(specs.begin(), specs.end(), [](const ManifoldSpec& s) {
    return s.kind == ManifoldKind::euclidean;
  });
  double rho = config.rho_bound;
  if (!has_euclidean) {
    double budget = 0.0;
    for (const ManifoldSpec& s : specs) budget += s.frobenius_budget();
    rho = std::numbers::pi * std::sqrt(budget);
  }
  return {RegularizerForm::general, rho, curvature_bound(specs)};
}

double evaluate_regularizer(const RegularizerChoice& choice, double grad_norm) {
  return choice.form == RegularizerForm::sphere
             ? sphere_regularizer(grad_norm)
             : regularizer(grad_norm, choice.rho, choice.curvature);
}

Matrix apply_momentum(const Matrix& grad, Matrix& buffer, const OptConfig& config) {
  if (buffer.empty()) buffer = Matrix(grad.rows(), grad.cols());
  if (buffer.rows() != grad.rows() || buffer.cols() != grad.cols()) {
    throw ShapeError("apply_momentum: buffer shape does not match gradient");
  }
  buffer *= config.momentum;
  buffer -= grad * config.euclid_decay;
  return buffer;
}

StepReport fgsgd_step(const OptConfig& config, double lr, const ProductPoint& w,
                      std::span<const Matrix> euclid_grads, std::vector<Matrix>& momentum,
                      std::string_view group_name) {
  if (euclid_grads.size() != w.size()) {
    throw ShapeError("fgsgd_step: " + std::string(group_name) + " expects " +
                     std::to_string(w.size()) + " gradients, got " +
                     std::to_string(euclid_grads.size()));
  }
  for (const Matrix& g : euclid_grads) {
    if (!g.all_finite()) {
      throw NonFiniteGradientError(std::string(group_name),
                                   "fgsgd_step: non-finite gradient in " + std::string(group_name));
    }
  }
  if (momentum.size() != w.size()) momentum.assign(w.size(), Matrix());

  std::vector<Matrix> effective;
  effective.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    effective.push_back(-apply_momentum(euclid_grads[i], momentum[i], config));
  }

  ProductTangent grad = product_project(w, effective);
  const double r = product_grad_norm(grad);
  const double reg = evaluate_regularizer(choose_regularizer(w.specs, config), r);
  const double factor = -lr / reg;
  for (Matrix& part : grad.parts) part *= factor;

  StepReport report;
  report.grad_norm = r;
  report.regularizer = reg;
  report.step_norm = product_grad_norm(grad);
  report.point = product_retract(w, grad, config.map);
  return report;
}

}  // namespace fgsgd
