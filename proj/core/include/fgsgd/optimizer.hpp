#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fgsgd/manifolds.hpp"
#include "fgsgd/pom.hpp"

namespace fgsgd {

struct OptConfig {
  double base_lr = 0.1;         // eta_0
  double schedule_decay = 0.01; // kappa
  double momentum = 0.9;        // theta_mu
  double euclid_decay = 0.9;    // theta_E
  std::size_t epochs = 10;
  MapKind map = MapKind::retraction;
  double rho_bound = 1.0;  // geodesic-distance surrogate for groups with Euclidean parts

  void validate() const;
};

// r(t) = eta_0 / (1 + kappa t).
double lr_schedule(std::size_t t, const OptConfig& config);

/// Step-size regularizer max{1, R^2 Gamma_2}^(1/2) with
/// Gamma_2 = max{(2 rho + R)^2, 1 + c (rho + R)}.
double regularizer(double grad_norm, double rho, double curvature);

// Sphere-product special case max{1, R^2 (2 + R)^2}^(1/2).
double sphere_regularizer(double grad_norm);

enum class RegularizerForm { sphere, general };

struct RegularizerChoice {
  RegularizerForm form = RegularizerForm::sphere;
  double rho = 0.0;
  double curvature = 0.0;
};

/// Sphere/oblique-only products use the sphere form. Otherwise the general form with
/// curvature = curvature_bound(specs) and rho = pi * sqrt(sum of Frobenius budgets)
/// (the diameter of the enclosing sphere), or config.rho_bound if any component is Euclidean.
RegularizerChoice choose_regularizer(std::span<const ManifoldSpec> specs, const OptConfig& config);

double evaluate_regularizer(const RegularizerChoice& choice, double grad_norm);

/// buffer <- theta_mu * buffer - theta_E * grad; returns the updated buffer.
/// An empty buffer is treated as zero.
Matrix apply_momentum(const Matrix& grad, Matrix& buffer, const OptConfig& config);

struct StepReport {
  ProductPoint point;
  double grad_norm = 0.0;    // R of the projected product gradient
  double regularizer = 1.0;  // r(R, rho, c) >= 1
  double step_norm = 0.0;    // |v| = lr * R / regularizer
};

/// One FG-SGD update of a single group:
///   1. momentum/decay on the Euclidean gradients, effective gradient = -buffer
///   2. projection onto the product tangent space
///   3. R from the Pythagorean product norm
///   4. v = -(lr / r(R)) * grad
///   5. component-wise retraction (or exponential map)
///
/// `momentum` holds one buffer per component and is updated in place.
/// Throws NonFiniteGradientError naming `group_name` on NaN/Inf gradients.
StepReport fgsgd_step(const OptConfig& config, double lr, const ProductPoint& w,
                      std::span<const Matrix> euclid_grads, std::vector<Matrix>& momentum,
                      std::string_view group_name = "group");

/// Mutable optimizer state: schedule counter and per-group momentum buffers.
class OptState {
 public:
  explicit OptState(std::size_t group_count = 0) : buffers_(group_count) {}

  std::size_t epoch() const noexcept { return epoch_; }
  void advance_epoch() noexcept { ++epoch_; }
  void set_epoch(std::size_t t) noexcept { epoch_ = t; }

  std::size_t group_count() const noexcept { return buffers_.size(); }
  std::vector<Matrix>& buffers(std::size_t group) { return buffers_.at(group); }
  const std::vector<Matrix>& buffers(std::size_t group) const { return buffers_.at(group); }

 private:
  std::size_t epoch_ = 0;
  std::vector<std::vector<Matrix>> buffers_;
};

}  // namespace fgsgd
