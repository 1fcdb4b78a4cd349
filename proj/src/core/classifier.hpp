#pragma once

// Per-topic routing profiles: L2-regularized logistic regression.
//
// Minimizes  f(w, b) = 1/(2C) ||w||^2 + sum_i log(1 + exp(-y_i (w.x_i + b)))
// with labels y in {-1, +1} and an unregularized intercept b. The solver is
// a truncated Newton method (conjugate gradient on Hessian-vector products)
// with Armijo backtracking, so f never increases between iterations. It
// stops once max |grad f| <= tolerance.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "core/features.hpp"

namespace webprf::classifier {

struct TrainConfig {
  double tolerance = 1e-4;
  std::uint32_t max_iterations = 200000;
  double regularization_strength = 1.0;  // C
  bool fit_intercept = true;

  void validate() const;
};

struct RoutingModel {
  std::string topic_id;
  std::vector<double> weights;
  double intercept = 0.0;
  bool converged = false;
  std::uint32_t iterations_used = 0;

  bool operator==(const RoutingModel&) const = default;
};

// Training data as borrowed vectors; they must outlive the call.
struct Problem {
  std::size_t dim = 0;
  std::vector<const features::SparseVector*> x;
  std::vector<int> y;  // +1 / -1

  static Problem from_set(const features::LabeledSet& set, std::size_t dim);
};

double objective(const Problem& p, std::span<const double> w, double b, double c);
// Writes dim + 1 entries: the weight gradient followed by d/db.
void gradient(const Problem& p, std::span<const double> w, double b, double c,
              std::span<double> out);

struct TrainTrace {
  std::vector<double> objective;  // value after each accepted iteration, [0] = start
  double final_gradient_norm = 0.0;  // max norm
};

RoutingModel train(const Problem& problem, const TrainConfig& config, std::string topic_id,
                   TrainTrace* trace = nullptr);
RoutingModel train(const features::LabeledSet& set, std::size_t dim, const TrainConfig& config,
                   TrainTrace* trace = nullptr);

// sigma(z) without overflow, clamped into the open interval (0, 1).
double sigmoid(double z);
double predict_probability(const RoutingModel& model, const features::SparseVector& x);

// Text format:
//   webprf-routing-model v1
//   topic_id <id>
//   dim <V>
//   intercept <b>
//   converged <0|1>
//   iterations <n>
//   weights
//   <w_0>
//   ...
void write_routing_model(const RoutingModel& model, std::ostream& out);
RoutingModel read_routing_model(std::istream& in);

}  // namespace webprf::classifier
