#include "core/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "core/error.hpp"
#include "core/strings.hpp"

namespace webprf::classifier {
namespace {

// log(1 + exp(-m)) for margin m, stable for large |m|.
double log1p_exp_neg(double m) {
  if (m > 0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// sigma(-m) = 1 / (1 + exp(m)), stable.
double sigma_neg(double m) {
  if (m >= 0) {
    double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class Solver {
 public:
  Solver(const Problem& p, const TrainConfig& cfg)
      : p_(p), cfg_(cfg), inv_c_(1.0 / cfg.regularization_strength), n_(p.dim + 1) {
    z_.resize(p.x.size());
    curvature_.resize(p.x.size());
  }

  // Objective at theta = (w, b); caches margins in z_.
  double evaluate(std::span<const double> theta) {
    std::span<const double> w = theta.first(p_.dim);
    double b = cfg_.fit_intercept ? theta[p_.dim] : 0.0;
    double f = 0.5 * inv_c_ * dot(w, w);
    for (std::size_t i = 0; i < p_.x.size(); ++i) {
      z_[i] = p_.x[i]->dot(w) + b;
      f += log1p_exp_neg(p_.y[i] * z_[i]);
    }
    return f;
  }

  // Gradient at the point last passed to evaluate(); also stores the
  // per-sample curvature sigma(z)(1 - sigma(z)).
  void grad(std::span<const double> theta, std::span<double> g) {
    for (std::size_t j = 0; j < p_.dim; ++j) g[j] = inv_c_ * theta[j];
    g[p_.dim] = 0.0;
    for (std::size_t i = 0; i < p_.x.size(); ++i) {
      double yi = p_.y[i];
      double s = sigma_neg(yi * z_[i]);  // sigma(-y z)
      double coef = -yi * s;
      for (const auto& e : p_.x[i]->entries) g[e.index] += coef * e.weight;
      g[p_.dim] += coef;
      curvature_[i] = s * (1.0 - s);
    }
    if (!cfg_.fit_intercept) g[p_.dim] = 0.0;
  }

  void hess_vec(std::span<const double> v, std::span<double> out) const {
    for (std::size_t j = 0; j < p_.dim; ++j) out[j] = inv_c_ * v[j];
    out[p_.dim] = 0.0;
    double vb = cfg_.fit_intercept ? v[p_.dim] : 0.0;
    for (std::size_t i = 0; i < p_.x.size(); ++i) {
      double xv = p_.x[i]->dot(v.first(p_.dim)) + vb;
      double coef = curvature_[i] * xv;
      for (const auto& e : p_.x[i]->entries) out[e.index] += coef * e.weight;
      out[p_.dim] += coef;
    }
    if (!cfg_.fit_intercept) {
      out[p_.dim] = 0.0;
    } else {
      // Keeps the system positive definite when every sample saturates.
      out[p_.dim] += 1e-12 * v[p_.dim];
    }
  }

  // Approximately solves H d = -g by conjugate gradient.
  void newton_direction(std::span<const double> g, std::span<double> d) {
    std::vector<double> r(n_), q(n_), hq(n_);
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t j = 0; j < n_; ++j) r[j] = -g[j];
    q = r;
    double rr = dot(r, r);
    double gnorm = std::sqrt(rr);
    double target = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    std::size_t max_cg = std::max<std::size_t>(50, std::min<std::size_t>(n_, 500));
    for (std::size_t k = 0; k < max_cg && std::sqrt(rr) > target; ++k) {
      hess_vec(q, hq);
      double qhq = dot(q, hq);
      if (qhq <= 0.0) break;
      double alpha = rr / qhq;
      for (std::size_t j = 0; j < n_; ++j) {
        d[j] += alpha * q[j];
        r[j] -= alpha * hq[j];
      }
      double rr_new = dot(r, r);
      double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t j = 0; j < n_; ++j) q[j] = r[j] + beta * q[j];
    }
    if (dot(d, d) == 0.0)
      for (std::size_t j = 0; j < n_; ++j) d[j] = -g[j];
  }

  RoutingModel run(std::string topic_id, TrainTrace* trace) {
    std::vector<double> theta(n_, 0.0), g(n_), d(n_), trial(n_);
    double f = evaluate(theta);
    grad(theta, g);
    if (trace) trace->objective.push_back(f);

    RoutingModel model;
    model.topic_id = std::move(topic_id);
    std::uint32_t it = 0;
    double gmax = max_abs(g);
    while (gmax > cfg_.tolerance && it < cfg_.max_iterations) {
      newton_direction(g, d);
      double slope = dot(g, d);
      if (slope >= 0.0) {
        for (std::size_t j = 0; j < n_; ++j) d[j] = -g[j];
        slope = -dot(g, g);
      }
      double step = 1.0;
      double f_new = f;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        for (std::size_t j = 0; j < n_; ++j) trial[j] = theta[j] + step * d[j];
        f_new = evaluate(trial);
        if (f_new <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      ++it;
      if (!accepted) {
        // No representable decrease left; the current point is the answer.
        evaluate(theta);
        break;
      }
      theta.swap(trial);
      f = f_new;
      grad(theta, g);
      gmax = max_abs(g);
      if (trace) trace->objective.push_back(f);
    }
    model.converged = gmax <= cfg_.tolerance;
    model.iterations_used = it;
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(p_.dim));
    model.intercept = cfg_.fit_intercept ? theta[p_.dim] : 0.0;
    if (trace) trace->final_gradient_norm = gmax;
    return model;
  }

 private:
  const Problem& p_;
  const TrainConfig& cfg_;
  double inv_c_;
  std::size_t n_;
  std::vector<double> z_;
  std::vector<double> curvature_;
};

void check_problem(const Problem& p) {
  if (p.x.size() != p.y.size()) throw TrainingError("sample and label counts differ");
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    if (p.y[i] == 1) {
      ++pos;
    } else if (p.y[i] == -1) {
      ++neg;
    } else {
      throw TrainingError("labels must be +1 or -1");
    }
    for (const auto& e : p.x[i]->entries) {
      if (!std::isfinite(e.weight)) throw TrainingError("non-finite feature value");
      if (e.index >= p.dim)
        throw TrainingError("feature index " + std::to_string(e.index) +
                            " outside the model dimension " + std::to_string(p.dim));
    }
  }
  if (pos == 0) throw TrainingError("no positive samples");
  if (neg == 0) throw TrainingError("no negative samples");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(regularization_strength > 0.0) || !std::isfinite(regularization_strength))
    throw ConfigError("regularization strength C must be a positive finite number");
}

Problem Problem::from_set(const features::LabeledSet& set, std::size_t dim) {
  Problem p;
  p.dim = dim;
  for (const auto& v : set.positives) {
    p.x.push_back(&v);
    p.y.push_back(1);
  }
  for (const auto& v : set.negatives) {
    p.x.push_back(&v);
    p.y.push_back(-1);
  }
  return p;
}

double objective(const Problem& p, std::span<const double> w, double b, double c) {
  double f = 0.5 / c * dot(w, w);
  for (std::size_t i = 0; i < p.x.size(); ++i)
    f += log1p_exp_neg(p.y[i] * (p.x[i]->dot(w) + b));
  return f;
}

void gradient(const Problem& p, std::span<const double> w, double b, double c,
              std::span<double> out) {
  for (std::size_t j = 0; j < p.dim; ++j) out[j] = w[j] / c;
  out[p.dim] = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    double yi = p.y[i];
    double coef = -yi * sigma_neg(yi * (p.x[i]->dot(w) + b));
    for (const auto& e : p.x[i]->entries) out[e.index] += coef * e.weight;
    out[p.dim] += coef;
  }
}

RoutingModel train(const Problem& problem, const TrainConfig& config, std::string topic_id,
                   TrainTrace* trace) {
  config.validate();
  check_problem(problem);
  Solver solver(problem, config);
  return solver.run(std::move(topic_id), trace);
}

RoutingModel train(const features::LabeledSet& set, std::size_t dim, const TrainConfig& config,
                   TrainTrace* trace) {
  if (set.positives.empty()) throw TrainingError("topic " + set.topic_id + ": no positive samples");
  if (set.negatives.empty()) throw TrainingError("topic " + set.topic_id + ": no negative samples");
  return train(Problem::from_set(set, dim), config, set.topic_id, trace);
}

double sigmoid(double z) {
  double p;
  if (z >= 0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    double e = std::exp(z);
    p = e / (1.0 + e);
  }
  constexpr double kHi = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), kHi);
}

double predict_probability(const RoutingModel& model, const features::SparseVector& x) {
  return sigmoid(x.dot(model.weights) + model.intercept);
}

// ---------------------------------------------------------------- I/O

void write_routing_model(const RoutingModel& model, std::ostream& out) {
  out << "webprf-routing-model v1\n"
      << "topic_id " << model.topic_id << '\n'
      << "dim " << model.weights.size() << '\n'
      << "intercept " << detail::shortest_double(model.intercept) << '\n'
      << "converged " << (model.converged ? 1 : 0) << '\n'
      << "iterations " << model.iterations_used << '\n'
      << "weights\n";
  for (double w : model.weights) out << detail::shortest_double(w) << '\n';
  if (!out) throw IoError("failed writing routing model");
}

RoutingModel read_routing_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw ParseError("routing model truncated after line " +
                                                  std::to_string(lineno));
    ++lineno;
    return line;
  };
  auto field = [&](std::string_view key) -> std::string {
    std::string l = next();
    if (l.rfind(std::string(key) + " ", 0) != 0)
      throw ParseError(lineno, "expected '" + std::string(key) + "'");
    return l.substr(key.size() + 1);
  };
  if (next() != "webprf-routing-model v1") throw ParseError(lineno, "unsupported model format");
  RoutingModel m;
  m.topic_id = field("topic_id");
  auto dim = detail::parse_number<std::size_t>(field("dim"));
  if (!dim) throw ParseError(lineno, "bad dim");
  auto b = detail::parse_number<double>(field("intercept"));
  if (!b) throw ParseError(lineno, "bad intercept");
  m.intercept = *b;
  std::string conv = field("converged");
  if (conv != "0" && conv != "1") throw ParseError(lineno, "converged must be 0 or 1");
  m.converged = conv == "1";
  auto iters = detail::parse_number<std::uint32_t>(field("iterations"));
  if (!iters) throw ParseError(lineno, "bad iterations");
  m.iterations_used = *iters;
  if (next() != "weights") throw ParseError(lineno, "expected 'weights'");
  m.weights.reserve(*dim);
  for (std::size_t i = 0; i < *dim; ++i) {
    auto w = detail::parse_number<double>(detail::trim(next()));
    if (!w) throw ParseError(lineno, "bad weight");
    m.weights.push_back(*w);
  }
  return m;
}

}  // namespace webprf::classifier
