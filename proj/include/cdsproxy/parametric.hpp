#pragma once

// Logistic regression (one binary fit per class) and a single-hidden-layer
// neural network with softmax output.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cdsproxy/core.hpp"
#include "cdsproxy/numerics.hpp"
#include "cdsproxy/random.hpp"

namespace cdsproxy {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline Vector softmax(const VectorRef& logits) {
  const Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticOptions {
  double penalty = 1e-4;       // lambda on the slopes, intercept unpenalized
  std::size_t max_iterations = 100;
  double tolerance = 1e-8;     // on the gradient norm, scaled by max(1, n)
};

struct LogisticFit {
  Vector beta;                 // intercept first
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

/// sum_i [y log p + (1 - y) log(1 - p)] - lambda |beta_{1:d}|^2
inline double logistic_objective(const SampleMatrix& x, const std::vector<int>& y, const VectorRef& beta,
                                 double penalty) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z = beta(0) + x.row(i).dot(beta.tail(beta.size() - 1));
    ll += y[static_cast<std::size_t>(i)] ? -softplus(-z) : -softplus(z);
  }
  return ll - penalty * beta.tail(beta.size() - 1).squaredNorm();
}

inline Vector logistic_gradient(const SampleMatrix& x, const std::vector<int>& y, const VectorRef& beta,
                                double penalty) {
  const auto d = x.cols();
  Vector g = Vector::Zero(d + 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double r = y[static_cast<std::size_t>(i)] - sigmoid(beta(0) + x.row(i).dot(beta.tail(d)));
    g(0) += r;
    g.tail(d) += r * x.row(i).transpose();
  }
  g.tail(d) -= 2.0 * penalty * beta.tail(d);
  return g;
}

/// Penalized maximum likelihood by Newton's method with step halving.
inline LogisticFit fit_logistic_binary(const SampleMatrix& x, const std::vector<int>& y,
                                       const LogisticOptions& options = {}) {
  require_dimension(x.rows(), static_cast<Eigen::Index>(y.size()), "fit_logistic_binary");
  bool pos = false, neg = false;
  for (int v : y) {
    if (v == 1) pos = true;
    else if (v == 0) neg = true;
    else fail(ErrorCode::BadArgument, "logistic labels must be 0 or 1");
  }
  if (!pos || !neg) fail(ErrorCode::SingleClassInput, "logistic regression needs both labels");
  if (options.penalty < 0.0) fail(ErrorCode::BadArgument, "penalty must be non-negative");

  const auto n = x.rows(), d = x.cols();
  Matrix design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = x;
  const double tol = options.tolerance * std::max<double>(1.0, static_cast<double>(n));

  LogisticFit fit;
  fit.beta = Vector::Zero(d + 1);
  double objective = logistic_objective(x, y, fit.beta, options.penalty);
  for (;;) {
    const Vector g = logistic_gradient(x, y, fit.beta, options.penalty);
    fit.gradient_norm = g.norm();
    if (fit.gradient_norm <= tol) return fit;
    if (fit.iterations >= options.max_iterations) {
      fail(ErrorCode::NoConvergence, "logistic Newton iterations hit the cap");
    }
    ++fit.iterations;
    const Vector z = design * fit.beta;
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = sigmoid(z(i));
      w(i) = p * (1.0 - p);
    }
    Matrix h = design.transpose() * w.asDiagonal() * design;
    h.diagonal().tail(d).array() += 2.0 * options.penalty;
    const Vector step = h.ldlt().solve(g);
    if (!step.allFinite()) fail(ErrorCode::NoConvergence, "logistic Hessian is singular");

    double t = 1.0;
    for (;;) {
      const Vector candidate = fit.beta + t * step;
      const double value = logistic_objective(x, y, candidate, options.penalty);
      if (value >= objective) {
        fit.beta = candidate;
        objective = value;
        break;
      }
      t *= 0.5;
      if (t < 1e-10) {
        // No ascent along the Newton direction: stationary to working precision.
        if (fit.gradient_norm <= tol * 1e4) return fit;
        fail(ErrorCode::NoConvergence, "logistic line search failed");
      }
    }
  }
}

class LogisticClassifier final : public Classifier {
 public:
  LogisticClassifier(const Dataset& train, const LogisticOptions& options) {
    validate_dataset(train);
    dimension_ = train.dimension();
    for (std::size_t j = 0; j < train.class_count(); ++j) {
      std::vector<int> y(train.size());
      for (std::size_t i = 0; i < train.size(); ++i) y[i] = train.y[i] == j ? 1 : 0;
      betas_.push_back(fit_logistic_binary(train.x, y, options).beta);
    }
  }

  // p(x, beta_j) per class
  Vector scores(const VectorRef& x) const override {
    require_dimension(dimension_, x.size(), "logistic_scores");
    Vector out(static_cast<Eigen::Index>(betas_.size()));
    for (std::size_t j = 0; j < betas_.size(); ++j) {
      out(static_cast<Eigen::Index>(j)) = sigmoid(betas_[j](0) + x.dot(betas_[j].tail(dimension_)));
    }
    return out;
  }
  Eigen::Index dimension() const override { return dimension_; }
  std::size_t class_count() const override { return betas_.size(); }
  std::string family() const override { return "LR"; }
  const std::vector<Vector>& coefficients() const { return betas_; }

 private:
  Eigen::Index dimension_ = 0;
  std::vector<Vector> betas_;
};

inline std::unique_ptr<LogisticClassifier> fit_logistic(const Dataset& train, const LogisticOptions& options = {}) {
  return std::make_unique<LogisticClassifier>(train, options);
}

// ---------------------------------------------------------------------------
// Neural network

enum class Activation { TanSigmoid, Linear, ElliotSigmoid };

inline double activate(Activation f, double a) {
  switch (f) {
    case Activation::TanSigmoid:
      return std::tanh(a);
    case Activation::Linear:
      return a;
    case Activation::ElliotSigmoid:
      return a / (1.0 + std::abs(a));
  }
  return a;
}

inline double activation_derivative(Activation f, double a) {
  switch (f) {
    case Activation::TanSigmoid: {
      const double t = std::tanh(a);
      return 1.0 - t * t;
    }
    case Activation::Linear:
      return 1.0;
    case Activation::ElliotSigmoid: {
      const double s = 1.0 + std::abs(a);
      return 1.0 / (s * s);
    }
  }
  return 1.0;
}

struct NeuralNet {
  Matrix w1;  // h x d
  Vector b1;
  Matrix w2;  // K x h
  Vector b2;
  Activation activation = Activation::TanSigmoid;

  Eigen::Index inputs() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }
  Eigen::Index outputs() const { return w2.rows(); }
  Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  static NeuralNet zeros(Eigen::Index d, Eigen::Index h, Eigen::Index k, Activation f) {
    return {Matrix::Zero(h, d), Vector::Zero(h), Matrix::Zero(k, h), Vector::Zero(k), f};
  }

  // Order: w1 (column-major), b1, w2 (column-major), b2.
  Vector flatten() const {
    Vector out(parameter_count());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
      out.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
      at += m.size();
    };
    put(w1);
    put(b1);
    put(w2);
    put(b2);
    return out;
  }

  void assign(const VectorRef& flat) {
    require_dimension(parameter_count(), flat.size(), "NeuralNet::assign");
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
      Eigen::Map<Vector>(m.data(), m.size()) = flat.segment(at, m.size());
      at += m.size();
    };
    take(w1);
    take(b1);
    take(w2);
    take(b2);
  }
};

/// Class probabilities softmax(W2 f(W1 x + b1) + b2).
inline Vector nn_forward(const NeuralNet& net, const VectorRef& x) {
  require_dimension(net.inputs(), x.size(), "nn_forward");
  Vector a = net.w1 * x + net.b1;
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = activate(net.activation, a(i));
  return softmax(net.w2 * a + net.b2);
}

namespace detail {

struct NnPass {
  Matrix pre;    // n x h
  Matrix hid;    // n x h
  Matrix prob;   // n x K
  double loss = 0.0;
};

inline NnPass nn_pass(const NeuralNet& net, const SampleMatrix& x, const std::vector<std::size_t>& y) {
  require_dimension(net.inputs(), x.cols(), "nn_loss");
  NnPass p;
  p.pre = (x * net.w1.transpose()).rowwise() + net.b1.transpose();
  p.hid = p.pre.unaryExpr([f = net.activation](double a) { return activate(f, a); });
  Matrix logits = (p.hid * net.w2.transpose()).rowwise() + net.b2.transpose();
  const Vector peak = logits.rowwise().maxCoeff();
  logits.colwise() -= peak;
  p.prob = logits.array().exp();
  const Vector total = p.prob.rowwise().sum();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    p.prob.row(i) /= total(i);
    loss -= logits(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) - std::log(total(i));
  }
  p.loss = loss / static_cast<double>(x.rows());
  return p;
}

}  // namespace detail

/// Mean cross-entropy -1/n sum_i log pi_{y_i}(x_i).
inline double nn_loss(const NeuralNet& net, const SampleMatrix& x, const std::vector<std::size_t>& y) {
  if (x.rows() == 0) fail(ErrorCode::EmptySample, "empty batch");
  return detail::nn_pass(net, x, y).loss;
}

/// Backpropagated gradient of the mean cross-entropy, in flatten() order.
inline Vector nn_loss_gradient(const NeuralNet& net, const SampleMatrix& x, const std::vector<std::size_t>& y) {
  if (x.rows() == 0) fail(ErrorCode::EmptySample, "empty batch");
  require_dimension(x.rows(), static_cast<Eigen::Index>(y.size()), "nn_loss_gradient");
  const auto p = detail::nn_pass(net, x, y);
  Matrix delta2 = p.prob;
  for (Eigen::Index i = 0; i < x.rows(); ++i) delta2(i, static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)])) -= 1.0;
  delta2 /= static_cast<double>(x.rows());
  const Matrix delta1 =
      (delta2 * net.w2).cwiseProduct(p.pre.unaryExpr([f = net.activation](double a) { return activation_derivative(f, a); }));
  NeuralNet grad = net;
  grad.w2 = delta2.transpose() * p.hid;
  grad.b2 = delta2.colwise().sum().transpose();
  grad.w1 = delta1.transpose() * x;
  grad.b1 = delta1.colwise().sum().transpose();
  return grad.flatten();
}

/// Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
inline NeuralNet nn_initialize(Eigen::Index d, Eigen::Index h, Eigen::Index k, Activation f, Rng& rng) {
  auto net = NeuralNet::zeros(d, h, k, f);
  const double r1 = std::sqrt(6.0 / static_cast<double>(d + h));
  const double r2 = std::sqrt(6.0 / static_cast<double>(h + k));
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < h; ++i) net.w1(i, j) = rng.uniform(-r1, r1);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < k; ++i) net.w2(i, j) = rng.uniform(-r2, r2);
  return net;
}

struct NnOptions {
  Eigen::Index hidden = 10;
  Activation activation = Activation::TanSigmoid;
  double learning_rate = 1.0;
  std::size_t epochs = 2000;
  double gradient_tolerance = 1e-6;
  double min_learning_rate = 1e-10;
  std::uint64_t seed = 0;
};

enum class NnStatus { Converged, EpochCap, NoImprovement };

struct NnTrainingResult {
  NeuralNet net;
  NnStatus status = NnStatus::EpochCap;
  std::size_t epochs = 0;
  std::vector<double> losses;  // loss after each accepted epoch, initial loss first
};

/// Full-batch gradient descent. Each epoch halves the step until the loss
/// decreases; an accepted step doubles the next trial step.
inline NnTrainingResult train_neural_net(const SampleMatrix& x, const std::vector<std::size_t>& y, std::size_t classes,
                                         const NnOptions& options) {
  if (options.hidden < 1) fail(ErrorCode::BadArgument, "hidden layer needs at least one unit");
  if (!(options.learning_rate > 0.0) || options.epochs < 1) fail(ErrorCode::BadConfig, "invalid training configuration");
  if (x.rows() == 0) fail(ErrorCode::EmptyTrainingSet, "no training samples");
  Rng rng(options.seed);
  NnTrainingResult result;
  result.net = nn_initialize(x.cols(), options.hidden, static_cast<Eigen::Index>(classes), options.activation, rng);
  Vector theta = result.net.flatten();
  NeuralNet trial = result.net;
  double loss = nn_loss(result.net, x, y);
  result.losses.push_back(loss);
  double eta = options.learning_rate;
  for (; result.epochs < options.epochs; ++result.epochs) {
    const Vector g = nn_loss_gradient(result.net, x, y);
    if (g.norm() < options.gradient_tolerance) {
      result.status = NnStatus::Converged;
      return result;
    }
    bool accepted = false;
    while (eta >= options.min_learning_rate) {
      trial.assign(theta - eta * g);
      const double value = nn_loss(trial, x, y);
      if (value < loss) {
        theta -= eta * g;
        result.net = trial;
        loss = value;
        accepted = true;
        eta *= 2.0;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      result.status = NnStatus::NoImprovement;
      return result;
    }
    result.losses.push_back(loss);
  }
  result.status = NnStatus::EpochCap;
  return result;
}

class NeuralNetClassifier final : public Classifier {
 public:
  NeuralNetClassifier(const Dataset& train, const NnOptions& options) {
    validate_dataset(train);
    auto result = train_neural_net(train.x, train.y, train.class_count(), options);
    net_ = std::move(result.net);
    status_ = result.status;
  }

  Vector scores(const VectorRef& x) const override { return nn_forward(net_, x); }
  Eigen::Index dimension() const override { return net_.inputs(); }
  std::size_t class_count() const override { return static_cast<std::size_t>(net_.outputs()); }
  std::string family() const override { return "NN"; }
  const NeuralNet& network() const { return net_; }
  NnStatus status() const { return status_; }

 private:
  NeuralNet net_;
  NnStatus status_ = NnStatus::EpochCap;
};

inline std::unique_ptr<NeuralNetClassifier> fit_neural_net(const Dataset& train, const NnOptions& options = {}) {
  return std::make_unique<NeuralNetClassifier>(train, options);
}

}  // namespace cdsproxy
