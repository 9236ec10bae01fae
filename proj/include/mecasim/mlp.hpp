// Copyright 2026 The mecasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mecasim/types.hpp"

namespace mecasim {

enum class OutputTransform {
  kIdentity,
  kTwoSigmoid, // 2 * sigmoid, range (0, 2) — friction predictions
  kTanh,       // range (-1, 1) — normalized duty cycles
};

inline std::string to_string(OutputTransform t) {
  switch (t) {
    case OutputTransform::kIdentity: return "identity";
    case OutputTransform::kTwoSigmoid: return "two_sigmoid";
    case OutputTransform::kTanh: return "tanh";
  }
  return "identity";
}

inline OutputTransform output_transform_from_string(const std::string& s) {
  if (s == "identity") return OutputTransform::kIdentity;
  if (s == "two_sigmoid") return OutputTransform::kTwoSigmoid;
  if (s == "tanh") return OutputTransform::kTanh;
  throw std::invalid_argument("Mlp: unknown output transform '" + s + "'");
}

/// Fully-connected network with tanh hidden units. Inputs are divided by
/// input_scale before the first layer so callers can feed raw physical
/// quantities.
struct Mlp {
  std::vector<int> sizes;
  std::vector<Eigen::MatrixXd> weights; // weights[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases;
  OutputTransform output = OutputTransform::kIdentity;
  Eigen::VectorXd input_scale;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim()) {
      throw std::invalid_argument("Mlp: input dimension mismatch");
    }
    Eigen::VectorXd a = x.cwiseQuotient(input_scale);
    for (int l = 0; l < layer_count(); ++l) {
      a = weights[static_cast<std::size_t>(l)] * a + biases[static_cast<std::size_t>(l)];
      if (l + 1 < layer_count()) {
        a = a.array().tanh().matrix();
      }
    }
    switch (output) {
      case OutputTransform::kIdentity: return a;
      case OutputTransform::kTwoSigmoid:
        return (2.0 / (1.0 + (-a.array()).exp())).matrix();
      case OutputTransform::kTanh: return a.array().tanh().matrix();
    }
    return a;
  }
};

/// Uniform init in +-1/sqrt(fan_in), reproducible from the seed.
inline Mlp make_mlp(std::vector<int> sizes, OutputTransform output, std::uint64_t seed,
                    Eigen::VectorXd input_scale = {}) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
  Mlp net;
  net.sizes = std::move(sizes);
  net.output = output;
  net.input_scale = input_scale.size() == 0
                        ? Eigen::VectorXd::Ones(net.sizes.front())
                        : std::move(input_scale);
  if (net.input_scale.size() != net.sizes.front()) {
    throw std::invalid_argument("Mlp: input_scale dimension mismatch");
  }
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    const int fan_in = net.sizes[l];
    const int fan_out = net.sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) W(r, c) = uniform(rng);
    }
    Eigen::VectorXd b(fan_out);
    for (int r = 0; r < fan_out; ++r) b[r] = uniform(rng);
    net.weights.push_back(std::move(W));
    net.biases.push_back(std::move(b));
  }
  return net;
}

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 20000;
  int batch_size = 0; // 0 = full batch
  std::uint64_t seed = 42;
  double l2_penalty = 0.0;
  double divergence_limit = 1e6;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
};

using Dataset = std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>;

/// Mean squared error over the given samples plus gradients for every
/// parameter. Exposed so the backward pass can be checked against finite
/// differences.
inline double mse_loss_and_grad(const Mlp& net, const Dataset& data,
                                const std::vector<int>& indices,
                                std::vector<Eigen::MatrixXd>* grad_w,
                                std::vector<Eigen::VectorXd>* grad_b,
                                double l2_penalty = 0.0) {
  const int L = net.layer_count();
  if (grad_w != nullptr) {
    grad_w->clear();
    grad_b->clear();
    for (int l = 0; l < L; ++l) {
      grad_w->emplace_back(Eigen::MatrixXd::Zero(net.weights[static_cast<std::size_t>(l)].rows(),
                                                 net.weights[static_cast<std::size_t>(l)].cols()));
      grad_b->emplace_back(Eigen::VectorXd::Zero(net.biases[static_cast<std::size_t>(l)].size()));
    }
  }

  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  std::vector<Eigen::VectorXd> activations(static_cast<std::size_t>(L) + 1);
  for (int idx : indices) {
    const auto& [x, target] = data[static_cast<std::size_t>(idx)];
    activations[0] = x.cwiseQuotient(net.input_scale);
    for (int l = 0; l < L; ++l) {
      Eigen::VectorXd z = net.weights[static_cast<std::size_t>(l)] * activations[static_cast<std::size_t>(l)] +
                          net.biases[static_cast<std::size_t>(l)];
      activations[static_cast<std::size_t>(l) + 1] =
          l + 1 < L ? Eigen::VectorXd(z.array().tanh().matrix()) : z;
    }

    const Eigen::VectorXd& z_out = activations[static_cast<std::size_t>(L)];
    Eigen::VectorXd y;
    Eigen::VectorXd dy_dz;
    switch (net.output) {
      case OutputTransform::kIdentity:
        y = z_out;
        dy_dz = Eigen::VectorXd::Ones(y.size());
        break;
      case OutputTransform::kTwoSigmoid: {
        const Eigen::ArrayXd s = 1.0 / (1.0 + (-z_out.array()).exp());
        y = (2.0 * s).matrix();
        dy_dz = (2.0 * s * (1.0 - s)).matrix();
        break;
      }
      case OutputTransform::kTanh: {
        const Eigen::ArrayXd th = z_out.array().tanh();
        y = th.matrix();
        dy_dz = (1.0 - th.square()).matrix();
        break;
      }
    }

    const Eigen::VectorXd err = y - target;
    loss += inv_n * err.squaredNorm() / static_cast<double>(err.size());
    if (grad_w == nullptr) continue;

    // delta at the output pre-activation
    Eigen::VectorXd delta =
        (2.0 * inv_n / static_cast<double>(err.size())) * err.cwiseProduct(dy_dz);
    for (int l = L - 1; l >= 0; --l) {
      (*grad_w)[static_cast<std::size_t>(l)].noalias() +=
          delta * activations[static_cast<std::size_t>(l)].transpose();
      (*grad_b)[static_cast<std::size_t>(l)] += delta;
      if (l > 0) {
        const Eigen::ArrayXd a = activations[static_cast<std::size_t>(l)].array();
        delta = (net.weights[static_cast<std::size_t>(l)].transpose() * delta)
                    .cwiseProduct((1.0 - a.square()).matrix());
      }
    }
  }

  if (l2_penalty > 0.0) {
    for (int l = 0; l < L; ++l) {
      loss += l2_penalty * net.weights[static_cast<std::size_t>(l)].squaredNorm();
      if (grad_w != nullptr) {
        (*grad_w)[static_cast<std::size_t>(l)] +=
            2.0 * l2_penalty * net.weights[static_cast<std::size_t>(l)];
      }
    }
  }
  return loss;
}

struct TrainResult {
  Mlp net;
  std::vector<double> history;
  bool diverged = false;
};

/// Gradient descent on the mean squared error; full batch by default, which
/// is all the tiny calibration datasets here ever need.
inline TrainResult train(Mlp net, const Dataset& data, const TrainConfig& cfg = {}) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train: dataset is empty");
  for (const auto& [x, y] : data) {
    if (x.size() != net.input_dim() || y.size() != net.output_dim()) {
      throw std::invalid_argument("train: sample dimension mismatch");
    }
  }

  TrainResult result;
  std::vector<int> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  std::vector<Eigen::MatrixXd> gw;
  std::vector<Eigen::VectorXd> gb;
  result.history.reserve(static_cast<std::size_t>(cfg.epochs) + 1);
  result.history.push_back(mse_loss_and_grad(net, data, all, nullptr, nullptr, cfg.l2_penalty));

  const int batch = cfg.batch_size > 0
                        ? std::min<int>(cfg.batch_size, static_cast<int>(data.size()))
                        : static_cast<int>(data.size());
  std::vector<int> order = all;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < static_cast<int>(data.size())) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch));
        const std::vector<int> mini(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
        mse_loss_and_grad(net, data, mini, &gw, &gb, cfg.l2_penalty);
        for (int l = 0; l < net.layer_count(); ++l) {
          net.weights[static_cast<std::size_t>(l)] -= cfg.learning_rate * gw[static_cast<std::size_t>(l)];
          net.biases[static_cast<std::size_t>(l)] -= cfg.learning_rate * gb[static_cast<std::size_t>(l)];
        }
      }
      result.history.push_back(
          mse_loss_and_grad(net, data, all, nullptr, nullptr, cfg.l2_penalty));
    } else {
      mse_loss_and_grad(net, data, all, &gw, &gb, cfg.l2_penalty);
      for (int l = 0; l < net.layer_count(); ++l) {
        net.weights[static_cast<std::size_t>(l)] -= cfg.learning_rate * gw[static_cast<std::size_t>(l)];
        net.biases[static_cast<std::size_t>(l)] -= cfg.learning_rate * gb[static_cast<std::size_t>(l)];
      }
      result.history.push_back(
          mse_loss_and_grad(net, data, all, nullptr, nullptr, cfg.l2_penalty));
    }
    if (!std::isfinite(result.history.back()) ||
        result.history.back() > cfg.divergence_limit) {
      result.diverged = true;
      break;
    }
  }
  result.net = std::move(net);
  return result;
}

/// Friction prediction from the commanded wheel speeds; the 2 * sigmoid
/// output keeps every prediction inside the identification box [0, 2].
inline FrictionCoeffs predict_friction(const Mlp& net, const Vec4& omega_s) {
  if (net.input_dim() != 4 || net.output_dim() != 4 ||
      net.output != OutputTransform::kTwoSigmoid) {
    throw std::invalid_argument(
        "predict_friction: expected a 4-in/4-out network with two_sigmoid output");
  }
  return FrictionCoeffs(Vec4(net.forward(omega_s)));
}

/// Inverse-dynamics baseline: pose difference in, normalized duty out.
inline Vec4 predict_controls_baseline(const Mlp& net, const Vec3& delta_pose) {
  if (net.input_dim() != 3 || net.output_dim() != 4 ||
      net.output != OutputTransform::kTanh) {
    throw std::invalid_argument(
        "predict_controls_baseline: expected a 3-in/4-out network with tanh output");
  }
  return Vec4(net.forward(delta_pose));
}

inline nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["layer_sizes"] = net.sizes;
  j["hidden_activation"] = "tanh";
  j["output_transform"] = to_string(net.output);
  j["input_scale"] = std::vector<double>(net.input_scale.data(),
                                         net.input_scale.data() + net.input_scale.size());
  nlohmann::json layers = nlohmann::json::array();
  for (int l = 0; l < net.layer_count(); ++l) {
    const Eigen::MatrixXd& W = net.weights[static_cast<std::size_t>(l)];
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(W.size()));
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
      for (Eigen::Index c = 0; c < W.cols(); ++c) data.push_back(W(r, c));
    }
    nlohmann::json layer;
    layer["rows"] = W.rows();
    layer["cols"] = W.cols();
    layer["weights_row_major"] = data;
    const Eigen::VectorXd& b = net.biases[static_cast<std::size_t>(l)];
    layer["bias"] = std::vector<double>(b.data(), b.data() + b.size());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j;
}

inline Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  net.sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (net.sizes.size() < 2) throw std::invalid_argument("Mlp: need at least two layers");
  if (j.at("hidden_activation").get<std::string>() != "tanh") {
    throw std::invalid_argument("Mlp: only tanh hidden activation is supported");
  }
  net.output = output_transform_from_string(j.at("output_transform").get<std::string>());
  const auto scale = j.at("input_scale").get<std::vector<double>>();
  net.input_scale = Eigen::Map<const Eigen::VectorXd>(scale.data(),
                                                      static_cast<Eigen::Index>(scale.size()));
  const auto& layers = j.at("layers");
  if (layers.size() + 1 != net.sizes.size()) {
    throw std::invalid_argument("Mlp: layer count does not match layer_sizes");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const int rows = layer.at("rows").get<int>();
    const int cols = layer.at("cols").get<int>();
    if (rows != net.sizes[l + 1] || cols != net.sizes[l]) {
      throw std::invalid_argument("Mlp: weight shape does not match layer_sizes");
    }
    const auto data = layer.at("weights_row_major").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != rows * cols) {
      throw std::invalid_argument("Mlp: weight payload size mismatch");
    }
    Eigen::MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) W(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
    const auto bias = layer.at("bias").get<std::vector<double>>();
    if (static_cast<int>(bias.size()) != rows) {
      throw std::invalid_argument("Mlp: bias size mismatch");
    }
    net.weights.push_back(std::move(W));
    net.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
  }
  if (net.input_scale.size() != net.sizes.front()) {
    throw std::invalid_argument("Mlp: input_scale dimension mismatch");
  }
  return net;
}

} // namespace mecasim
