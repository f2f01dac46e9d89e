// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "ebm/tiny_net.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ebm/error.hpp"
#include "ebm/numeric.hpp"

namespace ebm {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kTanh: return std::tanh(x);
    case Activation::kLogistic: return sigmoid(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

// Derivative expressed through the activation's output y.
double activate_deriv(Activation a, double y) {
  switch (a) {
    case Activation::kTanh: return 1.0 - y * y;
    case Activation::kLogistic: return y * (1.0 - y);
    case Activation::kIdentity: return 1.0;
  }
  return 1.0;
}

void check_theta(std::span<const double> theta, std::size_t n, const char* what) {
  if (theta.size() != n)
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(n) +
                        " parameters, got " + std::to_string(theta.size()));
}

}  // namespace

DenseNet::DenseNet(std::vector<std::size_t> sizes, std::vector<Activation> activations)
    : sizes_(std::move(sizes)), activations_(std::move(activations)) {
  if (sizes_.size() < 2 || activations_.size() + 1 != sizes_.size())
    throw ShapeMismatch("DenseNet: need one activation per layer");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(num_params_);
    num_params_ += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
}

void DenseNet::init(std::span<double> theta, Rng& rng, double scale) const {
  check_theta(theta, num_params_, "DenseNet::init");
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const std::size_t nw = sizes_[l] * sizes_[l + 1];
    for (std::size_t i = 0; i < nw; ++i) theta[offsets_[l] + i] = rng.uniform(-scale, scale);
    for (std::size_t i = 0; i < sizes_[l + 1]; ++i) theta[bias_offset(l) + i] = 0.0;
  }
}

std::size_t DenseNet::add_blocks(ParamVector& params, const std::string& prefix) const {
  const std::size_t start = params.size();
  for (std::size_t l = 0; l < num_layers(); ++l) {
    params.add_block(prefix + "." + std::to_string(l) + ".weight", sizes_[l] * sizes_[l + 1]);
    params.add_block(prefix + "." + std::to_string(l) + ".bias", sizes_[l + 1]);
  }
  return start;
}

DenseNet::Activations DenseNet::forward(std::span<const double> theta,
                                        std::span<const double> input) const {
  check_theta(theta, num_params_, "DenseNet::forward");
  if (input.size() != input_size())
    throw ShapeMismatch("DenseNet::forward: input size " + std::to_string(input.size()) +
                        " != " + std::to_string(input_size()));
  Activations acts;
  acts.values.reserve(sizes_.size());
  acts.values.emplace_back(input.begin(), input.end());
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const auto& x = acts.values.back();
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const double* w = theta.data() + offsets_[l];
    const double* b = theta.data() + bias_offset(l);
    std::vector<double> y(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < in; ++i) s += w[o * in + i] * x[i];
      y[o] = activate(activations_[l], s);
    }
    acts.values.push_back(std::move(y));
  }
  return acts;
}

std::vector<double> DenseNet::output(std::span<const double> theta,
                                     std::span<const double> input) const {
  return forward(theta, input).values.back();
}

std::vector<double> DenseNet::backward(std::span<const double> theta, const Activations& acts,
                                       std::span<const double> output_grad,
                                       std::span<double> param_grad, double scale) const {
  check_theta(theta, num_params_, "DenseNet::backward");
  check_theta(param_grad, num_params_, "DenseNet::backward gradient");
  if (acts.values.size() != sizes_.size())
    throw ShapeMismatch("DenseNet::backward: activations from a different net");
  for (std::size_t l = 0; l < sizes_.size(); ++l)
    if (acts.values[l].size() != sizes_[l])
      throw ShapeMismatch("DenseNet::backward: stale activations");
  if (output_grad.size() != output_size()) throw ShapeMismatch("DenseNet::backward: output grad");

  std::vector<double> grad(output_grad.begin(), output_grad.end());
  for (std::size_t l = num_layers(); l-- > 0;) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const auto& x = acts.values[l];
    const auto& y = acts.values[l + 1];
    const double* w = theta.data() + offsets_[l];
    double* gw = param_grad.data() + offsets_[l];
    double* gb = param_grad.data() + bias_offset(l);
    std::vector<double> delta(out), gin(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) delta[o] = grad[o] * activate_deriv(activations_[l], y[o]);
    for (std::size_t o = 0; o < out; ++o) {
      if (delta[o] == 0.0) continue;
      gb[o] += scale * delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] += scale * delta[o] * x[i];
        gin[i] += w[o * in + i] * delta[o];
      }
    }
    grad = std::move(gin);
  }
  return grad;
}

SimpleRecurrentCell::SimpleRecurrentCell(std::size_t input_size, std::size_t hidden_size)
    : in_(input_size), hid_(hidden_size) {
  if (in_ == 0 || hid_ == 0) throw ShapeMismatch("SimpleRecurrentCell: zero size");
}

void SimpleRecurrentCell::init(std::span<double> theta, Rng& rng, double scale) const {
  check_theta(theta, num_params(), "SimpleRecurrentCell::init");
  const std::size_t nw = hid_ * in_ + hid_ * hid_;
  for (std::size_t i = 0; i < nw; ++i) theta[i] = rng.uniform(-scale, scale);
  for (std::size_t i = nw; i < theta.size(); ++i) theta[i] = 0.0;
}

std::size_t SimpleRecurrentCell::add_blocks(ParamVector& params, const std::string& prefix) const {
  const std::size_t start = params.size();
  params.add_block(prefix + ".input_weight", hid_ * in_);
  params.add_block(prefix + ".recurrent_weight", hid_ * hid_);
  params.add_block(prefix + ".bias", hid_);
  return start;
}

std::vector<double> SimpleRecurrentCell::step(std::span<const double> theta,
                                              std::span<const double> h_prev,
                                              std::span<const double> x) const {
  check_theta(theta, num_params(), "SimpleRecurrentCell::step");
  if (h_prev.size() != hid_ || x.size() != in_) throw ShapeMismatch("SimpleRecurrentCell::step");
  const double* wi = theta.data();
  const double* wr = wi + hid_ * in_;
  const double* b = wr + hid_ * hid_;
  std::vector<double> h(hid_);
  for (std::size_t j = 0; j < hid_; ++j) {
    double s = b[j];
    for (std::size_t i = 0; i < in_; ++i) s += wi[j * in_ + i] * x[i];
    for (std::size_t k = 0; k < hid_; ++k) s += wr[j * hid_ + k] * h_prev[k];
    h[j] = std::tanh(s);
  }
  return h;
}

SimpleRecurrentCell::Activations SimpleRecurrentCell::forward(
    std::span<const double> theta, const std::vector<std::vector<double>>& inputs) const {
  Activations acts;
  acts.steps = inputs.size();
  acts.inputs = inputs;
  acts.states.emplace_back(hid_, 0.0);
  for (const auto& x : inputs) acts.states.push_back(step(theta, acts.states.back(), x));
  return acts;
}

std::vector<std::vector<double>> SimpleRecurrentCell::backward(
    std::span<const double> theta, const Activations& acts,
    const std::vector<std::vector<double>>& hidden_grads, std::span<double> param_grad,
    double scale) const {
  check_theta(theta, num_params(), "SimpleRecurrentCell::backward");
  check_theta(param_grad, num_params(), "SimpleRecurrentCell::backward gradient");
  if (acts.states.size() != acts.steps + 1 || acts.inputs.size() != acts.steps ||
      hidden_grads.size() != acts.steps)
    throw ShapeMismatch("SimpleRecurrentCell::backward: time mismatch");
  const double* wi = theta.data();
  const double* wr = wi + hid_ * in_;
  double* gwi = param_grad.data();
  double* gwr = gwi + hid_ * in_;
  double* gb = gwr + hid_ * hid_;

  std::vector<std::vector<double>> input_grads(acts.steps, std::vector<double>(in_, 0.0));
  std::vector<double> carry(hid_, 0.0), da(hid_);
  for (std::size_t t = acts.steps; t-- > 0;) {
    const auto& h = acts.states[t + 1];
    const auto& hp = acts.states[t];
    const auto& x = acts.inputs[t];
    if (h.size() != hid_ || hidden_grads[t].size() != hid_ || x.size() != in_)
      throw ShapeMismatch("SimpleRecurrentCell::backward: stale activations");
    for (std::size_t j = 0; j < hid_; ++j) da[j] = (hidden_grads[t][j] + carry[j]) * (1.0 - h[j] * h[j]);
    std::fill(carry.begin(), carry.end(), 0.0);
    for (std::size_t j = 0; j < hid_; ++j) {
      gb[j] += scale * da[j];
      for (std::size_t i = 0; i < in_; ++i) {
        gwi[j * in_ + i] += scale * da[j] * x[i];
        input_grads[t][i] += wi[j * in_ + i] * da[j];
      }
      for (std::size_t k = 0; k < hid_; ++k) {
        gwr[j * hid_ + k] += scale * da[j] * hp[k];
        carry[k] += wr[j * hid_ + k] * da[j];
      }
    }
  }
  return input_grads;
}

namespace {
constexpr const char* kFormat = "ebmlab-params";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(std::ostream& out, const ParamVector& params) {
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["blocks"] = nlohmann::json::array();
  for (const auto& b : params.blocks()) {
    auto vals = params.block(b.name);
    for (double v : vals)
      if (!std::isfinite(v)) throw NumericalError("save_checkpoint: non-finite value in " + b.name);
    j["blocks"].push_back({{"name", b.name},
                           {"step_multiplier", b.step_multiplier},
                           {"values", std::vector<double>(vals.begin(), vals.end())}});
  }
  out << j.dump(1) << '\n';
}

ParamVector load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("load_checkpoint: ") + e.what());
  }
  if (j.value("format", "") != kFormat) throw InvalidArgument("load_checkpoint: unknown format");
  if (j.value("version", 0) != kVersion)
    throw InvalidArgument("load_checkpoint: unsupported version");
  ParamVector p;
  for (const auto& b : j.at("blocks")) {
    const auto vals = b.at("values").get<std::vector<double>>();
    const std::size_t off = p.add_block(b.at("name").get<std::string>(), vals.size(), 0.0,
                                        b.value("step_multiplier", 1.0));
    for (std::size_t i = 0; i < vals.size(); ++i) p[off + i] = vals[i];
  }
  return p;
}

void save_checkpoint_file(const std::string& path, const ParamVector& params) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path);
  save_checkpoint(out, params);
}

ParamVector load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace ebm
