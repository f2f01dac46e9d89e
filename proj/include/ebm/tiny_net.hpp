// Copyright 2026 The ebmlab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ebm/param_vector.hpp"
#include "ebm/rng.hpp"

namespace ebm {

enum class Activation { kTanh, kLogistic, kIdentity };

// A feedforward net described by its shape only. Parameters live in a caller
// supplied span (usually a ParamVector slice) so nets embed in larger models.
// Layout per layer: weight (out x in, row-major) then bias (out).
class DenseNet {
 public:
  DenseNet() = default;
  // sizes = {in, hidden..., out}; one activation per layer.
  DenseNet(std::vector<std::size_t> sizes, std::vector<Activation> activations);

  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_layers() const { return activations_.size(); }
  std::size_t num_params() const { return num_params_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  Activation activation(std::size_t layer) const { return activations_[layer]; }

  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const {
    return offsets_[layer] + sizes_[layer] * sizes_[layer + 1];
  }

  // Weights uniform in [-scale, scale], biases zero.
  void init(std::span<double> theta, Rng& rng, double scale = 0.1) const;
  // Appends "<prefix>.<l>.weight" and "<prefix>.<l>.bias" blocks; returns the offset.
  std::size_t add_blocks(ParamVector& params, const std::string& prefix) const;

  struct Activations {
    // values[0] is the input, values[l + 1] the output of layer l.
    std::vector<std::vector<double>> values;
    const std::vector<double>& output() const { return values.back(); }
  };

  Activations forward(std::span<const double> theta, std::span<const double> input) const;
  std::vector<double> output(std::span<const double> theta, std::span<const double> input) const;

  // Adds scale * d(out_grad . output)/dtheta into param_grad and returns the
  // input gradient.
  std::vector<double> backward(std::span<const double> theta, const Activations& acts,
                               std::span<const double> output_grad, std::span<double> param_grad,
                               double scale = 1.0) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_;
  std::size_t num_params_ = 0;
};

// h_t = tanh(W_in x_t + W_rec h_{t-1} + b). Layout: W_in (H x I), W_rec (H x H), b.
class SimpleRecurrentCell {
 public:
  SimpleRecurrentCell() = default;
  SimpleRecurrentCell(std::size_t input_size, std::size_t hidden_size);

  std::size_t input_size() const { return in_; }
  std::size_t hidden_size() const { return hid_; }
  std::size_t num_params() const { return hid_ * in_ + hid_ * hid_ + hid_; }

  void init(std::span<double> theta, Rng& rng, double scale = 0.1) const;
  std::size_t add_blocks(ParamVector& params, const std::string& prefix) const;

  // One step from h_prev; the caller owns the state.
  std::vector<double> step(std::span<const double> theta, std::span<const double> h_prev,
                           std::span<const double> x) const;

  struct Activations {
    std::size_t steps = 0;
    std::vector<std::vector<double>> inputs;  // x_1..x_T
    std::vector<std::vector<double>> states;  // h_0..h_T, h_0 = 0
  };

  Activations forward(std::span<const double> theta,
                      const std::vector<std::vector<double>>& inputs) const;

  // hidden_grads[t] is dL/dh_{t+1}. Returns dL/dx_t for each step.
  std::vector<std::vector<double>> backward(std::span<const double> theta, const Activations& acts,
                                            const std::vector<std::vector<double>>& hidden_grads,
                                            std::span<double> param_grad,
                                            double scale = 1.0) const;

 private:
  std::size_t in_ = 0, hid_ = 0;
};

// Versioned JSON checkpoint of named blocks. Doubles are written in shortest
// round-trip form, so save/load is lossless.
void save_checkpoint(std::ostream& out, const ParamVector& params);
ParamVector load_checkpoint(std::istream& in);
void save_checkpoint_file(const std::string& path, const ParamVector& params);
ParamVector load_checkpoint_file(const std::string& path);

}  // namespace ebm
