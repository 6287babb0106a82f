#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "slicearena/errors.hpp"
#include "slicearena/rng.hpp"

namespace slicearena {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowMajorMatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct DenseLayer {
  MatrixX<Scalar> weight; // out x in
  VectorX<Scalar> bias;   // out
};

/// Fully connected network, tanh on hidden layers, identity on the output.
/// Batches are column-major: one sample per column.
///
/// Flat parameter order (shared by gradients, the optimizer and checkpoints):
/// for each layer in order, the weight matrix row by row, then the bias.
template <typename Scalar>
class Mlp {
public:
  /// Layer activations kept by a forward pass for the backward pass.
  struct Tape {
    std::vector<MatrixX<Scalar>> activations; // input, each hidden output, network output
  };

  Mlp() = default;

  explicit Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) {
      throw DimensionMismatch("an MLP needs at least an input and an output dimension");
    }
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      if (dims_[l] <= 0 || dims_[l + 1] <= 0) {
        throw DimensionMismatch("layer dimensions must be positive");
      }
      layers_.push_back({MatrixX<Scalar>::Zero(dims_[l + 1], dims_[l]), VectorX<Scalar>::Zero(dims_[l + 1])});
    }
  }

  const std::vector<int>& dims() const { return dims_; }
  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }

  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& layer : layers_) {
      n += layer.weight.size() + layer.bias.size();
    }
    return n;
  }

  template <typename Derived>
  MatrixX<Scalar> forward(const Eigen::MatrixBase<Derived>& input) const {
    Tape tape;
    return forward(input, tape);
  }

  template <typename Derived>
  MatrixX<Scalar> forward(const Eigen::MatrixBase<Derived>& input, Tape& tape) const {
    if (input.rows() != input_size()) {
      throw DimensionMismatch("input has " + std::to_string(input.rows()) + " rows, network expects " +
                              std::to_string(input_size()));
    }
    tape.activations.clear();
    tape.activations.reserve(layers_.size() + 1);
    tape.activations.emplace_back(input);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& layer = layers_[l];
      MatrixX<Scalar> z = layer.weight * tape.activations.back();
      z.colwise() += layer.bias;
      if (l + 1 < layers_.size()) {
        z = z.array().tanh().matrix();
      }
      tape.activations.push_back(std::move(z));
    }
    return tape.activations.back();
  }

  /// Accumulates d(loss)/d(parameters) into `grad` (flat order, length
  /// parameter_count()) given d(loss)/d(output) for the taped batch.
  template <typename Derived>
  void backward(const Tape& tape, const Eigen::MatrixBase<Derived>& d_output,
                Eigen::Ref<VectorX<Scalar>> grad) const {
    if (grad.size() != parameter_count()) {
      throw DimensionMismatch("gradient buffer has the wrong length");
    }
    std::vector<Eigen::Index> offsets(layers_.size());
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      offsets[l] = offset;
      offset += layers_[l].weight.size() + layers_[l].bias.size();
    }
    MatrixX<Scalar> delta = d_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      if (l + 1 < layers_.size()) {
        delta.array() *= Scalar(1) - tape.activations[l + 1].array().square();
      }
      const auto& layer = layers_[l];
      const Eigen::Index rows = layer.weight.rows();
      const Eigen::Index cols = layer.weight.cols();
      Eigen::Map<RowMajorMatrixX<Scalar>> d_weight(grad.data() + offsets[l], rows, cols);
      d_weight.noalias() += delta * tape.activations[l].transpose();
      grad.segment(offsets[l] + rows * cols, rows) += delta.rowwise().sum();
      if (l > 0) {
        delta = layer.weight.transpose() * delta;
      }
    }
  }

  VectorX<Scalar> flatten() const {
    VectorX<Scalar> flat(parameter_count());
    write_flat(flat);
    return flat;
  }

  void write_flat(Eigen::Ref<VectorX<Scalar>> flat) const {
    Eigen::Index offset = 0;
    for (const auto& layer : layers_) {
      Eigen::Map<RowMajorMatrixX<Scalar>>(flat.data() + offset, layer.weight.rows(), layer.weight.cols()) =
          layer.weight;
      offset += layer.weight.size();
      flat.segment(offset, layer.bias.size()) = layer.bias;
      offset += layer.bias.size();
    }
  }

  void read_flat(const Eigen::Ref<const VectorX<Scalar>>& flat) {
    if (flat.size() != parameter_count()) {
      throw DimensionMismatch("flat parameter vector has the wrong length");
    }
    Eigen::Index offset = 0;
    for (auto& layer : layers_) {
      layer.weight = Eigen::Map<const RowMajorMatrixX<Scalar>>(flat.data() + offset, layer.weight.rows(),
                                                               layer.weight.cols());
      offset += layer.weight.size();
      layer.bias = flat.segment(offset, layer.bias.size());
      offset += layer.bias.size();
    }
  }

  bool all_finite() const {
    for (const auto& layer : layers_) {
      if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
        return false;
      }
    }
    return true;
  }

  /// Orthogonal weights scaled by `hidden_gain` (last layer: `output_gain`),
  /// zero biases.
  void orthogonal_init(Rng& rng, Scalar hidden_gain, Scalar output_gain) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      auto& layer = layers_[l];
      const Eigen::Index rows = layer.weight.rows();
      const Eigen::Index cols = layer.weight.cols();
      const Eigen::Index tall = std::max(rows, cols);
      const Eigen::Index wide = std::min(rows, cols);
      MatrixX<double> gaussian(tall, wide);
      for (Eigen::Index j = 0; j < wide; ++j) {
        for (Eigen::Index i = 0; i < tall; ++i) {
          gaussian(i, j) = normal(rng);
        }
      }
      Eigen::HouseholderQR<MatrixX<double>> qr(gaussian);
      MatrixX<double> q = qr.householderQ() * MatrixX<double>::Identity(tall, wide);
      // Fix column signs so the draw is a proper Haar sample.
      const auto r_diag = qr.matrixQR().diagonal();
      for (Eigen::Index j = 0; j < wide; ++j) {
        if (r_diag(j) < 0) {
          q.col(j) *= -1.0;
        }
      }
      const Scalar gain = (l + 1 == layers_.size()) ? output_gain : hidden_gain;
      if (rows >= cols) {
        layer.weight = (gain * q.cast<Scalar>()).eval();
      } else {
        layer.weight = (gain * q.transpose().cast<Scalar>()).eval();
      }
      layer.bias.setZero();
    }
  }

private:
  std::vector<int> dims_;
  std::vector<DenseLayer<Scalar>> layers_;
};

/// Numerically safe softmax over each column.
template <typename Derived>
auto softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> shifted = logits.rowwise() - logits.colwise().maxCoeff();
  MatrixX<Scalar> e = shifted.array().exp().matrix();
  const auto sums = e.colwise().sum().eval();
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    e.col(j) /= sums(j);
  }
  return e;
}

template <typename Derived>
auto log_softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> shifted = logits.rowwise() - logits.colwise().maxCoeff();
  const auto log_sums = shifted.array().exp().colwise().sum().log().eval();
  for (Eigen::Index j = 0; j < shifted.cols(); ++j) {
    shifted.col(j).array() -= log_sums(j);
  }
  return shifted;
}

} // namespace slicearena
