#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wornet {

[[noreturn]] inline void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

inline void check(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

/// Dense N-dimensional array, row-major, flat Eigen storage. Image-like data
/// uses (batch, channels, height, width) extents. Scalar is float in normal
/// operation and double in gradient-checking mode.
template <typename S>
struct Tensor {
  std::vector<int> shape;
  Eigen::Array<S, Eigen::Dynamic, 1> data;
  bool requires_grad = false;

  Tensor() = default;

  Tensor(std::vector<int> shape_in, Eigen::Array<S, Eigen::Dynamic, 1> data_in)
      : shape(std::move(shape_in)), data(std::move(data_in)) {
    validate();
  }

  static Tensor zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    t.data = Eigen::Array<S, Eigen::Dynamic, 1>::Zero(count(t.shape));
    t.validate();
    return t;
  }

  static Tensor full(std::vector<int> shape, S value) {
    Tensor t = zeros(std::move(shape));
    t.data.setConstant(value);
    return t;
  }

  static Tensor from(std::vector<int> shape, const std::vector<S>& values) {
    Tensor t;
    t.shape = std::move(shape);
    t.data.resize(static_cast<Eigen::Index>(values.size()));
    for (size_t i = 0; i < values.size(); ++i) t.data[static_cast<Eigen::Index>(i)] = values[i];
    t.validate();
    return t;
  }

  static Tensor scalar(S value) { return full({1}, value); }

  void validate() const {
    check(!shape.empty(), "tensor shape must have at least one extent");
    for (int e : shape) check(e >= 1, "tensor extents must be >= 1, got " + shape_str());
    check(count(shape) == data.size(),
          "tensor data length " + std::to_string(data.size()) + " does not match shape " + shape_str());
  }

  static Eigen::Index count(const std::vector<int>& shape) {
    Eigen::Index n = 1;
    for (int e : shape) n *= e;
    return n;
  }

  Eigen::Index numel() const { return data.size(); }
  int dim(size_t i) const { return shape.at(i); }
  size_t rank() const { return shape.size(); }

  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  // 4-d accessors for NCHW data
  S& at(int n, int c, int h, int w) {
    return data[((static_cast<Eigen::Index>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }
  S at(int n, int c, int h, int w) const {
    return data[((static_cast<Eigen::Index>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  std::string shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
  }
};

template <typename S>
inline void check_same_shape(const Tensor<S>& a, const Tensor<S>& b, const std::string& op) {
  check(a.same_shape(b), op + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace wornet
