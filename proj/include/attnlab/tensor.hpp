#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnlab {

class Tape;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

std::string shape_to_string(const std::vector<int>& shape);

struct TensorImpl {
  std::vector<int> shape;
  std::vector<double> data;   // row-major
  std::vector<double> grad;   // empty until a gradient is accumulated
  bool requires_grad = false;
  Tape* tape = nullptr;       // non-owning; null for constants

  void accumulate_grad(const double* g, size_t n);
};

// Dense row-major tensor of doubles, value-semantic handle over shared
// storage. Binary ops with at least one tape-attached operand record a
// backward step on that tape.
class Tensor {
 public:
  Tensor() : impl_(std::make_shared<TensorImpl>()) {}

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, double value);
  static Tensor from(std::vector<int> shape, std::vector<double> data);
  static Tensor scalar(double value);
  // Leaf with requires_grad set, recorded against `tape`.
  static Tensor param(std::vector<int> shape, std::vector<double> data, Tape& tape);

  const std::vector<int>& shape() const { return impl_->shape; }
  int dim(int i) const { return impl_->shape.at(static_cast<size_t>(i)); }
  int ndim() const { return static_cast<int>(impl_->shape.size()); }
  int64_t size() const { return static_cast<int64_t>(impl_->data.size()); }
  bool defined() const { return !impl_->shape.empty(); }

  // 2-D accessors; rows()/cols() treat a 1-D tensor as a single row.
  int rows() const;
  int cols() const;
  double& at(int r, int c);
  double at(int r, int c) const;
  double& operator[](int64_t i) { return impl_->data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return impl_->data[static_cast<size_t>(i)]; }
  double item() const;

  std::vector<double>& data() { return impl_->data; }
  const std::vector<double>& data() const { return impl_->data; }

  bool requires_grad() const { return impl_->requires_grad; }
  Tape* tape() const { return impl_->tape; }
  bool has_grad() const { return !impl_->grad.empty(); }
  // Gradient of the last backward pass; throws if none was accumulated.
  const std::vector<double>& grad() const;
  void zero_grad();

  std::shared_ptr<TensorImpl> impl() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

// Records backward steps in execution order (which is already a topological
// order of the dynamically built graph) and replays them in reverse. One tape
// serves one single-threaded forward/backward pass; independent tapes are
// independent.
class Tape {
 public:
  void record(std::function<void()> step);

  // Seeds d(loss)/d(loss) = 1 and runs all recorded steps in reverse.
  // `loss` must be a scalar recorded on this tape. Calling backward a second
  // time without reset() is an error.
  void backward(const Tensor& loss);

  // Drops all recorded steps and re-arms backward().
  void reset();

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }
  size_t node_count() const { return steps_.size(); }

 private:
  std::vector<std::function<void()>> steps_;
  bool consumed_ = false;
  bool recording_ = true;
};

// RAII guard that pauses recording on a tape (forward-only evaluation).
class NoGradGuard {
 public:
  explicit NoGradGuard(Tape& tape) : tape_(tape), prev_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoGradGuard() { tape_.set_recording(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  Tape& tape_;
  bool prev_;
};

}  // namespace attnlab
