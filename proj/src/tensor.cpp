#include "attnlab/tensor.hpp"

#include <numeric>
#include <sstream>

namespace attnlab {

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

int64_t shape_numel(const std::vector<int>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape may not be empty");
  int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

}  // namespace

void TensorImpl::accumulate_grad(const double* g, size_t n) {
  if (grad.empty()) grad.assign(data.size(), 0.0);
  for (size_t i = 0; i < n; ++i) grad[i] += g[i];
}

Tensor Tensor::zeros(std::vector<int> shape) {
  int64_t n = shape_numel(shape);
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data.assign(static_cast<size_t>(n), 0.0);
  return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
  Tensor t = zeros(std::move(shape));
  for (double& x : t.impl_->data) x = value;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data) {
  int64_t n = shape_numel(shape);
  if (n != static_cast<int64_t>(data.size())) {
    throw ShapeError("data size " + std::to_string(data.size()) + " does not match shape " + shape_to_string(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::param(std::vector<int> shape, std::vector<double> data, Tape& tape) {
  Tensor t = from(std::move(shape), std::move(data));
  t.impl_->requires_grad = true;
  t.impl_->tape = &tape;
  return t;
}

int Tensor::rows() const {
  if (ndim() == 1) return 1;
  if (ndim() == 2) return impl_->shape[0];
  throw ShapeError("rows() needs a 1-D or 2-D tensor, got " + shape_to_string(impl_->shape));
}

int Tensor::cols() const {
  if (ndim() == 1) return impl_->shape[0];
  if (ndim() == 2) return impl_->shape[1];
  throw ShapeError("cols() needs a 1-D or 2-D tensor, got " + shape_to_string(impl_->shape));
}

double& Tensor::at(int r, int c) {
  int R = rows(), C = cols();
  if (r < 0 || r >= R || c < 0 || c >= C) {
    throw IndexError("index (" + std::to_string(r) + "," + std::to_string(c) + ") out of range for " +
                     shape_to_string(impl_->shape));
  }
  return impl_->data[static_cast<size_t>(r) * C + c];
}

double Tensor::at(int r, int c) const { return const_cast<Tensor*>(this)->at(r, c); }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() needs a single-element tensor, got " + shape_to_string(impl_->shape));
  return impl_->data[0];
}

const std::vector<double>& Tensor::grad() const {
  if (impl_->grad.empty()) throw NumericError("tensor has no accumulated gradient");
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.clear(); }

void Tape::record(std::function<void()> step) {
  if (recording_) steps_.push_back(std::move(step));
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw NumericError("tape already consumed by backward(); call reset() first");
  if (loss.size() != 1) throw ShapeError("backward() needs a scalar loss, got " + shape_to_string(loss.shape()));
  if (loss.tape() != this) throw NumericError("loss tensor was not recorded on this tape");
  consumed_ = true;
  double one = 1.0;
  loss.impl()->accumulate_grad(&one, 1);
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

void Tape::reset() {
  steps_.clear();
  consumed_ = false;
}

}  // namespace attnlab
