// Copyright 2026 The ctn Authors. All Rights Reserved.
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

#include "ctn/tensor.h"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "ctn/errors.h"

namespace ctn {

namespace internal {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first use
  bool requires_grad = false;
  uint64_t tape_id = 0;      // 0: not produced on a tape
};

}  // namespace internal

namespace {

thread_local Tape* g_active_tape = nullptr;
std::atomic<uint64_t> g_next_tape_id{1};

void CheckShape(const Shape& shape) {
  for (int64_t d : shape) {
    if (d < 0) throw ShapeError("negative extent in shape " + ShapeString(shape));
  }
}

}  // namespace

int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string ShapeString(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape shape) {
  CheckShape(shape);
  impl_ = std::make_shared<internal::TensorImpl>();
  impl_->data.assign(NumElements(shape), 0.0);
  impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  CheckShape(shape);
  if (NumElements(shape) != static_cast<int64_t>(values.size())) {
    throw ShapeError("shape " + ShapeString(shape) + " needs " +
                     std::to_string(NumElements(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  impl_ = std::make_shared<internal::TensorImpl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::Scalar(double value) { return Tensor(Shape{}, {value}); }

internal::TensorImpl& Tensor::impl() const {
  if (!impl_) throw StateError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

int64_t Tensor::dim(int axis) const {
  const Shape& s = shape();
  if (axis < 0) axis += static_cast<int>(s.size());
  if (axis < 0 || axis >= static_cast<int>(s.size())) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeString(s));
  }
  return s[axis];
}

int64_t Tensor::size() const { return static_cast<int64_t>(impl().data.size()); }

std::span<const double> Tensor::data() const { return impl().data; }
std::span<double> Tensor::mutable_data() { return impl().data; }

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() on tensor of shape " + ShapeString(shape()));
  }
  return impl().data[0];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

Tensor& Tensor::set_requires_grad(bool value) {
  impl().requires_grad = value;
  if (!value) impl().grad.clear();
  return *this;
}

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const { return impl().grad; }

std::span<double> Tensor::mutable_grad() const {
  auto& im = impl();
  if (!im.requires_grad) {
    throw StateError("gradient requested for a tensor that does not require it");
  }
  if (im.grad.empty()) im.grad.assign(im.data.size(), 0.0);
  return im.grad;
}

void Tensor::ZeroGrad() const {
  auto& g = impl().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

void Tensor::ClearGrad() const { impl().grad.clear(); }

Tensor Tensor::Detach() const { return Tensor(shape(), impl().data); }

Tensor Tensor::Clone() const {
  Tensor t(shape(), impl().data);
  t.impl_->requires_grad = impl().requires_grad;
  return t;
}

void Tensor::RoundToFloat() {
  for (double& v : impl().data) v = static_cast<double>(static_cast<float>(v));
}

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tape::~Tape() = default;

Tape::Scope::Scope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

Tape::Scope::~Scope() { g_active_tape = previous_; }

Tape* Tape::Active() { return g_active_tape; }

Tape* Tape::ForInputs(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return nullptr;
  for (const Tensor* t : inputs) {
    if (t != nullptr && t->defined() && t->requires_grad()) return g_active_tape;
  }
  return nullptr;
}

void Tape::Record(Tensor& output, BackwardFn backward) {
  if (consumed_) throw StateError("recording on a tape after backward()");
  output.impl().requires_grad = true;
  output.impl().tape_id = id_;
  entries_.push_back(Entry{output.impl_, std::move(backward)});
}

void Tape::Backward(const Tensor& seed) {
  if (consumed_) throw StateError("tape already consumed by a backward pass");
  if (!seed.defined() || seed.impl().tape_id != id_) {
    throw StateError("backward seed was not produced on this tape");
  }
  if (seed.size() != 1) {
    throw ShapeError("backward seed must be a scalar, got " +
                     ShapeString(seed.shape()));
  }
  consumed_ = true;
  auto& seed_impl = seed.impl();
  seed_impl.grad.assign(1, 1.0);
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const auto& out = *it->output;
    if (out.grad.empty()) continue;  // not reachable from the seed
    it->backward(out.grad);
  }
  // Release closures (and the intermediate tensors they hold).
  entries_.clear();
}

void Backward(Tape& tape, const Tensor& seed) { tape.Backward(seed); }

bool RecordOp(std::initializer_list<const Tensor*> inputs, Tensor& output,
              Tape::BackwardFn backward) {
  Tape* tape = Tape::ForInputs(inputs);
  if (tape == nullptr) return false;
  tape->Record(output, std::move(backward));
  return true;
}

}  // namespace ctn
