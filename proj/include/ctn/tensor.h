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

#ifndef CTN_TENSOR_H_
#define CTN_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ctn {

using Shape = std::vector<int64_t>;

int64_t NumElements(const Shape& shape);
std::string ShapeString(const Shape& shape);

namespace internal {
struct TensorImpl;
}  // namespace internal

class Tape;

// Dense row-major array of reals with optional participation in a gradient
// tape. Values are held in double precision; model parameters are kept
// representable in 32 bits (see RoundToFloat) so that checkpoints, which
// store float32, reload bit-exactly.
//
// Tensor is a shared handle: copies alias the same storage. Use Clone() for
// a deep copy and Detach() for a copy that is cut from the tape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> values);
  static Tensor Scalar(double value);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  int64_t dim(int axis) const;
  int64_t size() const;

  std::span<const double> data() const;
  // Direct writes bypass the tape. Intended for initialization and
  // optimizer updates on leaf parameters.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool value);
  bool has_grad() const;
  std::span<const double> grad() const;
  // Allocates a zero gradient on first use. Gradient storage belongs to
  // the shared handle, so this is available on const handles.
  std::span<double> mutable_grad() const;
  void ZeroGrad() const;
  void ClearGrad() const;

  // Deep copy that never participates in the tape.
  Tensor Detach() const;
  // Deep copy preserving requires_grad (but not the gradient or tape link).
  Tensor Clone() const;

  // Rounds every value to the nearest float32.
  void RoundToFloat();

  bool SharesStorageWith(const Tensor& other) const {
    return impl_ == other.impl_;
  }

 private:
  friend class Tape;
  explicit Tensor(std::shared_ptr<internal::TensorImpl> impl)
      : impl_(std::move(impl)) {}
  internal::TensorImpl& impl() const;

  std::shared_ptr<internal::TensorImpl> impl_;
};

// Records differentiable operations issued on the current thread while a
// Tape::Scope for it is alive. A tape supports exactly one backward pass.
class Tape {
 public:
  // Receives the gradient flowing into the recorded output.
  using BackwardFn = std::function<void(std::span<const double> out_grad)>;

  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Makes `tape` the active tape of this thread for the guard's lifetime.
  class Scope {
   public:
    explicit Scope(Tape& tape);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  // Populates d(seed)/d(x) in the grad of every requires_grad tensor the
  // seed depends on. `seed` must be a scalar produced on this tape.
  void Backward(const Tensor& seed);

  size_t num_ops() const { return entries_.size(); }
  bool consumed() const { return consumed_; }

  // The tape recording on this thread, or nullptr.
  static Tape* Active();

  // Op implementation hook: returns the active tape if any of `inputs`
  // requires a gradient, else nullptr.
  static Tape* ForInputs(std::initializer_list<const Tensor*> inputs);

  // Op implementation hook: links `output` to this tape. `backward` is
  // invoked once during Backward() with the output's gradient; it must
  // accumulate into input gradients of requires_grad inputs only. The
  // closure should capture the inputs it needs by value.
  void Record(Tensor& output, BackwardFn backward);

 private:
  struct Entry {
    std::shared_ptr<internal::TensorImpl> output;
    BackwardFn backward;
  };

  uint64_t id_;
  bool consumed_ = false;
  std::vector<Entry> entries_;
};

// Free-function spelling of Tape::Backward.
void Backward(Tape& tape, const Tensor& seed);

// Records `output` (computed from `inputs`) on the active tape when needed.
// Returns true if recorded, in which case `backward` will be called.
bool RecordOp(std::initializer_list<const Tensor*> inputs, Tensor& output,
              Tape::BackwardFn backward);

}  // namespace ctn

#endif  // CTN_TENSOR_H_
