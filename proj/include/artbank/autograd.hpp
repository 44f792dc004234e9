#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "artbank/tensor.hpp"

namespace artbank {

// Handed to an op's backward function. gin[i] is null when input i needs no gradient.
struct BackwardContext {
  const Tensor& out;
  const Tensor& gout;
  std::vector<const Tensor*> in;
  std::vector<Tensor*> gin;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

// Handle to a node of the recorded computation graph. Copies share the node.
class Var {
 public:
  Var() = default;

  static Var constant(Tensor value);
  static Var leaf(Tensor value, bool requires_grad = true);
  // Records an op. Returns a constant when no input requires a gradient.
  // Throws NumericError naming `op` if `value` is not finite.
  static Var from_op(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

  explicit operator bool() const noexcept { return static_cast<bool>(node_); }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  // Leaves only; used by optimizers and finite-difference probes.
  Tensor& mutable_value();

  bool requires_grad() const;
  // Leaves only. Disabling releases the gradient buffer.
  void set_requires_grad(bool on);
  bool has_grad() const;
  const Tensor& grad() const;
  void zero_grad();

  // Reverse sweep from a single-element root; leaf gradients accumulate.
  void backward() const;

 private:
  struct Node;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

struct Parameter {
  std::string name;
  Var value;
};

// Named trainable leaves with unique names.
class ParameterSet {
 public:
  ParameterSet() = default;

  Var& add(std::string name, Tensor value, bool requires_grad = true);
  Var get(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const noexcept { return items_.size(); }
  std::size_t element_count() const;
  const std::vector<Parameter>& items() const noexcept { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  void zero_grad() const;
  void set_requires_grad(bool on) const;
  // Deep copy with fresh leaf nodes.
  ParameterSet clone() const;

 private:
  std::vector<Parameter> items_;
};

}  // namespace artbank
