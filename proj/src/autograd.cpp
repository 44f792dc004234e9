#include "artbank/autograd.hpp"

#include <algorithm>
#include <unordered_set>

#include "artbank/errors.hpp"

namespace artbank {

struct Var::Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  bool is_leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
};

Var Var::constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var Var::leaf(Tensor value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = requires_grad;
  return Var(std::move(node));
}

Var Var::from_op(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Var& v) { return v.requires_grad(); });
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  if (any) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(std::move(in.node_));
    node->backward = std::move(backward);
  }
  return Var(std::move(node));
}

const Tensor& Var::value() const {
  if (!node_) throw ContractError("use of an empty Var");
  return node_->value;
}

Tensor& Var::mutable_value() {
  if (!node_ || !node_->is_leaf) throw ContractError("mutable_value() requires a leaf Var");
  return node_->value;
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

void Var::set_requires_grad(bool on) {
  if (!node_ || !node_->is_leaf) throw ContractError("set_requires_grad() requires a leaf Var");
  node_->requires_grad = on;
  if (!on) node_->grad = Tensor();
}

bool Var::has_grad() const { return node_ && !node_->grad.empty(); }

const Tensor& Var::grad() const {
  if (!has_grad()) throw ContractError("gradient requested for a Var without one");
  return node_->grad;
}

void Var::zero_grad() {
  if (node_ && !node_->grad.empty()) std::fill(node_->grad.data().begin(), node_->grad.data().end(), 0.0);
}

void Var::backward() const {
  if (!node_) throw ContractError("backward() on an empty Var");
  if (node_->value.size() != 1) throw DimensionError("backward() requires a single-element root");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS over nodes that require gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  auto grad_of = [](Node* n) -> Tensor& {
    if (n->grad.empty()) n->grad = Tensor(n->value.shape(), 0.0);
    return n->grad;
  };
  grad_of(node_.get())[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->is_leaf || n->grad.empty()) continue;
    BackwardContext ctx{n->value, n->grad, {}, {}};
    ctx.in.reserve(n->inputs.size());
    ctx.gin.reserve(n->inputs.size());
    for (auto& in : n->inputs) {
      ctx.in.push_back(&in->value);
      ctx.gin.push_back(in->requires_grad ? &grad_of(in.get()) : nullptr);
    }
    n->backward(ctx);
    n->grad = Tensor();
  }
}

Var& ParameterSet::add(std::string name, Tensor value, bool requires_grad) {
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  items_.push_back({std::move(name), Var::leaf(std::move(value), requires_grad)});
  return items_.back().value;
}

Var ParameterSet::get(std::string_view name) const {
  for (const auto& p : items_) {
    if (p.name == name) return p.value;
  }
  throw NotFoundError("no parameter named '" + std::string(name) + "'");
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const Parameter& p) { return p.name == name; });
}

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p.value.value().size();
  return n;
}

void ParameterSet::zero_grad() const {
  for (auto p : items_) p.value.zero_grad();
}

void ParameterSet::set_requires_grad(bool on) const {
  for (auto p : items_) p.value.set_requires_grad(on);
}

ParameterSet ParameterSet::clone() const {
  ParameterSet out;
  for (const auto& p : items_) out.add(p.name, p.value.value(), p.value.requires_grad());
  return out;
}

}  // namespace artbank
