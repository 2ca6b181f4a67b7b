#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hmog/tensor.hpp"

namespace hmog {

/// A named model weight. Models own their parameters; a Graph binds them as
/// differentiable leaves for the duration of one step.
struct Parameter {
    std::string name;
    Tensor value;
    bool trainable = true;
};

enum class OpKind : std::uint8_t {
    Leaf,
    MatMul,
    Transpose,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    Sigmoid,
    Tanh,
    Softplus,
    Exp,
    Log,
    Square,
    Sqrt,
    RSqrt,
    Reciprocal,
    SafeReciprocal,
    Softmax,
    Sum,
    Mean,
    RowSum,
    L2Norm,
    Concat,
    SliceCols,
    PadCols,
    SumTo,
    BroadcastTo,
    ClampMin,
    LeakyRelu,
    StraightThrough,
};

std::string_view op_name(OpKind kind);

/// False for ops whose derivative is only piecewise constant; recording their
/// backward pass for a second differentiation is refused.
bool twice_differentiable(OpKind kind);

/// Per-node constants for ops that need them.
struct OpAttrs {
    double scalar = 0.0;
    std::size_t offset = 0;
    std::size_t width = 0;
    Shape shape;
    Tensor aux;
    Tensor aux2;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
public:
    Var() = default;

    Graph& graph() const { return *graph_; }
    int id() const { return id_; }
    bool valid() const { return graph_ != nullptr; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;

private:
    friend class Graph;
    Var(Graph* graph, int id) : graph_(graph), id_(id) {}

    Graph* graph_ = nullptr;
    int id_ = -1;
};

/// Result of a backward pass: node id -> gradient node.
class Gradients {
public:
    bool has(Var v) const;
    /// Gradient as a graph node (differentiable when the pass recorded the graph).
    Var at(Var v) const;
    /// Gradient values; zeros when v was not reached.
    Tensor value(Var v) const;

private:
    friend class Graph;
    std::vector<std::optional<Var>> grads_;
};

class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Var constant(Tensor value);
    /// Differentiable leaf not tied to a model parameter.
    Var variable(Tensor value);
    /// Binds a parameter once per graph; repeated calls return the same node so
    /// that gradients from every use accumulate.
    Var param(const Parameter& p);

    std::size_t size() const { return nodes_.size(); }
    bool grad_enabled() const { return grad_enabled_; }
    const std::vector<std::pair<const Parameter*, Var>>& bound_parameters() const { return bound_; }

    /// Reverse-mode pass from a scalar. With create_graph the pass is itself
    /// recorded, so the returned gradients can be differentiated again.
    Gradients backward(Var loss, bool create_graph = false);

    /// d(scalar_output)/d(input) as a recorded node supporting double backprop.
    Var input_gradient(Var scalar_output, Var input);

    /// Disables recording of parents while alive; new nodes are constants.
    class NoGradGuard {
    public:
        explicit NoGradGuard(Graph& g) : graph_(g), previous_(g.grad_enabled_) { g.grad_enabled_ = false; }
        ~NoGradGuard() { graph_.grad_enabled_ = previous_; }
        NoGradGuard(const NoGradGuard&) = delete;
        NoGradGuard& operator=(const NoGradGuard&) = delete;

    private:
        Graph& graph_;
        bool previous_;
    };

    using Attrs = OpAttrs;

    Var record(OpKind kind, std::initializer_list<Var> inputs, Tensor value, Attrs attrs = {});
    Var record(OpKind kind, std::span<const Var> inputs, Tensor value, Attrs attrs = {});

    const Tensor& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool requires_grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

private:
    struct Node {
        OpKind kind = OpKind::Leaf;
        std::vector<int> inputs;
        Tensor value;
        bool requires_grad = false;
        Attrs attrs;
    };

    Gradients run_backward(Var loss, bool create_graph, std::optional<int> target);
    std::vector<std::optional<Var>> vector_jacobian(int id, Var upstream);
    Var node(int id) { return Var(this, id); }

    std::deque<Node> nodes_;
    std::unordered_map<const Parameter*, int> param_ids_;
    std::vector<std::pair<const Parameter*, Var>> bound_;
    bool grad_enabled_ = true;
};

// Differentiable operations. Binary elementwise ops broadcast over size-1 and
// missing leading axes (rank <= 2).
Var matmul(Var a, Var b);
Var transpose(Var a);
Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator-(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sqrt(Var a);
Var rsqrt(Var a);
Var reciprocal(Var a);
/// 1/x with 0 at x == 0.
Var safe_reciprocal(Var a);
/// Softmax over the last axis.
Var softmax(Var a);
Var sum(Var a);
Var mean(Var a);
/// Sum over the last axis, keeping it as extent 1.
Var row_sum(Var a);
/// Euclidean norm over the last axis, keeping it as extent 1.
Var l2_norm(Var a);
Var concat(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t offset, std::size_t width);
Var pad_cols(Var a, std::size_t offset, std::size_t total);
Var sum_to(Var a, const Shape& shape);
Var broadcast_to(Var a, const Shape& shape);
Var clamp_min(Var a, double floor);
Var leaky_relu(Var a, double slope);
/// Forward value hard + (soft - reference); gradient passes to soft unchanged.
/// With reference == soft.value() the forward value is exactly `hard`.
Var straight_through(Var soft, Tensor hard, Tensor reference);

/// Broadcast result shape; throws ShapeError naming `op` and both shapes.
Shape broadcast_shape(const Shape& a, const Shape& b, std::string_view op);

}  // namespace hmog
