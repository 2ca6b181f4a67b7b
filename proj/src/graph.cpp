#include "hmog/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmog {

std::string_view op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::MatMul: return "matmul";
        case OpKind::Transpose: return "transpose";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "subtract";
        case OpKind::Mul: return "elementwise-multiply";
        case OpKind::Scale: return "scalar-multiply";
        case OpKind::AddScalar: return "add-scalar";
        case OpKind::Sigmoid: return "sigmoid";
        case OpKind::Tanh: return "tanh";
        case OpKind::Softplus: return "softplus";
        case OpKind::Exp: return "exp";
        case OpKind::Log: return "log";
        case OpKind::Square: return "square";
        case OpKind::Sqrt: return "sqrt";
        case OpKind::RSqrt: return "reciprocal-sqrt";
        case OpKind::Reciprocal: return "reciprocal";
        case OpKind::SafeReciprocal: return "safe-reciprocal";
        case OpKind::Softmax: return "softmax";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::RowSum: return "row-sum";
        case OpKind::L2Norm: return "l2-norm";
        case OpKind::Concat: return "concat";
        case OpKind::SliceCols: return "slice-cols";
        case OpKind::PadCols: return "pad-cols";
        case OpKind::SumTo: return "sum-to";
        case OpKind::BroadcastTo: return "broadcast-to";
        case OpKind::ClampMin: return "clamp-min";
        case OpKind::LeakyRelu: return "leaky-relu";
        case OpKind::StraightThrough: return "straight-through";
    }
    return "unknown";
}

bool twice_differentiable(OpKind kind) {
    return kind != OpKind::ClampMin && kind != OpKind::LeakyRelu;
}

const Tensor& Var::value() const {
    if (!graph_) throw std::logic_error("value() on an unbound Var");
    return graph_->value_of(id_);
}

bool Var::requires_grad() const {
    return graph_ && graph_->requires_grad_of(id_);
}

bool Gradients::has(Var v) const {
    const auto i = static_cast<std::size_t>(v.id());
    return v.valid() && i < grads_.size() && grads_[i].has_value();
}

Var Gradients::at(Var v) const {
    if (!has(v)) throw std::out_of_range("no gradient recorded for node " + std::to_string(v.id()));
    return *grads_[static_cast<std::size_t>(v.id())];
}

Tensor Gradients::value(Var v) const {
    if (!has(v)) return Tensor(v.shape(), 0.0);
    return at(v).value();
}

// ---------------------------------------------------------------------------
// Recording

Var Graph::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return node(static_cast<int>(nodes_.size() - 1));
}

Var Graph::variable(Tensor value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return node(static_cast<int>(nodes_.size() - 1));
}

Var Graph::param(const Parameter& p) {
    if (auto it = param_ids_.find(&p); it != param_ids_.end()) return node(it->second);
    Var v = p.trainable ? variable(p.value) : constant(p.value);
    param_ids_.emplace(&p, v.id());
    bound_.emplace_back(&p, v);
    return v;
}

Var Graph::record(OpKind kind, std::initializer_list<Var> inputs, Tensor value, Attrs attrs) {
    return record(kind, std::span<const Var>(inputs.begin(), inputs.size()), std::move(value), std::move(attrs));
}

Var Graph::record(OpKind kind, std::span<const Var> inputs, Tensor value, Attrs attrs) {
    Node n;
    n.kind = kind;
    n.value = std::move(value);
    n.attrs = std::move(attrs);
    if (grad_enabled_) {
        for (const Var& in : inputs) {
            if (&in.graph() != this) throw std::invalid_argument(std::string(op_name(kind)) + ": inputs from another graph");
            n.requires_grad = n.requires_grad || in.requires_grad();
        }
        if (n.requires_grad) {
            n.inputs.reserve(inputs.size());
            for (const Var& in : inputs) n.inputs.push_back(in.id());
        }
    }
    nodes_.push_back(std::move(n));
    return node(static_cast<int>(nodes_.size() - 1));
}

// ---------------------------------------------------------------------------
// Backward

Gradients Graph::backward(Var loss, bool create_graph) {
    return run_backward(loss, create_graph, std::nullopt);
}

Var Graph::input_gradient(Var scalar_output, Var input) {
    if (&input.graph() != this) throw std::invalid_argument("input_gradient: input belongs to another graph");
    if (!grad_enabled_) throw std::logic_error("input_gradient: recording is disabled (NoGradGuard active)");
    Gradients g = run_backward(scalar_output, true, input.id());
    if (g.has(input)) return g.at(input);
    return constant(Tensor(input.shape(), 0.0));
}

Gradients Graph::run_backward(Var loss, bool create_graph, std::optional<int> target) {
    if (!loss.valid() || &loss.graph() != this || loss.id() < 0 ||
        static_cast<std::size_t>(loss.id()) >= nodes_.size()) {
        throw std::invalid_argument("backward: loss node is not part of this graph");
    }
    if (loss.value().size() != 1) {
        throw ShapeError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    }

    const int top = loss.id();
    std::vector<char> relevant;
    if (target) {
        relevant.assign(static_cast<std::size_t>(top) + 1, 0);
        if (*target <= top) relevant[static_cast<std::size_t>(*target)] = 1;
        for (int id = *target + 1; id <= top; ++id) {
            for (int in : nodes_[static_cast<std::size_t>(id)].inputs) {
                if (relevant[static_cast<std::size_t>(in)]) {
                    relevant[static_cast<std::size_t>(id)] = 1;
                    break;
                }
            }
        }
    }

    const bool previous = grad_enabled_;
    grad_enabled_ = create_graph;

    Gradients result;
    result.grads_.resize(static_cast<std::size_t>(top) + 1);
    result.grads_[static_cast<std::size_t>(top)] = constant(Tensor(loss.shape(), 1.0));

    try {
        for (int id = top; id >= 0; --id) {
            auto& slot = result.grads_[static_cast<std::size_t>(id)];
            if (!slot) continue;
            const Node& n = nodes_[static_cast<std::size_t>(id)];
            if (!n.requires_grad || n.kind == OpKind::Leaf) continue;
            if (target && !relevant[static_cast<std::size_t>(id)]) continue;
            if (create_graph && !twice_differentiable(n.kind)) {
                throw std::domain_error("double backprop through op '" + std::string(op_name(n.kind)) +
                                        "', which is not twice differentiable");
            }
            const std::vector<int> inputs = n.inputs;
            auto local = vector_jacobian(id, *slot);
            for (std::size_t k = 0; k < inputs.size(); ++k) {
                if (!local[k]) continue;
                const int in = inputs[k];
                if (!nodes_[static_cast<std::size_t>(in)].requires_grad) continue;
                if (target && !relevant[static_cast<std::size_t>(in)]) continue;
                auto& acc = result.grads_[static_cast<std::size_t>(in)];
                acc = acc ? (*acc + *local[k]) : *local[k];
            }
        }
    } catch (...) {
        grad_enabled_ = previous;
        throw;
    }
    grad_enabled_ = previous;
    return result;
}

std::vector<std::optional<Var>> Graph::vector_jacobian(int id, Var g) {
    // Copies: recording new nodes below may append to nodes_.
    const OpKind kind = nodes_[static_cast<std::size_t>(id)].kind;
    const std::vector<int> ids = nodes_[static_cast<std::size_t>(id)].inputs;
    const Attrs attrs = nodes_[static_cast<std::size_t>(id)].attrs;
    const Var out = node(id);
    auto in = [&](std::size_t k) { return node(ids[k]); };
    auto mask_mul = [&](Var upstream, Tensor mask) { return upstream * constant(std::move(mask)); };

    switch (kind) {
        case OpKind::Leaf: return {};
        case OpKind::MatMul: return {matmul(g, transpose(in(1))), matmul(transpose(in(0)), g)};
        case OpKind::Transpose: return {transpose(g)};
        case OpKind::Add: return {sum_to(g, in(0).shape()), sum_to(g, in(1).shape())};
        case OpKind::Sub: return {sum_to(g, in(0).shape()), sum_to(-g, in(1).shape())};
        case OpKind::Mul: return {sum_to(g * in(1), in(0).shape()), sum_to(g * in(0), in(1).shape())};
        case OpKind::Scale: return {g * attrs.scalar};
        case OpKind::AddScalar: return {g};
        case OpKind::Sigmoid: return {g * (out * (1.0 - out))};
        case OpKind::Tanh: return {g * (1.0 - square(out))};
        case OpKind::Softplus: return {g * sigmoid(in(0))};
        case OpKind::Exp: return {g * out};
        case OpKind::Log: return {g * reciprocal(in(0))};
        case OpKind::Square: return {g * (in(0) * 2.0)};
        case OpKind::Sqrt: return {g * (reciprocal(out) * 0.5)};
        case OpKind::RSqrt: return {g * (out * square(out) * -0.5)};
        case OpKind::Reciprocal:
        case OpKind::SafeReciprocal: return {g * -square(out)};
        case OpKind::Softmax: return {out * (g - row_sum(g * out))};
        case OpKind::Sum: return {broadcast_to(g, in(0).shape())};
        case OpKind::Mean:
            return {broadcast_to(g * (1.0 / static_cast<double>(in(0).value().size())), in(0).shape())};
        case OpKind::RowSum: return {broadcast_to(g, in(0).shape())};
        case OpKind::L2Norm: return {g * in(0) * safe_reciprocal(out)};
        case OpKind::Concat: {
            std::vector<std::optional<Var>> parts;
            std::size_t offset = 0;
            for (std::size_t k = 0; k < ids.size(); ++k) {
                const std::size_t w = in(k).value().cols();
                parts.emplace_back(slice_cols(g, offset, w));
                offset += w;
            }
            return parts;
        }
        case OpKind::SliceCols: return {pad_cols(g, attrs.offset, in(0).value().cols())};
        case OpKind::PadCols: return {slice_cols(g, attrs.offset, in(0).value().cols())};
        case OpKind::SumTo: return {broadcast_to(g, in(0).shape())};
        case OpKind::BroadcastTo: return {sum_to(g, in(0).shape())};
        case OpKind::ClampMin: {
            Tensor mask(in(0).shape());
            const auto& x = in(0).value();
            for (std::size_t i = 0; i < x.size(); ++i) mask[i] = x[i] > attrs.scalar ? 1.0 : 0.0;
            return {mask_mul(g, std::move(mask))};
        }
        case OpKind::LeakyRelu: {
            Tensor mask(in(0).shape());
            const auto& x = in(0).value();
            for (std::size_t i = 0; i < x.size(); ++i) mask[i] = x[i] > 0.0 ? 1.0 : attrs.scalar;
            return {mask_mul(g, std::move(mask))};
        }
        case OpKind::StraightThrough: return {g};
    }
    throw std::logic_error("vector_jacobian: unhandled op");
}

// ---------------------------------------------------------------------------
// Forward kernels

namespace {

struct View {
    std::size_t rows, cols;
};

View view_of(const Shape& s) {
    if (s.empty()) return {1, 1};
    if (s.size() == 1) return {1, s[0]};
    return {s[0], s[1]};
}

Shape keep_last_one(const Shape& s) {
    if (s.empty()) return {};
    Shape out = s;
    out.back() = 1;
    return out;
}

template <typename F>
Tensor unary(const Tensor& a, F f) {
    Tensor out(a.shape());
    const auto& x = a.data();
    auto& y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
    return out;
}

template <typename F>
Tensor binary(const Tensor& a, const Tensor& b, std::string_view op, F f) {
    const Shape shape = broadcast_shape(a.shape(), b.shape(), op);
    Tensor out(shape);
    const View va = view_of(a.shape()), vb = view_of(b.shape()), vo = view_of(shape);
    const auto& x = a.data();
    const auto& y = b.data();
    auto& z = out.data();
    if (a.shape() == b.shape()) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = f(x[i], y[i]);
        return out;
    }
    for (std::size_t r = 0; r < vo.rows; ++r) {
        const std::size_t ra = va.rows == 1 ? 0 : r, rb = vb.rows == 1 ? 0 : r;
        for (std::size_t c = 0; c < vo.cols; ++c) {
            const std::size_t ca = va.cols == 1 ? 0 : c, cb = vb.cols == 1 ? 0 : c;
            z[r * vo.cols + c] = f(x[ra * va.cols + ca], y[rb * vb.cols + cb]);
        }
    }
    return out;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Shape check_reducible(const Shape& from, const Shape& to, std::string_view op) {
    if (broadcast_shape(from, to, op) != from) {
        throw ShapeError(std::string(op) + ": cannot map shape " + shape_str(from) + " onto " + shape_str(to));
    }
    return to;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b, std::string_view op) {
    const std::size_t rank = std::max(a.size(), b.size());
    Shape out(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1) {
            throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
        }
        out[i] = da == 1 ? db : da;
    }
    return out;
}

Var matmul(Var a, Var b) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (x.rank() != 2 || y.rank() != 2 || x.shape()[1] != y.shape()[0]) {
        throw ShapeError("matmul: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(y.shape()));
    }
    const std::size_t n = x.shape()[0], k = x.shape()[1], m = y.shape()[1];
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto ni = static_cast<Eigen::Index>(n), ki = static_cast<Eigen::Index>(k), mi = static_cast<Eigen::Index>(m);
    Tensor out({n, m});
    Eigen::Map<RowMajor> z(out.data().data(), ni, mi);
    z.noalias() = Eigen::Map<const RowMajor>(x.data().data(), ni, ki) * Eigen::Map<const RowMajor>(y.data().data(), ki, mi);
    return a.graph().record(OpKind::MatMul, {a, b}, std::move(out));
}

Var transpose(Var a) {
    const Tensor& x = a.value();
    if (x.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_str(x.shape()));
    const std::size_t r = x.shape()[0], c = x.shape()[1];
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out(j, i) = x(i, j);
    return a.graph().record(OpKind::Transpose, {a}, std::move(out));
}

Var operator+(Var a, Var b) {
    return a.graph().record(OpKind::Add, {a, b},
                            binary(a.value(), b.value(), "add", [](double x, double y) { return x + y; }));
}

Var operator-(Var a, Var b) {
    return a.graph().record(OpKind::Sub, {a, b},
                            binary(a.value(), b.value(), "subtract", [](double x, double y) { return x - y; }));
}

Var operator*(Var a, Var b) {
    return a.graph().record(
        OpKind::Mul, {a, b},
        binary(a.value(), b.value(), "elementwise-multiply", [](double x, double y) { return x * y; }));
}

Var operator*(Var a, double c) {
    Graph::Attrs attrs;
    attrs.scalar = c;
    return a.graph().record(OpKind::Scale, {a}, unary(a.value(), [c](double x) { return x * c; }),
                            std::move(attrs));
}

Var operator*(double c, Var a) { return a * c; }

Var operator+(Var a, double c) {
    Graph::Attrs attrs;
    attrs.scalar = c;
    return a.graph().record(OpKind::AddScalar, {a}, unary(a.value(), [c](double x) { return x + c; }),
                            std::move(attrs));
}

Var operator+(double c, Var a) { return a + c; }
Var operator-(Var a, double c) { return a + (-c); }
Var operator-(double c, Var a) { return (a * -1.0) + c; }
Var operator-(Var a) { return a * -1.0; }

Var sigmoid(Var a) { return a.graph().record(OpKind::Sigmoid, {a}, unary(a.value(), stable_sigmoid)); }

Var tanh(Var a) {
    return a.graph().record(OpKind::Tanh, {a}, unary(a.value(), [](double x) { return std::tanh(x); }));
}

Var softplus(Var a) {
    return a.graph().record(OpKind::Softplus, {a}, unary(a.value(), [](double x) {
                                return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
                            }));
}

Var exp(Var a) {
    return a.graph().record(OpKind::Exp, {a}, unary(a.value(), [](double x) { return std::exp(x); }));
}

Var log(Var a) {
    return a.graph().record(OpKind::Log, {a}, unary(a.value(), [](double x) { return std::log(x); }));
}

Var square(Var a) {
    return a.graph().record(OpKind::Square, {a}, unary(a.value(), [](double x) { return x * x; }));
}

Var sqrt(Var a) {
    return a.graph().record(OpKind::Sqrt, {a}, unary(a.value(), [](double x) { return std::sqrt(x); }));
}

Var rsqrt(Var a) {
    return a.graph().record(OpKind::RSqrt, {a}, unary(a.value(), [](double x) { return 1.0 / std::sqrt(x); }));
}

Var reciprocal(Var a) {
    return a.graph().record(OpKind::Reciprocal, {a}, unary(a.value(), [](double x) { return 1.0 / x; }));
}

Var safe_reciprocal(Var a) {
    return a.graph().record(OpKind::SafeReciprocal, {a},
                            unary(a.value(), [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }));
}

Var softmax(Var a) {
    const Tensor& x = a.value();
    Tensor out(x.shape());
    const std::size_t rows = x.rows(), cols = x.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = x.data().data() + r * cols;
        double* o = out.data().data() + r * cols;
        const double m = *std::max_element(in, in + cols);
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += (o[c] = std::exp(in[c] - m));
        for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
    }
    return a.graph().record(OpKind::Softmax, {a}, std::move(out));
}

Var sum(Var a) {
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return a.graph().record(OpKind::Sum, {a}, Tensor::scalar(total));
}

Var mean(Var a) {
    const Tensor& x = a.value();
    if (x.size() == 0) throw ShapeError("mean: empty tensor");
    double total = 0.0;
    for (double v : x.data()) total += v;
    return a.graph().record(OpKind::Mean, {a}, Tensor::scalar(total / static_cast<double>(x.size())));
}

Var row_sum(Var a) {
    const Tensor& x = a.value();
    Tensor out(keep_last_one(x.shape()));
    const std::size_t cols = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += x.data()[r * cols + c];
        out[r] = total;
    }
    return a.graph().record(OpKind::RowSum, {a}, std::move(out));
}

Var l2_norm(Var a) {
    const Tensor& x = a.value();
    Tensor out(keep_last_one(x.shape()));
    const std::size_t cols = x.cols();
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += x.data()[r * cols + c] * x.data()[r * cols + c];
        out[r] = std::sqrt(total);
    }
    return a.graph().record(OpKind::L2Norm, {a}, std::move(out));
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const std::size_t rows = parts[0].value().rows();
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (p.value().rank() != 2 || p.value().rows() != rows) {
            throw ShapeError("concat: shape mismatch " + shape_str(parts[0].shape()) + " vs " + shape_str(p.shape()));
        }
        total += p.value().cols();
    }
    Tensor out({rows, total});
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const Tensor& x = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < x.cols(); ++c) out(r, offset + c) = x(r, c);
        offset += x.cols();
    }
    return parts[0].graph().record(OpKind::Concat, parts, std::move(out));
}

Var slice_cols(Var a, std::size_t offset, std::size_t width) {
    const Tensor& x = a.value();
    if (x.rank() != 2 || offset + width > x.cols()) {
        throw ShapeError("slice-cols: columns [" + std::to_string(offset) + ", " + std::to_string(offset + width) +
                         ") out of range for shape " + shape_str(x.shape()));
    }
    Tensor out({x.rows(), width});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < width; ++c) out(r, c) = x(r, offset + c);
    Graph::Attrs attrs;
    attrs.offset = offset;
    attrs.width = width;
    return a.graph().record(OpKind::SliceCols, {a}, std::move(out), std::move(attrs));
}

Var pad_cols(Var a, std::size_t offset, std::size_t total) {
    const Tensor& x = a.value();
    if (x.rank() != 2 || offset + x.cols() > total) {
        throw ShapeError("pad-cols: shape " + shape_str(x.shape()) + " does not fit in " + std::to_string(total) +
                         " columns at offset " + std::to_string(offset));
    }
    Tensor out({x.rows(), total});
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, offset + c) = x(r, c);
    Graph::Attrs attrs;
    attrs.offset = offset;
    attrs.width = x.cols();
    return a.graph().record(OpKind::PadCols, {a}, std::move(out), std::move(attrs));
}

Var sum_to(Var a, const Shape& shape) {
    if (a.shape() == shape) return a;
    check_reducible(a.shape(), shape, "sum-to");
    const Tensor& x = a.value();
    const View vi = view_of(x.shape()), vo = view_of(shape);
    Tensor out(shape);
    for (std::size_t r = 0; r < vi.rows; ++r)
        for (std::size_t c = 0; c < vi.cols; ++c)
            out.data()[(vo.rows == 1 ? 0 : r) * vo.cols + (vo.cols == 1 ? 0 : c)] += x.data()[r * vi.cols + c];
    Graph::Attrs attrs;
    attrs.shape = shape;
    return a.graph().record(OpKind::SumTo, {a}, std::move(out), std::move(attrs));
}

Var broadcast_to(Var a, const Shape& shape) {
    if (a.shape() == shape) return a;
    check_reducible(shape, a.shape(), "broadcast-to");
    const Tensor& x = a.value();
    const View vi = view_of(x.shape()), vo = view_of(shape);
    Tensor out(shape);
    for (std::size_t r = 0; r < vo.rows; ++r)
        for (std::size_t c = 0; c < vo.cols; ++c)
            out.data()[r * vo.cols + c] = x.data()[(vi.rows == 1 ? 0 : r) * vi.cols + (vi.cols == 1 ? 0 : c)];
    Graph::Attrs attrs;
    attrs.shape = shape;
    return a.graph().record(OpKind::BroadcastTo, {a}, std::move(out), std::move(attrs));
}

Var clamp_min(Var a, double floor) {
    Graph::Attrs attrs;
    attrs.scalar = floor;
    return a.graph().record(OpKind::ClampMin, {a}, unary(a.value(), [floor](double x) { return std::max(x, floor); }),
                            std::move(attrs));
}

Var leaky_relu(Var a, double slope) {
    Graph::Attrs attrs;
    attrs.scalar = slope;
    return a.graph().record(OpKind::LeakyRelu, {a},
                            unary(a.value(), [slope](double x) { return x > 0.0 ? x : slope * x; }),
                            std::move(attrs));
}

Var straight_through(Var soft, Tensor hard, Tensor reference) {
    const Tensor& s = soft.value();
    if (hard.shape() != s.shape() || reference.shape() != s.shape()) {
        throw ShapeError("straight-through: shape mismatch " + shape_str(s.shape()) + " vs " +
                         shape_str(hard.shape()));
    }
    Tensor out(s.shape());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = hard[i] + (s[i] - reference[i]);
    Graph::Attrs attrs;
    attrs.aux = std::move(hard);
    attrs.aux2 = std::move(reference);
    return soft.graph().record(OpKind::StraightThrough, {soft}, std::move(out), std::move(attrs));
}

}  // namespace hmog
