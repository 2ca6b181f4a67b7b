#include "hmog/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace hmog {

Architecture parse_architecture(std::string_view name) {
    if (name == "hmog") return Architecture::HMoG;
    if (name == "mog") return Architecture::MoG;
    if (name == "fc") return Architecture::FC;
    if (name == "madgan") return Architecture::MADGAN;
    if (name == "mgan") return Architecture::MGAN;
    if (name == "megan") return Architecture::MEGAN;
    throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

std::string_view architecture_name(Architecture a) {
    switch (a) {
        case Architecture::HMoG: return "hmog";
        case Architecture::MoG: return "mog";
        case Architecture::FC: return "fc";
        case Architecture::MADGAN: return "madgan";
        case Architecture::MGAN: return "mgan";
        case Architecture::MEGAN: return "megan";
    }
    return "unknown";
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
    std::vector<std::size_t> out(t.rows(), 0);
    const std::size_t cols = t.cols();
    for (std::size_t r = 0; r < t.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < cols; ++c)
            if (t(r, c) > t(r, best)) best = c;
        out[r] = best;
    }
    return out;
}

Var select_rows(Graph& g, std::span<const Var> outputs, std::span<const std::size_t> choice) {
    if (outputs.empty()) throw std::invalid_argument("select_rows: no outputs");
    const std::size_t n = outputs[0].value().rows();
    if (choice.size() != n) throw std::invalid_argument("select_rows: one choice per sample required");
    for (std::size_t c : choice) {
        if (c >= outputs.size()) {
            throw std::out_of_range("generator index " + std::to_string(c) + " out of range for " +
                                    std::to_string(outputs.size()) + " generators");
        }
    }
    if (outputs.size() == 1) return outputs[0];
    Var total;
    for (std::size_t k = 0; k < outputs.size(); ++k) {
        Tensor mask({n, 1});
        for (std::size_t t = 0; t < n; ++t) mask[t] = choice[t] == k ? 1.0 : 0.0;
        Var term = outputs[k] * g.constant(std::move(mask));
        total = k == 0 ? term : total + term;
    }
    return total;
}

// ---------------------------------------------------------------------------

GatingNode::GatingNode(const std::string& name, std::size_t latent_dim, Rng& rng)
    : v{name + ".v", Tensor({1, latent_dim})}, v0{name + ".v0", Tensor::scalar(0.0)} {
    const double sd = std::sqrt(1.0 / static_cast<double>(latent_dim));
    for (auto& x : v.value.data()) x = sd * rng.normal();
}

Var GatingNode::probability(Graph& g, Var z) const {
    if (z.value().rank() != 2 || z.value().cols() != v.value.cols()) {
        throw ShapeError("gate: latent shape " + shape_str(z.shape()) + " does not match gate weights " +
                         shape_str(v.value.shape()));
    }
    return sigmoid(matmul(z, transpose(g.param(v))) + g.param(v0));
}

Var gate_probability(Graph& g, const GatingNode& node, Var z) { return node.probability(g, z); }

LeafGenerator::LeafGenerator(const std::string& name, std::size_t latent_dim, std::size_t out_dim, Rng& rng)
    : weight{name + ".W", glorot_normal(out_dim, latent_dim, rng)}, bias{name + ".w0", Tensor({out_dim}, 0.0)} {}

Var LeafGenerator::forward(Graph& g, Var z) const {
    if (z.value().rank() != 2 || z.value().cols() != weight.value.shape()[1]) {
        throw ShapeError("leaf: latent shape " + shape_str(z.shape()) + " does not match weights " +
                         shape_str(weight.value.shape()));
    }
    return matmul(z, transpose(g.param(weight))) + g.param(bias);
}

// ---------------------------------------------------------------------------

GeneratorTree::GeneratorTree(std::size_t depth, std::size_t latent_dim, std::size_t out_dim, Rng& rng,
                             const std::string& name)
    : depth_(depth), latent_dim_(latent_dim), out_dim_(out_dim) {
    if (depth > 20) throw std::invalid_argument("tree depth too large");
    const std::size_t leaves = std::size_t{1} << depth;
    gates_.reserve(leaves - 1);
    for (std::size_t m = 0; m + 1 < leaves; ++m) gates_.emplace_back(name + ".node" + std::to_string(m), latent_dim, rng);
    leaves_.reserve(leaves);
    for (std::size_t i = 0; i < leaves; ++i)
        leaves_.emplace_back(name + ".leaf" + std::to_string(i), latent_dim, out_dim, rng);
}

void GeneratorTree::check_input(Var z) const {
    if (leaves_.empty()) throw std::logic_error("generator tree is empty");
    if (z.value().rank() != 2 || z.value().cols() != latent_dim_) {
        throw ShapeError("tree: expected (n, " + std::to_string(latent_dim_) + ") latents, got " +
                         shape_str(z.shape()));
    }
}

Var GeneratorTree::evaluate(Graph& g, Var z, std::size_t node) const {
    const std::size_t first_leaf = gates_.size();
    if (node >= first_leaf) return leaves_[node - first_leaf].forward(g, z);
    Var s = gates_[node].probability(g, z);
    Var left = evaluate(g, z, 2 * node + 1);
    Var right = evaluate(g, z, 2 * node + 2);
    return s * left + (1.0 - s) * right;
}

Var GeneratorTree::forward(Graph& g, Var z) const {
    check_input(z);
    return evaluate(g, z, 0);
}

std::vector<Var> GeneratorTree::node_weights(Graph& g, Var z) const {
    check_input(z);
    std::vector<Var> w(node_count());
    w[0] = g.constant(Tensor({z.value().rows(), 1}, 1.0));
    for (std::size_t m = 0; m < gates_.size(); ++m) {
        Var s = gates_[m].probability(g, z);
        if (m == 0) {
            w[1] = s;
            w[2] = 1.0 - s;
        } else {
            w[2 * m + 1] = w[m] * s;
            w[2 * m + 2] = w[m] * (1.0 - s);
        }
    }
    return w;
}

Var GeneratorTree::leaf_responsibilities(Graph& g, Var z) const {
    auto w = node_weights(g, z);
    std::vector<Var> leaves(w.begin() + static_cast<std::ptrdiff_t>(gates_.size()), w.end());
    return concat(leaves);
}

std::vector<Parameter*> GeneratorTree::parameters() {
    std::vector<Parameter*> out;
    for (auto& n : gates_) {
        out.push_back(&n.v);
        out.push_back(&n.v0);
    }
    for (auto& l : leaves_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

// ---------------------------------------------------------------------------

FlatMixture::FlatMixture(std::size_t k, std::size_t latent_dim, std::size_t out_dim, Rng& rng,
                         const std::string& name)
    : gate_weight_{name + ".gate.W", Tensor({k, latent_dim})}, gate_bias_{name + ".gate.b", Tensor({k}, 0.0)} {
    if (k < 2) throw std::invalid_argument("flat mixture needs at least 2 generators, got " + std::to_string(k));
    const double sd = std::sqrt(1.0 / static_cast<double>(latent_dim));
    for (auto& x : gate_weight_.value.data()) x = sd * rng.normal();
    leaves_.reserve(k);
    for (std::size_t i = 0; i < k; ++i) leaves_.emplace_back(name + ".leaf" + std::to_string(i), latent_dim, out_dim, rng);
}

Var FlatMixture::gate_probabilities(Graph& g, Var z) const {
    if (leaves_.size() < 2) throw std::logic_error("flat mixture needs at least 2 generators");
    if (z.value().rank() != 2 || z.value().cols() != gate_weight_.value.shape()[1]) {
        throw ShapeError("mog: latent shape " + shape_str(z.shape()) + " does not match gate " +
                         shape_str(gate_weight_.value.shape()));
    }
    return softmax(matmul(z, transpose(g.param(gate_weight_))) + g.param(gate_bias_));
}

Var FlatMixture::forward(Graph& g, Var z) const {
    Var p = gate_probabilities(g, z);
    Var total;
    for (std::size_t k = 0; k < leaves_.size(); ++k) {
        Var term = slice_cols(p, k, 1) * leaves_[k].forward(g, z);
        total = k == 0 ? term : total + term;
    }
    return total;
}

std::vector<Parameter*> FlatMixture::parameters() {
    std::vector<Parameter*> out{&gate_weight_, &gate_bias_};
    for (auto& l : leaves_) {
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<Parameter*> Generator::parameters() {
    auto out = own_parameters();
    for (Parameter* p : shared_.parameters()) out.push_back(p);
    return out;
}

namespace {

std::vector<std::size_t> draw_choices(std::size_t n, std::size_t k, Rng& rng) {
    std::vector<std::size_t> c(n);
    for (auto& x : c) x = static_cast<std::size_t>(rng.uniform_index(k));
    return c;
}

std::vector<Parameter*> bank_parameters(std::vector<DenseNet>& bank) {
    std::vector<Parameter*> out;
    for (auto& net : bank)
        for (Parameter* p : net.parameters()) out.push_back(p);
    return out;
}

void check_bank(const std::vector<DenseNet>& bank, std::string_view what) {
    if (bank.empty()) throw std::invalid_argument(std::string(what) + ": needs at least one generator");
}

}  // namespace

Generated HmogGenerator::generate(Graph& g, Var z, Rng&) const {
    Generated out;
    out.x = shared_.forward(g, tree_.forward(g, z));
    {
        Graph::NoGradGuard guard(g);
        out.component = argmax_rows(tree_.leaf_responsibilities(g, z).value());
    }
    return out;
}

Generated MogGenerator::generate(Graph& g, Var z, Rng&) const {
    Generated out;
    out.x = shared_.forward(g, mix_.forward(g, z));
    {
        Graph::NoGradGuard guard(g);
        out.component = argmax_rows(mix_.gate_probabilities(g, z).value());
    }
    return out;
}

Generated FcGenerator::generate(Graph& g, Var z, Rng&) const {
    Generated out;
    out.x = shared_.forward(g, net_.forward(g, z));
    out.component.assign(z.value().rows(), 0);
    return out;
}

MadganGenerator::MadganGenerator(std::vector<DenseNet> heads, DenseNet trunk)
    : Generator(std::move(trunk)), heads_(std::move(heads)) {
    check_bank(heads_, "madgan");
}

Var MadganGenerator::forward(Graph& g, Var z, std::span<const std::size_t> choice) const {
    Var h = shared_.forward(g, z);
    std::vector<Var> outs;
    outs.reserve(heads_.size());
    for (const auto& head : heads_) outs.push_back(head.forward(g, h));
    return select_rows(g, outs, choice);
}

Generated MadganGenerator::generate(Graph& g, Var z, Rng& rng) const {
    Generated out;
    out.component = draw_choices(z.value().rows(), heads_.size(), rng);
    out.x = forward(g, z, out.component);
    return out;
}

std::vector<Parameter*> MadganGenerator::own_parameters() { return bank_parameters(heads_); }

MganGenerator::MganGenerator(std::vector<DenseNet> bank, DenseNet shared)
    : Generator(std::move(shared)), bank_(std::move(bank)) {
    check_bank(bank_, "mgan");
}

Var MganGenerator::forward(Graph& g, Var z, std::span<const std::size_t> choice) const {
    std::vector<Var> outs;
    outs.reserve(bank_.size());
    for (const auto& net : bank_) outs.push_back(net.forward(g, z));
    return shared_.forward(g, select_rows(g, outs, choice));
}

Generated MganGenerator::generate(Graph& g, Var z, Rng& rng) const {
    Generated out;
    out.component = draw_choices(z.value().rows(), bank_.size(), rng);
    out.x = forward(g, z, out.component);
    return out;
}

std::vector<Parameter*> MganGenerator::own_parameters() { return bank_parameters(bank_); }

MeganGenerator::MeganGenerator(std::vector<DenseNet> bank, MeganGating gating, DenseNet shared)
    : Generator(std::move(shared)), bank_(std::move(bank)), gating_(std::move(gating)) {
    check_bank(bank_, "megan");
    if (!(gating_.temperature > 0.0)) throw std::invalid_argument("megan: Gumbel temperature must be positive");
    for (const auto& net : bank_) {
        if (net.layer_count() < 2) throw std::invalid_argument("megan: generators need a hidden layer");
    }
}

MeganOutput MeganGenerator::forward(Graph& g, Var z, Rng& rng, const MeganPin* pin) const {
    if (!(gating_.temperature > 0.0)) throw std::invalid_argument("megan: Gumbel temperature must be positive");
    const std::size_t n = z.value().rows(), k = bank_.size();

    std::vector<Var> first;
    std::vector<Var> outs;
    first.reserve(k);
    outs.reserve(k);
    std::vector<Var> gate_in{z};
    for (const auto& net : bank_) {
        Var a = net.first_activation(g, z);
        Var x = a;
        for (std::size_t l = 1; l < net.layer_count(); ++l) {
            x = net.layer(l).forward(g, x);
            if (l + 1 < net.layer_count()) x = activate(x, net.hidden_activation());
        }
        gate_in.push_back(a);
        outs.push_back(x);
    }

    MeganOutput out;
    out.logits = gating_.net.forward(g, concat(gate_in));

    if (pin) {
        out.pin = *pin;
    } else {
        out.pin.gumbel = Tensor({n, k});
        for (auto& v : out.pin.gumbel.data()) v = rng.gumbel();
    }
    if (out.pin.gumbel.shape() != Shape{n, k}) throw ShapeError("megan: pinned Gumbel noise has wrong shape");

    out.soft = softmax((out.logits + g.constant(out.pin.gumbel)) * (1.0 / gating_.temperature));
    if (!pin) {
        out.chosen = argmax_rows(out.soft.value());
        out.pin.hard = Tensor({n, k});
        for (std::size_t t = 0; t < n; ++t) out.pin.hard(t, out.chosen[t]) = 1.0;
        out.pin.soft_reference = out.soft.value();
    } else {
        out.chosen = argmax_rows(out.pin.hard);
    }
    out.selection = straight_through(out.soft, out.pin.hard, out.pin.soft_reference);

    Var mixed;
    for (std::size_t i = 0; i < k; ++i) {
        Var term = slice_cols(out.selection, i, 1) * outs[i];
        mixed = i == 0 ? term : mixed + term;
    }
    out.x = shared_.forward(g, mixed);
    return out;
}

Generated MeganGenerator::generate(Graph& g, Var z, Rng& rng) const {
    MeganOutput o = forward(g, z, rng);
    return {o.x, std::move(o.chosen)};
}

std::vector<Parameter*> MeganGenerator::own_parameters() {
    auto out = bank_parameters(bank_);
    for (Parameter* p : gating_.net.parameters()) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    std::vector<std::size_t> sizes{in};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(out);
    return sizes;
}

DenseNet make_shared_block(const std::string& name, std::size_t in, std::size_t out, const ModelSpec& spec, Rng& rng) {
    if (spec.shared_hidden.empty() && in == out) return DenseNet(name, {in}, spec.shared_activation, rng);
    return DenseNet(name, layer_sizes(in, spec.shared_hidden, out), spec.shared_activation, rng);
}

}  // namespace

std::unique_ptr<Generator> make_generator(const ModelSpec& spec, Rng& rng) {
    switch (spec.architecture) {
        case Architecture::HMoG: {
            GeneratorTree tree(spec.depth, spec.latent_dim, spec.h_dim, rng);
            return std::make_unique<HmogGenerator>(std::move(tree),
                                                   make_shared_block("shared", spec.h_dim, spec.data_dim, spec, rng));
        }
        case Architecture::MoG: {
            FlatMixture mix(spec.generators, spec.latent_dim, spec.h_dim, rng);
            return std::make_unique<MogGenerator>(std::move(mix),
                                                  make_shared_block("shared", spec.h_dim, spec.data_dim, spec, rng));
        }
        case Architecture::FC: {
            DenseNet net("fc", layer_sizes(spec.latent_dim, spec.generator_hidden, spec.h_dim),
                         spec.generator_activation, rng);
            return std::make_unique<FcGenerator>(std::move(net),
                                                 make_shared_block("shared", spec.h_dim, spec.data_dim, spec, rng));
        }
        case Architecture::MADGAN: {
            DenseNet trunk = make_shared_block("shared", spec.latent_dim, spec.h_dim, spec, rng);
            std::vector<DenseNet> heads;
            for (std::size_t i = 0; i < spec.generators; ++i) {
                heads.emplace_back("gen" + std::to_string(i),
                                   layer_sizes(spec.h_dim, spec.generator_hidden, spec.data_dim),
                                   spec.generator_activation, rng);
            }
            return std::make_unique<MadganGenerator>(std::move(heads), std::move(trunk));
        }
        case Architecture::MGAN:
        case Architecture::MEGAN: {
            std::vector<DenseNet> bank;
            for (std::size_t i = 0; i < spec.generators; ++i) {
                bank.emplace_back("gen" + std::to_string(i),
                                  layer_sizes(spec.latent_dim, spec.generator_hidden, spec.h_dim),
                                  spec.generator_activation, rng);
            }
            DenseNet shared = make_shared_block("shared", spec.h_dim, spec.data_dim, spec, rng);
            if (spec.architecture == Architecture::MGAN) {
                return std::make_unique<MganGenerator>(std::move(bank), std::move(shared));
            }
            if (spec.generator_hidden.empty()) throw std::invalid_argument("megan: generators need a hidden layer");
            const std::size_t gate_in = spec.latent_dim + spec.generators * spec.generator_hidden.front();
            MeganGating gating{DenseNet("gate", layer_sizes(gate_in, spec.gate_hidden, spec.generators),
                                        spec.generator_activation, rng),
                               spec.temperature};
            return std::make_unique<MeganGenerator>(std::move(bank), std::move(gating), std::move(shared));
        }
    }
    throw std::invalid_argument("unknown architecture");
}

}  // namespace hmog
