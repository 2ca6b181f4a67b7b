#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmog/graph.hpp"
#include "hmog/nn.hpp"
#include "hmog/rng.hpp"

namespace hmog {

enum class Architecture { HMoG, MoG, FC, MADGAN, MGAN, MEGAN };

Architecture parse_architecture(std::string_view name);
std::string_view architecture_name(Architecture a);

/// Soft binary split: probability of taking the left child is sigmoid(v.z + v0).
struct GatingNode {
    Parameter v;   // (1 x latent)
    Parameter v0;  // scalar

    GatingNode() = default;
    GatingNode(const std::string& name, std::size_t latent_dim, Rng& rng);
    Var probability(Graph& g, Var z) const;
};

Var gate_probability(Graph& g, const GatingNode& node, Var z);

/// Linear leaf model W z + w0, W is (h x latent).
struct LeafGenerator {
    Parameter weight;
    Parameter bias;

    LeafGenerator() = default;
    LeafGenerator(const std::string& name, std::size_t latent_dim, std::size_t out_dim, Rng& rng);
    Var forward(Graph& g, Var z) const;
};

/// Complete binary tree of gating nodes with linear generators at the leaves,
/// stored in heap order: node m has children 2m+1 and 2m+2; leaf i (left to
/// right) is node leaf_count-1+i.
class GeneratorTree {
public:
    GeneratorTree() = default;
    GeneratorTree(std::size_t depth, std::size_t latent_dim, std::size_t out_dim, Rng& rng,
                  const std::string& name = "tree");

    std::size_t depth() const { return depth_; }
    std::size_t leaf_count() const { return leaves_.size(); }
    std::size_t node_count() const { return gates_.size() + leaves_.size(); }
    std::size_t latent_dim() const { return latent_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    GatingNode& gate(std::size_t m) { return gates_.at(m); }
    const GatingNode& gate(std::size_t m) const { return gates_.at(m); }
    LeafGenerator& leaf(std::size_t i) { return leaves_.at(i); }
    const LeafGenerator& leaf(std::size_t i) const { return leaves_.at(i); }

    /// Recursive soft mixing of left and right children down to the leaves.
    Var forward(Graph& g, Var z) const;
    /// Path-product weight of every node in heap order, each (n x 1); root is 1.
    std::vector<Var> node_weights(Graph& g, Var z) const;
    /// (n x leaf_count) products of gatings along each root-to-leaf path.
    Var leaf_responsibilities(Graph& g, Var z) const;

    std::vector<Parameter*> parameters();

private:
    Var evaluate(Graph& g, Var z, std::size_t node) const;
    void check_input(Var z) const;

    std::size_t depth_ = 0;
    std::size_t latent_dim_ = 0;
    std::size_t out_dim_ = 0;
    std::vector<GatingNode> gates_;
    std::vector<LeafGenerator> leaves_;
};

/// Depth-1 mixture with softmax gating over K linear leaves.
class FlatMixture {
public:
    FlatMixture() = default;
    FlatMixture(std::size_t k, std::size_t latent_dim, std::size_t out_dim, Rng& rng, const std::string& name = "mog");

    std::size_t size() const { return leaves_.size(); }
    Parameter& gate_weight() { return gate_weight_; }
    Parameter& gate_bias() { return gate_bias_; }
    LeafGenerator& leaf(std::size_t i) { return leaves_.at(i); }
    const LeafGenerator& leaf(std::size_t i) const { return leaves_.at(i); }

    /// (n x K) softmax gate probabilities.
    Var gate_probabilities(Graph& g, Var z) const;
    Var forward(Graph& g, Var z) const;

    std::vector<Parameter*> parameters();

private:
    Parameter gate_weight_;  // (K x latent)
    Parameter gate_bias_;    // (K)
    std::vector<LeafGenerator> leaves_;
};

/// Architecture and layer sizes for a generator/critic pair. Hidden sizes are
/// configuration choices; defaults are documented in the README.
struct ModelSpec {
    Architecture architecture = Architecture::HMoG;
    std::size_t generators = 8;
    std::size_t depth = 3;
    std::size_t latent_dim = 2;
    std::size_t h_dim = 2;
    std::size_t data_dim = 2;
    std::vector<std::size_t> generator_hidden{32};
    Activation generator_activation = Activation::Tanh;
    std::vector<std::size_t> shared_hidden{};
    Activation shared_activation = Activation::Tanh;
    std::vector<std::size_t> critic_hidden{64, 64};
    Activation critic_activation = Activation::Tanh;
    std::vector<std::size_t> classifier_hidden{32};
    std::vector<std::size_t> gate_hidden{32};
    double temperature = 1.0;
};

/// One batch of generated samples.
struct Generated {
    Var x;
    /// Generator index per sample: the drawn generator for MADGAN/MGAN, the
    /// gated one for MEGAN, the most responsible leaf for HMoG/MoG (lowest
    /// index on ties), 0 for FC.
    std::vector<std::size_t> component;
};

class Generator {
public:
    explicit Generator(DenseNet shared) : shared_(std::move(shared)) {}
    virtual ~Generator() = default;
    Generator(const Generator&) = delete;
    Generator& operator=(const Generator&) = delete;

    virtual Architecture architecture() const = 0;
    virtual std::size_t component_count() const = 0;
    /// Samples from z (n x latent). `rng` drives generator choice or Gumbel noise.
    virtual Generated generate(Graph& g, Var z, Rng& rng) const = 0;
    /// Trainable parameters excluding the shared block.
    virtual std::vector<Parameter*> own_parameters() = 0;

    std::vector<Parameter*> parameters();
    std::vector<Parameter*> shared_parameters() { return shared_.parameters(); }
    const DenseNet& shared() const { return shared_; }
    DenseNet& shared() { return shared_; }

protected:
    DenseNet shared_;
};

class HmogGenerator final : public Generator {
public:
    HmogGenerator(GeneratorTree tree, DenseNet shared) : Generator(std::move(shared)), tree_(std::move(tree)) {}
    Architecture architecture() const override { return Architecture::HMoG; }
    std::size_t component_count() const override { return tree_.leaf_count(); }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    std::vector<Parameter*> own_parameters() override { return tree_.parameters(); }
    GeneratorTree& tree() { return tree_; }
    const GeneratorTree& tree() const { return tree_; }

private:
    GeneratorTree tree_;
};

class MogGenerator final : public Generator {
public:
    MogGenerator(FlatMixture mix, DenseNet shared) : Generator(std::move(shared)), mix_(std::move(mix)) {}
    Architecture architecture() const override { return Architecture::MoG; }
    std::size_t component_count() const override { return mix_.size(); }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    std::vector<Parameter*> own_parameters() override { return mix_.parameters(); }
    FlatMixture& mixture() { return mix_; }
    const FlatMixture& mixture() const { return mix_; }

private:
    FlatMixture mix_;
};

class FcGenerator final : public Generator {
public:
    FcGenerator(DenseNet net, DenseNet shared) : Generator(std::move(shared)), net_(std::move(net)) {}
    Architecture architecture() const override { return Architecture::FC; }
    std::size_t component_count() const override { return 1; }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    std::vector<Parameter*> own_parameters() override { return net_.parameters(); }
    DenseNet& net() { return net_; }

private:
    DenseNet net_;
};

/// Shared trunk first (z -> h), then one of K heads (h -> x).
class MadganGenerator final : public Generator {
public:
    MadganGenerator(std::vector<DenseNet> heads, DenseNet trunk);
    Architecture architecture() const override { return Architecture::MADGAN; }
    std::size_t component_count() const override { return heads_.size(); }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    /// choice[t] in [0, K) selects the head for sample t.
    Var forward(Graph& g, Var z, std::span<const std::size_t> choice) const;
    std::vector<Parameter*> own_parameters() override;
    DenseNet& head(std::size_t i) { return heads_.at(i); }

private:
    std::vector<DenseNet> heads_;
};

/// One of K generators first (z -> h), then the shared block (h -> x).
class MganGenerator final : public Generator {
public:
    MganGenerator(std::vector<DenseNet> bank, DenseNet shared);
    Architecture architecture() const override { return Architecture::MGAN; }
    std::size_t component_count() const override { return bank_.size(); }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    Var forward(Graph& g, Var z, std::span<const std::size_t> choice) const;
    std::vector<Parameter*> own_parameters() override;
    DenseNet& generator(std::size_t i) { return bank_.at(i); }

private:
    std::vector<DenseNet> bank_;
};

/// Gate inputs concat(z, nu_1(z), ..., nu_K(z)) -> K logits.
struct MeganGating {
    DenseNet net;
    double temperature = 1.0;
};

/// Values that make a MEGAN forward pass a deterministic function of the
/// parameters: Gumbel noise, the hard selection and the reference soft
/// probabilities of the straight-through estimator.
struct MeganPin {
    Tensor gumbel;
    Tensor hard;
    Tensor soft_reference;
};

struct MeganOutput {
    Var x;
    Var selection;  // straight-through one-hot (n x K)
    Var soft;       // Gumbel-softmax probabilities (n x K)
    Var logits;     // gate logits before noise (n x K)
    MeganPin pin;   // values used by this pass
    std::vector<std::size_t> chosen;
};

class MeganGenerator final : public Generator {
public:
    MeganGenerator(std::vector<DenseNet> bank, MeganGating gating, DenseNet shared);
    Architecture architecture() const override { return Architecture::MEGAN; }
    std::size_t component_count() const override { return bank_.size(); }
    Generated generate(Graph& g, Var z, Rng& rng) const override;
    MeganOutput forward(Graph& g, Var z, Rng& rng, const MeganPin* pin = nullptr) const;
    std::vector<Parameter*> own_parameters() override;
    DenseNet& generator(std::size_t i) { return bank_.at(i); }
    MeganGating& gating() { return gating_; }

private:
    std::vector<DenseNet> bank_;
    MeganGating gating_;
};

/// Builds the generator described by `spec` with freshly initialized weights.
std::unique_ptr<Generator> make_generator(const ModelSpec& spec, Rng& rng);

/// Combines per-generator outputs with a per-sample one-hot choice. The result
/// is bit-identical to the chosen output.
Var select_rows(Graph& g, std::span<const Var> outputs, std::span<const std::size_t> choice);

/// Row-wise argmax; lowest index wins ties.
std::vector<std::size_t> argmax_rows(const Tensor& t);

}  // namespace hmog
