#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spectral/conv.hpp"
#include "spectral/optim.hpp"
#include "spectral/pooling.hpp"

namespace spectral {

enum class Mode { Train, Eval };
enum class Parametrization { Spatial, Spectral };

struct LayerCacheBase {
    virtual ~LayerCacheBase() = default;
};
using LayerCachePtr = std::unique_ptr<LayerCacheBase>;

// A network layer. Forward/backward operate on whole batches with the batch
// dimension leading; parameters are shared across samples and their gradient
// slots accumulate over the batch.
class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string describe() const = 0;

    // Per-sample shape propagation; throws a descriptive error when shapes do
    // not compose.
    virtual Shape output_shape(const Shape& in) const = 0;

    virtual RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                               LayerCachePtr& cache) = 0;
    virtual RealTensor backward(const RealTensor& g, LayerCacheBase& cache) = 0;

    virtual std::vector<ParamSlot> params() { return {}; }
    virtual void zero_grads() {}

    // Parameter bank serialization in SPFB records (no-op for stateless layers).
    virtual void save_params(std::ostream&) const {}
    virtual void load_params(std::istream&) {}
};

class ConvLayer : public Layer {
public:
    ConvLayer(int out_ch, int in_ch, int filter_h, int filter_w, Parametrization par,
              std::mt19937_64& init_rng, ConvPath path = ConvPath::Direct);

    std::string describe() const override;
    Shape output_shape(const Shape& in) const override;
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;
    std::vector<ParamSlot> params() override;
    void zero_grads() override;
    void save_params(std::ostream& out) const override;
    void load_params(std::istream& in) override;

    Parametrization parametrization() const { return par_; }
    const SpatialFilterBank& spatial_bank() const { return spatial_; }
    const SpectralFilterBank& spectral_bank() const { return spectral_; }
    SpatialFilterBank materialized() const;

private:
    Parametrization par_;
    ConvPath path_;
    SpatialFilterBank spatial_;    // parameters when Spatial
    SpectralFilterBank spectral_;  // parameters when Spectral
    RealTensor grad_filters_;
    ComplexTensor grad_params_;
    RealTensor grad_bias_;
};

class ReluLayer : public Layer {
public:
    std::string describe() const override { return "ReLU"; }
    Shape output_shape(const Shape& in) const override { return in; }
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;
};

class MaxPoolLayer : public Layer {
public:
    MaxPoolLayer(int window, int stride);
    std::string describe() const override;
    Shape output_shape(const Shape& in) const override;
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;

private:
    int window_, stride_;
};

class SpectralPoolLayer : public Layer {
public:
    explicit SpectralPoolLayer(SpectralPoolConfig cfg);
    std::string describe() const override;
    Shape output_shape(const Shape& in) const override;
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;

    const SpectralPoolConfig& config() const { return cfg_; }

private:
    SpectralPoolConfig cfg_;
};

class FullyConnectedLayer : public Layer {
public:
    FullyConnectedLayer(int units, int in_features, std::mt19937_64& init_rng);
    std::string describe() const override;
    Shape output_shape(const Shape& in) const override;
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;
    std::vector<ParamSlot> params() override;
    void zero_grads() override;
    void save_params(std::ostream& out) const override;
    void load_params(std::istream& in) override;

private:
    RealTensor weights_;  // [units, in_features]
    RealTensor bias_;     // [units]
    RealTensor grad_w_, grad_b_;
};

class GlobalAverageLayer : public Layer {
public:
    std::string describe() const override { return "GlobalAverage"; }
    Shape output_shape(const Shape& in) const override;
    RealTensor forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                       LayerCachePtr& cache) override;
    RealTensor backward(const RealTensor& g, LayerCacheBase& cache) override;
};

// Terminal loss: numerically stable softmax cross-entropy over [B, classes]
// logits; gradients carry the 1/B batch-mean factor.
class SoftmaxXEntLayer {
public:
    explicit SoftmaxXEntLayer(int classes) : classes_(classes) {}
    int classes() const { return classes_; }
    std::string describe() const { return "SoftmaxXEnt(" + std::to_string(classes_) + ")"; }

    struct Result {
        double loss = 0.0;
        std::vector<int> predictions;
        RealTensor probs;  // [B, classes]
        std::vector<int> labels;
    };
    Result compute(const RealTensor& logits, const std::vector<int>& labels) const;
    RealTensor gradient(const Result& r) const;

private:
    int classes_;
};

struct ForwardResult {
    double loss = 0.0;
    std::vector<int> predictions;
    std::vector<LayerCachePtr> caches;
    SoftmaxXEntLayer::Result xent;
};

class SequentialNetwork {
public:
    SequentialNetwork(Shape per_sample_input, int classes,
                      std::vector<std::unique_ptr<Layer>> layers, std::uint64_t seed);

    ForwardResult forward(const RealTensor& images, const std::vector<int>& labels, Mode mode);
    // Zeroes gradient slots, then walks layers in exact reverse order.
    void backward(ForwardResult& result);

    std::vector<ParamSlot> params();
    void zero_grads();
    void reseed(std::uint64_t seed) { rng_.seed(seed); }

    const Shape& input_shape() const { return input_shape_; }
    int classes() const { return xent_.classes(); }
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::vector<std::string> layer_names() const;
    std::size_t parameter_count();

    void save_params(std::ostream& out) const;
    void load_params(std::istream& in);

private:
    Shape input_shape_;
    std::vector<std::unique_ptr<Layer>> layers_;
    SoftmaxXEntLayer xent_;
    std::mt19937_64 rng_;
};

enum class Family { SpectralPoolNet, Generic, Deep };

struct ArchitectureSpec {
    Family family = Family::Generic;
    double gamma = 0.85;       // spectral-pool map decay per layer
    int depth = 3;             // M, conv/pool repetitions of the SP family
    double alpha = 0.30;       // dropout lower-bound schedule start
    double beta = 0.15;        // dropout lower-bound schedule end
    int classes = 10;
    int filter_size = 3;       // 3 or 5
    double width_scale = 1.0;  // in (0, 1]; 1 reproduces the published widths
    int filter_cap = 288;
    Parametrization parametrization = Parametrization::Spatial;
};

// Composes the requested family for the given per-sample input (e.g.
// [3, 32, 32]); seed drives the parameter initialization draws.
SequentialNetwork build_architecture(const ArchitectureSpec& spec, const Shape& input,
                                     std::uint64_t seed);

// Checkpoint container: text header of key=value lines (architecture, input
// shape, seed) followed by every parameter bank as SPFB records.
void save_checkpoint(const std::string& path, const ArchitectureSpec& spec, const Shape& input,
                     std::uint64_t seed, const SequentialNetwork& net);
SequentialNetwork load_checkpoint(const std::string& path, ArchitectureSpec* spec_out = nullptr);

std::string family_name(Family f);
Family family_from_name(const std::string& name);

}  // namespace spectral
