#include "spectral/nn.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "spectral/parallel.hpp"
#include "spectral/serialize.hpp"

namespace spectral {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Shape batch_shape(int batch, const Shape& per_sample) {
    std::vector<int> dims{batch};
    for (int d : per_sample.dims()) dims.push_back(d);
    return Shape(dims);
}

Shape sample_shape(const Shape& batched) {
    std::vector<int> dims(batched.dims().begin() + 1, batched.dims().end());
    return Shape(dims);
}

std::span<double> complex_span(ComplexTensor& t) {
    return {reinterpret_cast<double*>(t.data()), t.size() * 2};
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvLayer

namespace {
struct ConvLayerCache : LayerCacheBase {
    RealTensor input;        // [B, in_ch, M, N]
    SpatialFilterBank bank;  // filters as applied
};
}  // namespace

ConvLayer::ConvLayer(int out_ch, int in_ch, int filter_h, int filter_w, Parametrization par,
                     std::mt19937_64& init_rng, ConvPath path)
    : par_(par), path_(path) {
    if (out_ch < 1 || in_ch < 1 || filter_h < 1 || filter_w < 1)
        throw std::invalid_argument("ConvLayer: all dimensions must be >= 1");
    // He-style draw; spatial and spectral parametrizations start from the
    // identical spatial values.
    const double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch) * filter_h * filter_w));
    std::normal_distribution<double> dist(0.0, stddev);
    spatial_.filters = RealTensor(Shape({out_ch, in_ch, filter_h, filter_w}));
    for (auto& v : spatial_.filters.storage()) v = dist(init_rng);
    spatial_.bias = RealTensor(Shape({out_ch}));
    if (par_ == Parametrization::Spectral) {
        spectral_ = init_spectral_from_spatial(spatial_);
        spatial_ = SpatialFilterBank{};
        grad_params_ = ComplexTensor(spectral_.params.shape());
        grad_bias_ = RealTensor(spectral_.bias.shape());
    } else {
        grad_filters_ = RealTensor(spatial_.filters.shape());
        grad_bias_ = RealTensor(spatial_.bias.shape());
    }
}

std::string ConvLayer::describe() const {
    const Shape& fs = par_ == Parametrization::Spectral ? spectral_.params.shape()
                                                        : spatial_.filters.shape();
    return "Conv(" + std::to_string(fs.dim(0)) + ", " + std::to_string(fs.dim(2)) + "x" +
           std::to_string(fs.dim(3)) +
           (par_ == Parametrization::Spectral ? ", spectral)" : ", spatial)");
}

SpatialFilterBank ConvLayer::materialized() const {
    return par_ == Parametrization::Spectral ? materialize_filters(spectral_) : spatial_;
}

Shape ConvLayer::output_shape(const Shape& in) const {
    const Shape& fs = par_ == Parametrization::Spectral ? spectral_.params.shape()
                                                        : spatial_.filters.shape();
    if (in.rank() != 3)
        throw std::invalid_argument(describe() + ": expects [channels, H, W], got " + in.str());
    if (in.dim(0) != fs.dim(1))
        throw std::invalid_argument(describe() + ": input has " + std::to_string(in.dim(0)) +
                                    " channels, filters expect " + std::to_string(fs.dim(1)));
    if (fs.dim(2) > in.dim(1) || fs.dim(3) > in.dim(2))
        throw std::invalid_argument(describe() + ": filter larger than map " + in.str());
    return Shape({fs.dim(0), in.dim(1), in.dim(2)});
}

RealTensor ConvLayer::forward(const RealTensor& x, Mode, std::mt19937_64&, LayerCachePtr& cache) {
    const Shape out_sample = output_shape(sample_shape(x.shape()));
    const int B = x.shape().dim(0);
    const int in_ch = x.shape().dim(1), M = x.shape().dim(2), N = x.shape().dim(3);
    auto own = std::make_unique<ConvLayerCache>();
    own->bank = materialized();
    RealTensor out(batch_shape(B, out_sample));
    const std::size_t in_stride = static_cast<std::size_t>(in_ch) * M * N;
    const std::size_t out_stride = out_sample.numel();
    detail::parallel_for(static_cast<std::size_t>(B), [&](std::size_t b) {
        detail::conv_fwd_sample(x.data() + b * in_stride, in_ch, M, N, own->bank, path_,
                                out.data() + b * out_stride);
    });
    own->input = x;
    cache = std::move(own);
    return out;
}

RealTensor ConvLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    auto& c = dynamic_cast<ConvLayerCache&>(cache);
    const int B = c.input.shape().dim(0);
    const int in_ch = c.input.shape().dim(1), M = c.input.shape().dim(2), N = c.input.shape().dim(3);
    RealTensor grad_x(c.input.shape());
    RealTensor batch_gf(c.bank.filters.shape());
    const std::size_t in_stride = static_cast<std::size_t>(in_ch) * M * N;
    const std::size_t out_stride = g.size() / static_cast<std::size_t>(B);
    // fixed chunk count keeps the filter/bias reduction order independent of
    // thread scheduling
    constexpr std::size_t kChunks = 8;
    const std::size_t chunks = std::min<std::size_t>(kChunks, static_cast<std::size_t>(B));
    std::vector<RealTensor> gf_parts(chunks, RealTensor(batch_gf.shape()));
    std::vector<RealTensor> gb_parts(chunks, RealTensor(grad_bias_.shape()));
    detail::parallel_chunks(static_cast<std::size_t>(B), chunks,
                            [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b)
            detail::conv_bwd_sample(c.input.data() + b * in_stride, g.data() + b * out_stride,
                                    in_ch, M, N, c.bank, path_, grad_x.data() + b * in_stride,
                                    gf_parts[chunk].data(), gb_parts[chunk].data());
    });
    for (std::size_t chunk = 0; chunk < chunks; ++chunk) {
        for (std::size_t i = 0; i < batch_gf.size(); ++i) batch_gf[i] += gf_parts[chunk][i];
        for (std::size_t i = 0; i < grad_bias_.size(); ++i) grad_bias_[i] += gb_parts[chunk][i];
    }
    if (par_ == Parametrization::Spectral) {
        ComplexTensor transported = spectral_param_gradient(batch_gf);
        for (std::size_t i = 0; i < grad_params_.size(); ++i) grad_params_[i] += transported[i];
    } else {
        for (std::size_t i = 0; i < grad_filters_.size(); ++i) grad_filters_[i] += batch_gf[i];
    }
    return grad_x;
}

std::vector<ParamSlot> ConvLayer::params() {
    if (par_ == Parametrization::Spectral)
        return {ParamSlot{complex_span(spectral_.params), complex_span(grad_params_), false,
                          "conv.params"},
                ParamSlot{{spectral_.bias.data(), spectral_.bias.size()},
                          {grad_bias_.data(), grad_bias_.size()},
                          true,
                          "conv.bias"}};
    return {ParamSlot{{spatial_.filters.data(), spatial_.filters.size()},
                      {grad_filters_.data(), grad_filters_.size()},
                      false,
                      "conv.filters"},
            ParamSlot{{spatial_.bias.data(), spatial_.bias.size()},
                      {grad_bias_.data(), grad_bias_.size()},
                      true,
                      "conv.bias"}};
}

void ConvLayer::zero_grads() {
    for (auto& v : grad_filters_.storage()) v = 0.0;
    for (auto& v : grad_params_.storage()) v = cdouble{0.0, 0.0};
    for (auto& v : grad_bias_.storage()) v = 0.0;
}

void ConvLayer::save_params(std::ostream& out) const {
    if (par_ == Parametrization::Spectral) {
        write_spfb(out, spectral_.params);
        write_spfb(out, spectral_.bias);
    } else {
        write_spfb(out, spatial_.filters);
        write_spfb(out, spatial_.bias);
    }
}

void ConvLayer::load_params(std::istream& in) {
    if (par_ == Parametrization::Spectral) {
        ComplexTensor p = read_spfb_complex(in);
        if (!(p.shape() == spectral_.params.shape()))
            throw std::runtime_error("checkpoint: conv parameter shape mismatch");
        spectral_.params = std::move(p);
        spectral_.bias = read_spfb_real(in);
    } else {
        RealTensor f = read_spfb_real(in);
        if (!(f.shape() == spatial_.filters.shape()))
            throw std::runtime_error("checkpoint: conv filter shape mismatch");
        spatial_.filters = std::move(f);
        spatial_.bias = read_spfb_real(in);
    }
}

// ---------------------------------------------------------------------------
// ReLU

namespace {
struct ReluCache : LayerCacheBase {
    RealTensor input;
};
}  // namespace

RealTensor ReluLayer::forward(const RealTensor& x, Mode, std::mt19937_64&, LayerCachePtr& cache) {
    auto own = std::make_unique<ReluCache>();
    RealTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    own->input = x;
    cache = std::move(own);
    return out;
}

RealTensor ReluLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    auto& c = dynamic_cast<ReluCache&>(cache);
    RealTensor out(g.shape());
    // gradient at exactly 0 is 0
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = c.input[i] > 0.0 ? g[i] : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// MaxPool

namespace {
struct MaxPoolLayerCache : LayerCacheBase {
    MaxPoolCache pool;
};
}  // namespace

MaxPoolLayer::MaxPoolLayer(int window, int stride) : window_(window), stride_(stride) {
    if (window < 1 || stride < 1)
        throw std::invalid_argument("MaxPoolLayer: window and stride must be >= 1");
}

std::string MaxPoolLayer::describe() const {
    return "MaxPool(" + std::to_string(window_) + ", " + std::to_string(stride_) + ")";
}

Shape MaxPoolLayer::output_shape(const Shape& in) const {
    if (in.rank() != 3)
        throw std::invalid_argument(describe() + ": expects [channels, H, W], got " + in.str());
    if (window_ > in.dim(1) || window_ > in.dim(2))
        throw std::invalid_argument(describe() + ": window larger than map " + in.str());
    return Shape({in.dim(0), (in.dim(1) - window_) / stride_ + 1, (in.dim(2) - window_) / stride_ + 1});
}

RealTensor MaxPoolLayer::forward(const RealTensor& x, Mode, std::mt19937_64&, LayerCachePtr& cache) {
    auto own = std::make_unique<MaxPoolLayerCache>();
    auto [out, pool_cache] = max_pool_forward(x, window_, stride_);
    own->pool = std::move(pool_cache);
    cache = std::move(own);
    return out;
}

RealTensor MaxPoolLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    return max_pool_backward(g, dynamic_cast<MaxPoolLayerCache&>(cache).pool);
}

// ---------------------------------------------------------------------------
// SpectralPool

namespace {
struct SpectralPoolLayerCache : LayerCacheBase {
    PoolCache pool;
};
}  // namespace

SpectralPoolLayer::SpectralPoolLayer(SpectralPoolConfig cfg) : cfg_(std::move(cfg)) {}

std::string SpectralPoolLayer::describe() const {
    std::string s = "SpectralPool(" + std::to_string(cfg_.out_h) + "x" + std::to_string(cfg_.out_w);
    if (cfg_.dropout)
        s += ", dropout m=" + std::to_string(cfg_.dropout->layer_index) + "/" +
             std::to_string(cfg_.dropout->total_layers);
    return s + ")";
}

Shape SpectralPoolLayer::output_shape(const Shape& in) const {
    if (in.rank() != 3)
        throw std::invalid_argument(describe() + ": expects [channels, H, W], got " + in.str());
    if (cfg_.out_h > in.dim(1) || cfg_.out_w > in.dim(2))
        throw std::invalid_argument(describe() + ": cannot upsample map " + in.str());
    return Shape({in.dim(0), cfg_.out_h, cfg_.out_w});
}

RealTensor SpectralPoolLayer::forward(const RealTensor& x, Mode mode, std::mt19937_64& rng,
                                      LayerCachePtr& cache) {
    auto own = std::make_unique<SpectralPoolLayerCache>();
    // Frequency dropout only while training; one radius per invocation shared
    // across the whole batch.
    auto [out, pool_cache] = spectral_pool_forward(x, cfg_, mode == Mode::Train ? &rng : nullptr);
    own->pool = std::move(pool_cache);
    cache = std::move(own);
    return out;
}

RealTensor SpectralPoolLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    return spectral_pool_backward(g, dynamic_cast<SpectralPoolLayerCache&>(cache).pool);
}

// ---------------------------------------------------------------------------
// FullyConnected

namespace {
struct FcCache : LayerCacheBase {
    RealTensor input;  // original shape kept for the input gradient
};
}  // namespace

FullyConnectedLayer::FullyConnectedLayer(int units, int in_features, std::mt19937_64& init_rng) {
    if (units < 1 || in_features < 1)
        throw std::invalid_argument("FullyConnectedLayer: units and in_features must be >= 1");
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_features));
    std::normal_distribution<double> dist(0.0, stddev);
    weights_ = RealTensor(Shape({units, in_features}));
    for (auto& v : weights_.storage()) v = dist(init_rng);
    bias_ = RealTensor(Shape({units}));
    grad_w_ = RealTensor(weights_.shape());
    grad_b_ = RealTensor(bias_.shape());
}

std::string FullyConnectedLayer::describe() const {
    return "FC(" + std::to_string(weights_.shape().dim(0)) + ")";
}

Shape FullyConnectedLayer::output_shape(const Shape& in) const {
    if (static_cast<int>(in.numel()) != weights_.shape().dim(1))
        throw std::invalid_argument(describe() + ": expects " +
                                    std::to_string(weights_.shape().dim(1)) + " features, got " +
                                    in.str());
    return Shape({weights_.shape().dim(0)});
}

RealTensor FullyConnectedLayer::forward(const RealTensor& x, Mode, std::mt19937_64&,
                                        LayerCachePtr& cache) {
    const int B = x.shape().dim(0);
    const int in_features = weights_.shape().dim(1);
    const int units = weights_.shape().dim(0);
    if (x.size() != static_cast<std::size_t>(B) * in_features)
        throw std::invalid_argument(describe() + ": input shape " + x.shape().str() +
                                    " does not flatten to " + std::to_string(in_features));
    auto own = std::make_unique<FcCache>();
    RealTensor out(Shape({B, units}));
    ConstMapMat X(x.data(), B, in_features);
    ConstMapMat W(weights_.data(), units, in_features);
    MapMat Y(out.data(), B, units);
    Y.noalias() = X * W.transpose();
    for (int b = 0; b < B; ++b)
        for (int u = 0; u < units; ++u) out(b, u) += bias_[static_cast<std::size_t>(u)];
    own->input = x;
    cache = std::move(own);
    return out;
}

RealTensor FullyConnectedLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    auto& c = dynamic_cast<FcCache&>(cache);
    const int B = c.input.shape().dim(0);
    const int in_features = weights_.shape().dim(1);
    const int units = weights_.shape().dim(0);
    ConstMapMat G(g.data(), B, units);
    ConstMapMat X(c.input.data(), B, in_features);
    MapMat GW(grad_w_.data(), units, in_features);
    GW.noalias() += G.transpose() * X;
    for (int b = 0; b < B; ++b)
        for (int u = 0; u < units; ++u) grad_b_[static_cast<std::size_t>(u)] += g(b, u);
    RealTensor grad_x(c.input.shape());
    ConstMapMat W(weights_.data(), units, in_features);
    MapMat GX(grad_x.data(), B, in_features);
    GX.noalias() = G * W;
    return grad_x;
}

std::vector<ParamSlot> FullyConnectedLayer::params() {
    return {ParamSlot{{weights_.data(), weights_.size()}, {grad_w_.data(), grad_w_.size()}, false,
                      "fc.weights"},
            ParamSlot{{bias_.data(), bias_.size()}, {grad_b_.data(), grad_b_.size()}, true,
                      "fc.bias"}};
}

void FullyConnectedLayer::zero_grads() {
    for (auto& v : grad_w_.storage()) v = 0.0;
    for (auto& v : grad_b_.storage()) v = 0.0;
}

void FullyConnectedLayer::save_params(std::ostream& out) const {
    write_spfb(out, weights_);
    write_spfb(out, bias_);
}

void FullyConnectedLayer::load_params(std::istream& in) {
    RealTensor w = read_spfb_real(in);
    if (!(w.shape() == weights_.shape()))
        throw std::runtime_error("checkpoint: FC weight shape mismatch");
    weights_ = std::move(w);
    bias_ = read_spfb_real(in);
}

// ---------------------------------------------------------------------------
// GlobalAverage

namespace {
struct GaCache : LayerCacheBase {
    Shape in_shape;
};
}  // namespace

Shape GlobalAverageLayer::output_shape(const Shape& in) const {
    if (in.rank() != 3)
        throw std::invalid_argument("GlobalAverage: expects [channels, H, W], got " + in.str());
    return Shape({in.dim(0)});
}

RealTensor GlobalAverageLayer::forward(const RealTensor& x, Mode, std::mt19937_64&,
                                       LayerCachePtr& cache) {
    const int B = x.shape().dim(0), C = x.shape().dim(1);
    const std::size_t plane = static_cast<std::size_t>(x.shape().dim(2)) * x.shape().dim(3);
    RealTensor out(Shape({B, C}));
    for (int b = 0; b < B; ++b)
        for (int ch = 0; ch < C; ++ch) {
            const double* src = x.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            double s = 0.0;
            for (std::size_t i = 0; i < plane; ++i) s += src[i];
            out(b, ch) = s / static_cast<double>(plane);
        }
    auto own = std::make_unique<GaCache>();
    own->in_shape = x.shape();
    cache = std::move(own);
    return out;
}

RealTensor GlobalAverageLayer::backward(const RealTensor& g, LayerCacheBase& cache) {
    auto& c = dynamic_cast<GaCache&>(cache);
    const int B = c.in_shape.dim(0), C = c.in_shape.dim(1);
    const std::size_t plane = static_cast<std::size_t>(c.in_shape.dim(2)) * c.in_shape.dim(3);
    RealTensor out(c.in_shape);
    for (int b = 0; b < B; ++b)
        for (int ch = 0; ch < C; ++ch) {
            const double v = g(b, ch) / static_cast<double>(plane);
            double* dst = out.data() + (static_cast<std::size_t>(b) * C + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] = v;
        }
    return out;
}

// ---------------------------------------------------------------------------
// SoftmaxXEnt

SoftmaxXEntLayer::Result SoftmaxXEntLayer::compute(const RealTensor& logits,
                                                   const std::vector<int>& labels) const {
    const int B = logits.shape().dim(0);
    if (logits.shape().rank() != 2 || logits.shape().dim(1) != classes_)
        throw std::invalid_argument(describe() + ": logits must be [batch, classes], got " +
                                    logits.shape().str());
    if (static_cast<int>(labels.size()) != B)
        throw std::invalid_argument(describe() + ": batch has " + std::to_string(B) +
                                    " samples but " + std::to_string(labels.size()) + " labels");
    Result r;
    r.labels = labels;
    r.probs = RealTensor(logits.shape());
    r.predictions.resize(static_cast<std::size_t>(B));
    double total = 0.0;
    for (int b = 0; b < B; ++b) {
        const int label = labels[static_cast<std::size_t>(b)];
        if (label < 0 || label >= classes_)
            throw std::invalid_argument(describe() + ": label " + std::to_string(label) +
                                        " out of range");
        double peak = logits(b, 0);
        int arg = 0;
        for (int k = 1; k < classes_; ++k)
            if (logits(b, k) > peak) {
                peak = logits(b, k);
                arg = k;
            }
        double z = 0.0;
        for (int k = 0; k < classes_; ++k) z += std::exp(logits(b, k) - peak);
        const double lse = peak + std::log(z);
        for (int k = 0; k < classes_; ++k) r.probs(b, k) = std::exp(logits(b, k) - lse);
        total += lse - logits(b, label);
        r.predictions[static_cast<std::size_t>(b)] = arg;
    }
    r.loss = total / B;
    return r;
}

RealTensor SoftmaxXEntLayer::gradient(const Result& r) const {
    const int B = r.probs.shape().dim(0);
    RealTensor g = r.probs;
    const double inv_b = 1.0 / B;
    for (int b = 0; b < B; ++b) {
        g(b, r.labels[static_cast<std::size_t>(b)]) -= 1.0;
        for (int k = 0; k < classes_; ++k) g(b, k) *= inv_b;
    }
    return g;
}

// ---------------------------------------------------------------------------
// SequentialNetwork

SequentialNetwork::SequentialNetwork(Shape per_sample_input, int classes,
                                     std::vector<std::unique_ptr<Layer>> layers, std::uint64_t seed)
    : input_shape_(std::move(per_sample_input)),
      layers_(std::move(layers)),
      xent_(classes),
      rng_(seed) {
    Shape s = input_shape_;
    for (const auto& layer : layers_) s = layer->output_shape(s);
    if (s.numel() != static_cast<std::size_t>(classes))
        throw std::invalid_argument("network: final layer emits " + s.str() + ", need " +
                                    std::to_string(classes) + " logits");
}

ForwardResult SequentialNetwork::forward(const RealTensor& images, const std::vector<int>& labels,
                                         Mode mode) {
    if (images.shape().rank() != input_shape_.rank() + 1 ||
        !(sample_shape(images.shape()) == input_shape_))
        throw std::invalid_argument("network: batch shape " + images.shape().str() +
                                    " does not match input " + input_shape_.str());
    ForwardResult result;
    result.caches.reserve(layers_.size());
    RealTensor h = images;
    for (auto& layer : layers_) {
        LayerCachePtr cache;
        h = layer->forward(h, mode, rng_, cache);
        result.caches.push_back(std::move(cache));
    }
    // logits arrive as [B, classes] (FC) or [B, C] (global averaging)
    if (h.shape().rank() != 2) {
        const int B = h.shape().dim(0);
        h = RealTensor(Shape({B, static_cast<int>(h.size()) / B}), std::move(h.storage()));
    }
    result.xent = xent_.compute(h, labels);
    result.loss = result.xent.loss;
    result.predictions = result.xent.predictions;
    return result;
}

void SequentialNetwork::backward(ForwardResult& result) {
    if (result.caches.size() != layers_.size())
        throw std::invalid_argument("network: forward caches do not match layer count");
    zero_grads();
    RealTensor g = xent_.gradient(result.xent);
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g, *result.caches[i]);
}

std::vector<ParamSlot> SequentialNetwork::params() {
    std::vector<ParamSlot> slots;
    for (auto& layer : layers_)
        for (auto& s : layer->params()) slots.push_back(s);
    return slots;
}

void SequentialNetwork::zero_grads() {
    for (auto& layer : layers_) layer->zero_grads();
}

std::vector<std::string> SequentialNetwork::layer_names() const {
    std::vector<std::string> names;
    names.reserve(layers_.size() + 1);
    for (const auto& layer : layers_) names.push_back(layer->describe());
    names.push_back(xent_.describe());
    return names;
}

std::size_t SequentialNetwork::parameter_count() {
    std::size_t n = 0;
    for (const auto& s : params()) n += s.value.size();
    return n;
}

void SequentialNetwork::save_params(std::ostream& out) const {
    for (const auto& layer : layers_) layer->save_params(out);
}

void SequentialNetwork::load_params(std::istream& in) {
    for (auto& layer : layers_) layer->load_params(in);
}

// ---------------------------------------------------------------------------
// Architecture builders

namespace {

int scaled_width(double width_scale, int count, int cap) {
    return static_cast<int>(std::ceil(width_scale * std::min(count, cap)));
}

void validate_arch(const ArchitectureSpec& spec, const Shape& input) {
    std::vector<std::string> problems;
    if (input.rank() != 3) problems.push_back("input must be [channels, H, W], got " + input.str());
    if (spec.family == Family::SpectralPoolNet && (spec.gamma < 0.25 || spec.gamma > 0.85))
        problems.push_back("gamma must lie in [0.25, 0.85], got " + std::to_string(spec.gamma));
    if (spec.depth < 1) problems.push_back("depth must be >= 1");
    if (spec.classes < 2) problems.push_back("classes must be >= 2");
    if (spec.filter_size != 3 && spec.filter_size != 5)
        problems.push_back("filter_size must be 3 or 5, got " + std::to_string(spec.filter_size));
    if (!(spec.width_scale > 0.0) || spec.width_scale > 1.0)
        problems.push_back("width_scale must lie in (0, 1]");
    if (spec.filter_cap < 1) problems.push_back("filter_cap must be >= 1");
    if (spec.alpha < 0.0 || spec.alpha > 1.0 || spec.beta < 0.0 || spec.beta > 1.0)
        problems.push_back("alpha and beta must lie in [0, 1]");
    if (!problems.empty()) {
        std::string msg = "build_architecture:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw std::invalid_argument(msg);
    }
}

}  // namespace

SequentialNetwork build_architecture(const ArchitectureSpec& spec, const Shape& input,
                                     std::uint64_t seed) {
    validate_arch(spec, input);
    std::mt19937_64 init_rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    const int fs = spec.filter_size;
    int ch = input.dim(0), H = input.dim(1), W = input.dim(2);
    auto conv = [&](int filters, int size) {
        layers.push_back(std::make_unique<ConvLayer>(filters, ch, size, size, spec.parametrization,
                                                     init_rng));
        ch = filters;
    };
    auto relu = [&] { layers.push_back(std::make_unique<ReluLayer>()); };
    auto maxpool = [&](int window, int stride) {
        layers.push_back(std::make_unique<MaxPoolLayer>(window, stride));
        H = (H - window) / stride + 1;
        W = (W - window) / stride + 1;
    };

    switch (spec.family) {
        case Family::Generic: {
            conv(scaled_width(spec.width_scale, 96, spec.filter_cap), fs);
            relu();
            maxpool(3, 2);
            conv(scaled_width(spec.width_scale, 192, spec.filter_cap), fs);
            relu();
            maxpool(3, 2);
            const int features = ch * H * W;
            const int fc1 = scaled_width(spec.width_scale, 1024, 1 << 30);
            const int fc2 = scaled_width(spec.width_scale, 512, 1 << 30);
            layers.push_back(std::make_unique<FullyConnectedLayer>(fc1, features, init_rng));
            relu();
            layers.push_back(std::make_unique<FullyConnectedLayer>(fc2, fc1, init_rng));
            relu();
            layers.push_back(std::make_unique<FullyConnectedLayer>(spec.classes, fc2, init_rng));
            break;
        }
        case Family::Deep: {
            const int c96 = scaled_width(spec.width_scale, 96, spec.filter_cap);
            const int c192 = scaled_width(spec.width_scale, 192, spec.filter_cap);
            conv(c96, fs);
            relu();
            conv(c96, fs);
            relu();
            maxpool(3, 2);
            conv(c192, fs);
            relu();
            conv(c192, fs);
            relu();
            conv(c192, fs);
            relu();
            maxpool(3, 2);
            conv(c192, 1);
            relu();
            conv(spec.classes, 1);
            layers.push_back(std::make_unique<GlobalAverageLayer>());
            break;
        }
        case Family::SpectralPoolNet: {
            for (int m = 1; m <= spec.depth; ++m) {
                conv(scaled_width(spec.width_scale, 96 + 32 * m, spec.filter_cap), fs);
                relu();
                const int target_h = static_cast<int>(std::floor(spec.gamma * H));
                const int target_w = static_cast<int>(std::floor(spec.gamma * W));
                if (target_h >= 1 && target_w >= 1) {
                    SpectralPoolConfig cfg;
                    cfg.out_h = target_h;
                    cfg.out_w = target_w;
                    cfg.scale_mode = ScaleMode::MeanPreserving;
                    cfg.dropout = FrequencyDropoutSpec{spec.alpha, spec.beta, m, spec.depth};
                    layers.push_back(std::make_unique<SpectralPoolLayer>(cfg));
                    H = target_h;
                    W = target_w;
                    relu();
                }
            }
            conv(scaled_width(spec.width_scale, 96 + 32 * spec.depth, spec.filter_cap), 1);
            relu();
            conv(spec.classes, 1);
            layers.push_back(std::make_unique<GlobalAverageLayer>());
            break;
        }
    }
    // Zero the classifier so untrained networks emit uniform predictions and
    // loss starts at exactly ln(classes).
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        auto slots = (*it)->params();
        if (slots.empty()) continue;
        for (auto& slot : slots)
            for (auto& v : slot.value) v = 0.0;
        break;
    }
    return SequentialNetwork(input, spec.classes, std::move(layers), seed);
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string family_name(Family f) {
    switch (f) {
        case Family::SpectralPoolNet: return "spectral_pool";
        case Family::Generic: return "generic";
        case Family::Deep: return "deep";
    }
    return "generic";
}

Family family_from_name(const std::string& name) {
    if (name == "spectral_pool") return Family::SpectralPoolNet;
    if (name == "generic") return Family::Generic;
    if (name == "deep") return Family::Deep;
    throw std::invalid_argument("unknown architecture family: " + name);
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_checkpoint(const std::string& path, const ArchitectureSpec& spec, const Shape& input,
                     std::uint64_t seed, const SequentialNetwork& net) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    f << "spectral-cnn-checkpoint v1\n";
    f << "family=" << family_name(spec.family) << "\n";
    f << "gamma=" << fmt_double(spec.gamma) << "\n";
    f << "depth=" << spec.depth << "\n";
    f << "alpha=" << fmt_double(spec.alpha) << "\n";
    f << "beta=" << fmt_double(spec.beta) << "\n";
    f << "classes=" << spec.classes << "\n";
    f << "filter_size=" << spec.filter_size << "\n";
    f << "width_scale=" << fmt_double(spec.width_scale) << "\n";
    f << "filter_cap=" << spec.filter_cap << "\n";
    f << "parametrization="
      << (spec.parametrization == Parametrization::Spectral ? "spectral" : "spatial") << "\n";
    f << "input=" << input.dim(0) << "," << input.dim(1) << "," << input.dim(2) << "\n";
    f << "seed=" << seed << "\n";
    f << "---\n";
    net.save_params(f);
}

SequentialNetwork load_checkpoint(const std::string& path, ArchitectureSpec* spec_out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    std::getline(f, line);
    if (line != "spectral-cnn-checkpoint v1")
        throw std::runtime_error("not a checkpoint file: " + path);
    std::map<std::string, std::string> kv;
    while (std::getline(f, line) && line != "---") {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("malformed checkpoint header line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw std::runtime_error("checkpoint header missing key: " + key);
        return it->second;
    };
    ArchitectureSpec spec;
    spec.family = family_from_name(need("family"));
    spec.gamma = std::stod(need("gamma"));
    spec.depth = std::stoi(need("depth"));
    spec.alpha = std::stod(need("alpha"));
    spec.beta = std::stod(need("beta"));
    spec.classes = std::stoi(need("classes"));
    spec.filter_size = std::stoi(need("filter_size"));
    spec.width_scale = std::stod(need("width_scale"));
    spec.filter_cap = std::stoi(need("filter_cap"));
    spec.parametrization =
        need("parametrization") == "spectral" ? Parametrization::Spectral : Parametrization::Spatial;
    std::istringstream dims(need("input"));
    std::vector<int> in_dims;
    for (std::string part; std::getline(dims, part, ',');) in_dims.push_back(std::stoi(part));
    const std::uint64_t seed = std::stoull(need("seed"));

    SequentialNetwork net = build_architecture(spec, Shape(in_dims), seed);
    net.load_params(f);
    if (spec_out != nullptr) *spec_out = spec;
    return net;
}

}  // namespace spectral
