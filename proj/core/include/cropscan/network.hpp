#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cropscan/kernels.hpp"
#include "cropscan/tensor.hpp"

namespace cropscan {

/// Layer stack description. Every conv block is a run of 3x3/pad-1
/// convolutions followed by one 2x2 max pool; dense layers follow the
/// flatten, ReLU between them, softmax after the last.
struct NetworkConfig {
    std::array<std::size_t, 3> input_shape{3, 50, 50};  // [C,H,W]
    std::vector<std::vector<std::size_t>> conv_blocks;
    std::vector<std::size_t> dense_widths;
    std::size_t class_count = 8;
    std::uint64_t seed = 0;

    std::size_t conv_layer_count() const;
    std::size_t dense_layer_count() const { return dense_widths.size(); }
};

/// The default 16-weight-layer stack for 50x50 inputs: conv widths
/// [32,32 | 64,64 | 128,128,128 | 128,128,128 | 128,128,128], then
/// dense [256,256,8]. Spatial chain 50 -> 25 -> 12 -> 6 -> 3 -> 1.
NetworkConfig micro_vgg_config(std::uint64_t seed = 0);

std::string config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const std::string& text);

struct Prediction {
    int label = 0;
    double confidence = 0.0;
    Tensor probabilities;
};

/// Parameter-shaped tensor set; used for gradients and optimizer state.
struct ParamSet {
    std::vector<Tensor> conv_w, conv_b, dense_w, dense_b;
    void zero();
};

/// Per-image forward state kept for the backward pass. Reusable across
/// calls; all buffers are sized on first use.
struct Activations {
    std::vector<std::vector<double>> conv_col;  // patch matrix per conv layer
    std::vector<Tensor> conv_post;              // post-ReLU output per conv
    std::vector<MaxPoolResult> pools;           // one per block
    std::vector<Tensor> dense_in;
    std::vector<Tensor> dense_z;                // pre-activation per dense
    Tensor probs;
    std::vector<double> scratch_col;            // backward patch matrix
};

/// Spatially flipped, channel-transposed conv kernels; the input-gradient
/// convolution consumes these. Rebuild after every parameter update.
struct FlipCache {
    std::vector<std::vector<double>> per_conv;
};

class Network {
public:
    Network() = default;

    /// He-initialized stack from the seeded generator; biases zero.
    static Network build(const NetworkConfig& config);

    const NetworkConfig& config() const { return config_; }

    /// Class probabilities for one image of the configured input shape.
    Tensor forward(const Tensor& image) const;
    const Tensor& forward(const Tensor& image, Activations& acts) const;

    /// Accumulates parameter gradients from d(loss)/d(logits). `acts` must
    /// hold the forward state of the same image; its scratch is reused and
    /// the activation gradients are computed in place. When `flips` is
    /// given it must match the current parameters (see build_flip_cache);
    /// otherwise the flipped kernels are rebuilt per call.
    void backward(Activations& acts, const Tensor& grad_logits,
                  ParamSet& grads, const FlipCache* flips = nullptr) const;

    void build_flip_cache(FlipCache& cache) const;

    /// Argmax class (smallest index on ties) with its probability.
    /// Input must match the configured shape with values in [0,1].
    Prediction predict(const Tensor& image) const;
    Prediction predict(const Tensor& image, Activations& acts) const;

    /// Zero tensors shaped like the parameters.
    ParamSet make_param_set() const;

    /// Parameters in fixed order: conv (weights, bias) pairs, then dense.
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;

    std::size_t flatten_size() const { return flatten_size_; }

    /// Versioned binary checkpoint: config, seed and raw parameter buffers.
    /// A loaded network reproduces predict outputs bit-exactly.
    void save(const std::filesystem::path& path) const;
    static Network load(const std::filesystem::path& path);

private:
    struct ConvLayer {
        Tensor weights;  // [C_out,C_in,3,3]
        Tensor bias;     // [C_out]
    };
    struct DenseLayer {
        Tensor weights;  // [M,N]
        Tensor bias;     // [M]
    };

    static Network build_empty(const NetworkConfig& config);
    void ensure_activations(Activations& acts) const;

    NetworkConfig config_;
    std::vector<ConvLayer> convs_;
    std::vector<DenseLayer> denses_;
    // input [C,H,W] per conv layer, derived from config at build time
    std::vector<std::array<std::size_t, 3>> conv_in_shape_;
    std::size_t flatten_size_ = 0;
};

/// Validated factory for the canonical 13-conv + 3-dense stack; rejects any
/// other structure.
Network build_micro_vgg(const NetworkConfig& config);

}  // namespace cropscan
