#include "cropscan/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cropscan/gemm.hpp"
#include "cropscan/rng.hpp"

namespace cropscan {

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'S', 'N', 'W', '0', '0', '0', '1'};

void add_into(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

std::size_t NetworkConfig::conv_layer_count() const {
    std::size_t n = 0;
    for (const auto& block : conv_blocks) n += block.size();
    return n;
}

NetworkConfig micro_vgg_config(std::uint64_t seed) {
    NetworkConfig config;
    config.input_shape = {3, 50, 50};
    config.conv_blocks = {{32, 32},
                          {64, 64},
                          {128, 128, 128},
                          {128, 128, 128},
                          {128, 128, 128}};
    config.dense_widths = {256, 256, 8};
    config.class_count = 8;
    config.seed = seed;
    return config;
}

std::string config_to_json(const NetworkConfig& config) {
    nlohmann::json j;
    j["input_shape"] = config.input_shape;
    j["conv_blocks"] = config.conv_blocks;
    j["dense_widths"] = config.dense_widths;
    j["class_count"] = config.class_count;
    j["seed"] = config.seed;
    return j.dump();
}

NetworkConfig config_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    NetworkConfig config;
    const auto shape = j.at("input_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3) throw ConfigError("input_shape must have 3 extents");
    std::copy(shape.begin(), shape.end(), config.input_shape.begin());
    config.conv_blocks =
        j.at("conv_blocks").get<std::vector<std::vector<std::size_t>>>();
    config.dense_widths = j.at("dense_widths").get<std::vector<std::size_t>>();
    config.class_count = j.at("class_count").get<std::size_t>();
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

void ParamSet::zero() {
    for (auto& t : conv_w) t.fill(0.0);
    for (auto& t : conv_b) t.fill(0.0);
    for (auto& t : dense_w) t.fill(0.0);
    for (auto& t : dense_b) t.fill(0.0);
}

Network Network::build_empty(const NetworkConfig& config) {
    if (config.conv_blocks.empty() || config.dense_widths.empty())
        throw ConfigError("network needs at least one conv block and one dense layer");
    if (config.dense_widths.back() != config.class_count)
        throw ConfigError("final dense width must equal the class count");

    Network net;
    net.config_ = config;

    std::size_t channels = config.input_shape[0];
    std::size_t h = config.input_shape[1];
    std::size_t w = config.input_shape[2];
    for (const auto& block : config.conv_blocks) {
        if (block.empty()) throw ConfigError("empty conv block");
        for (const std::size_t width : block) {
            if (width == 0) throw ConfigError("conv width must be positive");
            net.conv_in_shape_.push_back({channels, h, w});
            ConvLayer layer;
            layer.weights = Tensor({width, channels, 3, 3});
            layer.bias = Tensor({width});
            net.convs_.push_back(std::move(layer));
            channels = width;
        }
        if (h < 2 || w < 2)
            throw ConfigError("spatial size " + std::to_string(h) + "x" +
                              std::to_string(w) + " too small to pool");
        h /= 2;
        w /= 2;
    }
    net.flatten_size_ = channels * h * w;

    std::size_t in_features = net.flatten_size_;
    for (const std::size_t width : config.dense_widths) {
        if (width == 0) throw ConfigError("dense width must be positive");
        DenseLayer layer;
        layer.weights = Tensor({width, in_features});
        layer.bias = Tensor({width});
        net.denses_.push_back(std::move(layer));
        in_features = width;
    }
    return net;
}

Network Network::build(const NetworkConfig& config) {
    Network net = build_empty(config);
    Rng rng(config.seed);
    for (std::size_t i = 0; i < net.convs_.size(); ++i) {
        auto& layer = net.convs_[i];
        const double fan_in =
            static_cast<double>(layer.weights.extent(1)) * 9.0;
        const double stddev = std::sqrt(2.0 / fan_in);
        for (std::size_t j = 0; j < layer.weights.size(); ++j)
            layer.weights[j] = rng.normal() * stddev;
    }
    for (auto& layer : net.denses_) {
        const double fan_in = static_cast<double>(layer.weights.extent(1));
        const double stddev = std::sqrt(2.0 / fan_in);
        for (std::size_t j = 0; j < layer.weights.size(); ++j)
            layer.weights[j] = rng.normal() * stddev;
    }
    return net;
}

Network build_micro_vgg(const NetworkConfig& config) {
    if (config.conv_layer_count() != 13)
        throw ConfigError("micro-VGG requires exactly 13 conv layers, got " +
                          std::to_string(config.conv_layer_count()));
    if (config.dense_layer_count() != 3)
        throw ConfigError("micro-VGG requires exactly 3 dense layers, got " +
                          std::to_string(config.dense_layer_count()));
    if (config.class_count != 8 || config.dense_widths.back() != 8)
        throw ConfigError("micro-VGG classifies 8 classes");
    return Network::build(config);
}

void Network::ensure_activations(Activations& acts) const {
    if (acts.conv_post.size() == convs_.size() &&
        acts.dense_in.size() == denses_.size())
        return;
    acts.conv_col.resize(convs_.size());
    acts.conv_post.resize(convs_.size());
    acts.pools.resize(config_.conv_blocks.size());
    acts.dense_in.resize(denses_.size());
    acts.dense_z.resize(denses_.size());
    std::size_t max_col = 0;
    for (std::size_t i = 0; i < convs_.size(); ++i) {
        const auto [c, h, w] = conv_in_shape_[i];
        const std::size_t c_out = convs_[i].weights.extent(0);
        acts.conv_col[i].resize(c * 9 * h * w);
        acts.conv_post[i] = Tensor({c_out, h, w});
        max_col = std::max(max_col, c_out * 9 * h * w);
    }
    acts.scratch_col.resize(max_col);
}

const Tensor& Network::forward(const Tensor& image, Activations& acts) const {
    if (image.rank() != 3 || image.extent(0) != config_.input_shape[0] ||
        image.extent(1) != config_.input_shape[1] ||
        image.extent(2) != config_.input_shape[2])
        throw ShapeError("network input must be " +
                         shape_to_string({config_.input_shape[0],
                                          config_.input_shape[1],
                                          config_.input_shape[2]}) +
                         ", got " + shape_to_string(image.shape()));
    ensure_activations(acts);

    const Tensor* x = &image;
    std::size_t ci = 0;
    for (std::size_t b = 0; b < config_.conv_blocks.size(); ++b) {
        for (std::size_t j = 0; j < config_.conv_blocks[b].size(); ++j, ++ci) {
            const ConvLayer& layer = convs_[ci];
            const auto [c, h, w] = conv_in_shape_[ci];
            const std::size_t c_out = layer.weights.extent(0);
            const std::size_t plane = h * w;
            double* col = acts.conv_col[ci].data();
            detail::im2col_3x3(x->data(), c, h, w, col);
            Tensor& out = acts.conv_post[ci];
            detail::gemm_nn(layer.weights.data(), col, out.data(), c_out,
                            c * 9, plane);
            // bias + ReLU fused; post > 0 doubles as the backward mask
            for (std::size_t o = 0; o < c_out; ++o) {
                const double bias = layer.bias[o];
                double* row = out.data() + o * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double v = row[i] + bias;
                    row[i] = v > 0.0 ? v : 0.0;
                }
            }
            x = &out;
        }
        acts.pools[b] = maxpool2(*x);
        x = &acts.pools[b].output;
    }

    acts.dense_in[0] = *x;
    acts.dense_in[0].reshape({flatten_size_});
    for (std::size_t i = 0; i < denses_.size(); ++i) {
        acts.dense_z[i] = dense_forward(acts.dense_in[i], denses_[i].weights,
                                        denses_[i].bias);
        if (i + 1 < denses_.size())
            acts.dense_in[i + 1] = relu(acts.dense_z[i]);
    }
    acts.probs = softmax(acts.dense_z.back());
    return acts.probs;
}

Tensor Network::forward(const Tensor& image) const {
    Activations acts;
    return forward(image, acts);
}

void Network::build_flip_cache(FlipCache& cache) const {
    cache.per_conv.resize(convs_.size());
    for (std::size_t ci = 0; ci < convs_.size(); ++ci) {
        const ConvLayer& layer = convs_[ci];
        const std::size_t c_in = layer.weights.extent(1);
        const std::size_t c_out = layer.weights.extent(0);
        cache.per_conv[ci].resize(c_in * c_out * 9);
        double* flipped = cache.per_conv[ci].data();
        const double* kw = layer.weights.data();
        for (std::size_t o = 0; o < c_out; ++o)
            for (std::size_t c = 0; c < c_in; ++c)
                for (std::size_t t = 0; t < 9; ++t)
                    flipped[(c * c_out + o) * 9 + (8 - t)] =
                        kw[(o * c_in + c) * 9 + t];
    }
}

void Network::backward(Activations& acts, const Tensor& grad_logits,
                       ParamSet& grads, const FlipCache* flips) const {
    Tensor g = grad_logits;
    for (std::size_t i = denses_.size(); i-- > 0;) {
        DenseGrads dg = dense_backward(acts.dense_in[i], denses_[i].weights, g);
        add_into(grads.dense_w[i], dg.weights);
        add_into(grads.dense_b[i], dg.bias);
        g = std::move(dg.input);
        if (i > 0) g = relu_backward(acts.dense_z[i - 1], g);
    }

    g.reshape(acts.pools.back().output.shape());

    FlipCache local;
    if (!flips) {
        build_flip_cache(local);
        flips = &local;
    }
    std::vector<double>& scratch_col = acts.scratch_col;

    std::size_t ci = convs_.size();
    for (std::size_t b = config_.conv_blocks.size(); b-- > 0;) {
        g = maxpool2_backward(acts.pools[b], g);
        for (std::size_t j = config_.conv_blocks[b].size(); j-- > 0;) {
            --ci;
            const ConvLayer& layer = convs_[ci];
            const auto [c_in, h, w] = conv_in_shape_[ci];
            const std::size_t c_out = layer.weights.extent(0);
            const std::size_t plane = h * w;

            // ReLU mask in place: post > 0 marks the active elements
            {
                const Tensor& post = acts.conv_post[ci];
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (!(post[i] > 0.0)) g[i] = 0.0;
            }

            for (std::size_t o = 0; o < c_out; ++o) {
                const double* row = g.data() + o * plane;
                double s = 0.0;
                for (std::size_t i = 0; i < plane; ++i) s += row[i];
                grads.conv_b[ci][o] += s;
            }
            detail::gemm_nt(g.data(), acts.conv_col[ci].data(),
                            grads.conv_w[ci].data(), c_out, plane, c_in * 9,
                            /*accumulate=*/true);

            if (ci == 0) break;  // no gradient needed for the input image

            detail::im2col_3x3(g.data(), c_out, h, w, scratch_col.data());
            Tensor gin({c_in, h, w});
            detail::gemm_nn(flips->per_conv[ci].data(), scratch_col.data(),
                            gin.data(), c_in, c_out * 9, plane);
            g = std::move(gin);
        }
    }
}

Prediction Network::predict(const Tensor& image, Activations& acts) const {
    if (image.rank() != 3 || image.extent(0) != config_.input_shape[0] ||
        image.extent(1) != config_.input_shape[1] ||
        image.extent(2) != config_.input_shape[2])
        throw ShapeError("predict input must be " +
                         shape_to_string({config_.input_shape[0],
                                          config_.input_shape[1],
                                          config_.input_shape[2]}) +
                         ", got " + shape_to_string(image.shape()));
    for (std::size_t i = 0; i < image.size(); ++i)
        if (!(image[i] >= 0.0 && image[i] <= 1.0))
            throw DomainError("predict input values must lie in [0,1]");

    const Tensor& probs = forward(image, acts);
    Prediction prediction;
    prediction.probabilities = probs;
    prediction.label = 0;
    prediction.confidence = probs[0];
    for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > prediction.confidence) {  // strict: ties keep smaller id
            prediction.confidence = probs[k];
            prediction.label = static_cast<int>(k);
        }
    }
    return prediction;
}

Prediction Network::predict(const Tensor& image) const {
    Activations acts;
    return predict(image, acts);
}

ParamSet Network::make_param_set() const {
    ParamSet set;
    for (const auto& layer : convs_) {
        set.conv_w.emplace_back(layer.weights.shape());
        set.conv_b.emplace_back(layer.bias.shape());
    }
    for (const auto& layer : denses_) {
        set.dense_w.emplace_back(layer.weights.shape());
        set.dense_b.emplace_back(layer.bias.shape());
    }
    return set;
}

std::vector<Tensor*> Network::parameters() {
    std::vector<Tensor*> params;
    for (auto& layer : convs_) {
        params.push_back(&layer.weights);
        params.push_back(&layer.bias);
    }
    for (auto& layer : denses_) {
        params.push_back(&layer.weights);
        params.push_back(&layer.bias);
    }
    return params;
}

std::vector<const Tensor*> Network::parameters() const {
    std::vector<const Tensor*> params;
    for (const auto& layer : convs_) {
        params.push_back(&layer.weights);
        params.push_back(&layer.bias);
    }
    for (const auto& layer : denses_) {
        params.push_back(&layer.weights);
        params.push_back(&layer.bias);
    }
    return params;
}

void Network::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());

    const std::string header = config_to_json(config_);
    const std::uint64_t header_len = header.size();

    std::uint64_t param_count = 0;
    for (const Tensor* t : parameters()) param_count += t->size();

    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(&param_count), sizeof(param_count));
    for (const Tensor* t : parameters())
        out.write(reinterpret_cast<const char*>(t->data()),
                  static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (!out) throw IoError("checkpoint write failed: " + path.string());
}

Network Network::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw IoError("not a checkpoint file (bad magic): " + path.string());

    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in || header_len > (1u << 20))
        throw IoError("corrupt checkpoint header: " + path.string());
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));

    Network net = build_empty(config_from_json(header));

    std::uint64_t param_count = 0;
    in.read(reinterpret_cast<char*>(&param_count), sizeof(param_count));
    std::uint64_t expected = 0;
    for (const Tensor* t : std::as_const(net).parameters())
        expected += t->size();
    if (!in || param_count != expected)
        throw IoError("checkpoint parameter count mismatch: " + path.string());
    for (Tensor* t : net.parameters()) {
        in.read(reinterpret_cast<char*>(t->data()),
                static_cast<std::streamsize>(t->size() * sizeof(double)));
        if (!in) throw IoError("truncated checkpoint: " + path.string());
    }
    return net;
}

}  // namespace cropscan
