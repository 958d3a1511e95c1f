#include "cropscan/trainer.hpp"

#include <cmath>

#include "cropscan/rng.hpp"

namespace cropscan {

CrossEntropyResult cross_entropy(const Tensor& probs, ClassId label) {
    if (probs.rank() != 1)
        throw ShapeError("cross_entropy expects a probability vector");
    const std::size_t k = static_cast<std::size_t>(label);
    if (k >= probs.size())
        throw DomainError("label " + std::to_string(k) +
                          " outside the class range");
    CrossEntropyResult result;
    // the epsilon keeps log finite; the floor keeps a perfect prediction
    // from reporting a (tiny) negative loss
    result.loss = std::max(0.0, -std::log(probs[k] + 1e-12));
    result.grad_logits = probs;
    result.grad_logits[k] -= 1.0;
    return result;
}

EvalResult evaluate(const Network& network,
                    std::span<const LabeledImage> samples) {
    EvalResult result;
    result.predictions.reserve(samples.size());
    Activations acts;
    for (const auto& sample : samples) {
        const Tensor& probs = network.forward(sample.image, acts);
        const auto ce = cross_entropy(probs, sample.label);
        result.loss += ce.loss;
        int best = 0;
        for (std::size_t j = 1; j < probs.size(); ++j)
            if (probs[j] > probs[best]) best = static_cast<int>(j);
        result.predictions.push_back(best);
        if (best == static_cast<int>(sample.label)) result.accuracy += 1.0;
    }
    if (!samples.empty()) {
        result.loss /= static_cast<double>(samples.size());
        result.accuracy /= static_cast<double>(samples.size());
    }
    return result;
}

TrainResult train(Network network, std::span<const LabeledImage> train_set,
                  std::span<const LabeledImage> val_set,
                  const Hyperparams& params) {
    if (train_set.empty()) throw InputError("training set is empty");
    if (params.batch_size == 0) throw InputError("batch size must be >= 1");
    for (const auto& s : train_set)
        if (static_cast<std::size_t>(s.label) >= network.config().class_count)
            throw DomainError("label outside the configured class count");

    ParamSet grads = network.make_param_set();
    ParamSet velocity = network.make_param_set();
    Activations acts;
    FlipCache flips;
    Rng rng(params.seed);

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto params_of = [](Network& net) { return net.parameters(); };
    auto tensors_of = [](ParamSet& set) {
        std::vector<Tensor*> out;
        for (std::size_t i = 0; i < set.conv_w.size(); ++i) {
            out.push_back(&set.conv_w[i]);
            out.push_back(&set.conv_b[i]);
        }
        for (std::size_t i = 0; i < set.dense_w.size(); ++i) {
            out.push_back(&set.dense_w[i]);
            out.push_back(&set.dense_b[i]);
        }
        return out;
    };

    TrainResult result;
    std::vector<Tensor> best_params;
    double best_val_accuracy = -1.0;

    for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
        rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t correct = 0;

        for (std::size_t start = 0; start < order.size();
             start += params.batch_size) {
            const std::size_t count =
                std::min(params.batch_size, order.size() - start);
            grads.zero();
            network.build_flip_cache(flips);  // parameters changed last step
            const double inv_count = 1.0 / static_cast<double>(count);

            for (std::size_t b = 0; b < count; ++b) {
                const LabeledImage& sample = train_set[order[start + b]];
                const Tensor& probs = network.forward(sample.image, acts);
                auto ce = cross_entropy(probs, sample.label);
                epoch_loss += ce.loss;

                int best = 0;
                for (std::size_t j = 1; j < probs.size(); ++j)
                    if (probs[j] > probs[best]) best = static_cast<int>(j);
                if (best == static_cast<int>(sample.label)) ++correct;

                for (std::size_t j = 0; j < ce.grad_logits.size(); ++j)
                    ce.grad_logits[j] *= inv_count;
                network.backward(acts, ce.grad_logits, grads, &flips);
            }

            auto ps = params_of(network);
            auto gs = tensors_of(grads);
            auto vs = tensors_of(velocity);

            double scale = 1.0;
            if (params.clip_norm > 0.0) {
                double sq = 0.0;
                for (Tensor* g : gs)
                    for (std::size_t j = 0; j < g->size(); ++j)
                        sq += (*g)[j] * (*g)[j];
                const double norm = std::sqrt(sq);
                if (norm > params.clip_norm) scale = params.clip_norm / norm;
            }

            // classic momentum: v <- mu v - lr g; w <- w + v
            for (std::size_t t = 0; t < ps.size(); ++t) {
                Tensor& w = *ps[t];
                Tensor& g = *gs[t];
                Tensor& v = *vs[t];
                for (std::size_t j = 0; j < w.size(); ++j) {
                    v[j] = params.momentum * v[j] -
                           params.learning_rate * scale * g[j];
                    w[j] += v[j];
                }
            }
        }

        TrainRecord record;
        record.epoch = epoch;
        record.train_loss = epoch_loss / static_cast<double>(order.size());
        record.train_accuracy =
            static_cast<double>(correct) / static_cast<double>(order.size());
        if (!val_set.empty()) {
            const EvalResult val = evaluate(network, val_set);
            record.val_loss = val.loss;
            record.val_accuracy = val.accuracy;
            if (val.accuracy > best_val_accuracy) {
                best_val_accuracy = val.accuracy;
                result.best_epoch = epoch;
                best_params.clear();
                for (const Tensor* p : std::as_const(network).parameters())
                    best_params.push_back(*p);
            }
        }
        result.records.push_back(record);

        if (params.target_train_accuracy &&
            record.train_accuracy >= *params.target_train_accuracy)
            break;
    }

    if (!best_params.empty()) {
        auto ps = network.parameters();
        for (std::size_t t = 0; t < ps.size(); ++t) *ps[t] = best_params[t];
    } else {
        result.best_epoch = result.records.empty()
                                ? 0
                                : result.records.back().epoch;
    }
    result.network = std::move(network);
    return result;
}

}  // namespace cropscan
