#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cropscan/dataset.hpp"
#include "cropscan/network.hpp"

namespace cropscan {

struct Hyperparams {
    std::size_t epochs = 4;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
    /// Global-norm gradient clip. Deep unnormalized stacks overshoot and
    /// collapse without it; 0 disables.
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
    /// When set, training stops after the first epoch whose training
    /// accuracy reaches the target. Off by default.
    std::optional<double> target_train_accuracy;
};

struct TrainRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct CrossEntropyResult {
    double loss = 0.0;
    Tensor grad_logits;  // probs - onehot(label)
};

/// loss = -log(probs[label] + 1e-12); the returned gradient is taken with
/// respect to the logits feeding the softmax.
CrossEntropyResult cross_entropy(const Tensor& probs, ClassId label);

struct TrainResult {
    std::vector<TrainRecord> records;
    Network network;  // parameters from the best-validation-accuracy epoch
    std::size_t best_epoch = 0;
};

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<int> predictions;  // in input order
};

/// Mean loss and accuracy over a sample set; predictions in input order.
EvalResult evaluate(const Network& network,
                    std::span<const LabeledImage> samples);

/// Minibatch SGD with momentum. Sample order is reshuffled every epoch from
/// the seeded generator; gradients are averaged over each batch. One
/// TrainRecord per epoch. Returns the parameters of the epoch with the best
/// validation accuracy (the final epoch when the validation set is empty).
/// Training and validation sets must be disjoint; this is the caller's
/// contract and is not re-verified.
TrainResult train(Network network, std::span<const LabeledImage> train_set,
                  std::span<const LabeledImage> val_set,
                  const Hyperparams& params);

}  // namespace cropscan
