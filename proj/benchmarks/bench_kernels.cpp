#include <benchmark/benchmark.h>

#include "cropscan/gemm.hpp"
#include "cropscan/kernels.hpp"
#include "cropscan/network.hpp"
#include "cropscan/rng.hpp"
#include "cropscan/tensor.hpp"
#include "cropscan/trainer.hpp"

using namespace cropscan;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
    Rng rng(seed);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_gemm_nn(benchmark::State& state) {
    const std::size_t m = state.range(0);
    const std::size_t k = state.range(1);
    const std::size_t n = state.range(2);
    const Tensor a = random_tensor({m, k}, 1);
    const Tensor b = random_tensor({k, n}, 2);
    Tensor c({m, n});
    for (auto _ : state) {
        detail::gemm_nn(a.data(), b.data(), c.data(), m, k, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOP/s"] = benchmark::Counter(
        2.0 * m * k * n * state.iterations() / 1e9, benchmark::Counter::kIsRate);
}

void BM_gemm_nt(benchmark::State& state) {
    const std::size_t m = state.range(0);
    const std::size_t n = state.range(1);
    const std::size_t p = state.range(2);
    const Tensor a = random_tensor({m, n}, 3);
    const Tensor b = random_tensor({p, n}, 4);
    Tensor c({m, p});
    for (auto _ : state) {
        detail::gemm_nt(a.data(), b.data(), c.data(), m, n, p);
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOP/s"] = benchmark::Counter(
        2.0 * m * n * p * state.iterations() / 1e9, benchmark::Counter::kIsRate);
}

void BM_im2col(benchmark::State& state) {
    const std::size_t c = state.range(0);
    const std::size_t hw = state.range(1);
    const Tensor input = random_tensor({c, hw, hw}, 5);
    std::vector<double> col(c * 9 * hw * hw);
    for (auto _ : state) {
        detail::im2col_3x3(input.data(), c, hw, hw, col.data());
        benchmark::DoNotOptimize(col.data());
    }
}

void BM_conv2d_forward(benchmark::State& state) {
    const std::size_t c_in = state.range(0);
    const std::size_t c_out = state.range(1);
    const std::size_t hw = state.range(2);
    const Tensor input = random_tensor({c_in, hw, hw}, 6);
    const Tensor kernels = random_tensor({c_out, c_in, 3, 3}, 7);
    const Tensor bias = random_tensor({c_out}, 8);
    for (auto _ : state) {
        Tensor out = conv2d_forward(input, kernels, bias);
        benchmark::DoNotOptimize(out.data());
    }
    state.counters["GFLOP/s"] = benchmark::Counter(
        2.0 * c_out * c_in * 9 * hw * hw * state.iterations() / 1e9,
        benchmark::Counter::kIsRate);
}

void BM_conv2d_backward(benchmark::State& state) {
    const std::size_t c_in = state.range(0);
    const std::size_t c_out = state.range(1);
    const std::size_t hw = state.range(2);
    const Tensor input = random_tensor({c_in, hw, hw}, 9);
    const Tensor kernels = random_tensor({c_out, c_in, 3, 3}, 10);
    const Tensor grad_out = random_tensor({c_out, hw, hw}, 11);
    for (auto _ : state) {
        Conv2dGrads grads = conv2d_backward(input, kernels, grad_out);
        benchmark::DoNotOptimize(grads.input.data());
    }
}

void BM_maxpool2(benchmark::State& state) {
    const Tensor input = random_tensor({32, 50, 50}, 12);
    for (auto _ : state) {
        MaxPoolResult result = maxpool2(input);
        benchmark::DoNotOptimize(result.output.data());
    }
}

void BM_network_forward(benchmark::State& state) {
    const Network net = build_micro_vgg(micro_vgg_config(1));
    const Tensor image = random_tensor({3, 50, 50}, 13);
    Tensor clamped = image;
    for (std::size_t i = 0; i < clamped.size(); ++i)
        clamped[i] = 0.5 * (clamped[i] + 1.0);
    Activations acts;
    for (auto _ : state) {
        const Tensor& probs = net.forward(clamped, acts);
        benchmark::DoNotOptimize(probs.data());
    }
}

void BM_network_train_step(benchmark::State& state) {
    Network net = build_micro_vgg(micro_vgg_config(2));
    const Tensor image = random_tensor({3, 50, 50}, 14);
    Tensor clamped = image;
    for (std::size_t i = 0; i < clamped.size(); ++i)
        clamped[i] = 0.5 * (clamped[i] + 1.0);
    Activations acts;
    ParamSet grads = net.make_param_set();
    for (auto _ : state) {
        grads.zero();
        const Tensor& probs = net.forward(clamped, acts);
        const auto ce = cross_entropy(probs, to_class(2));
        net.backward(acts, ce.grad_logits, grads);
        benchmark::DoNotOptimize(grads.conv_w[0].data());
    }
}

}  // namespace

// conv layer shapes of the 50x50 stack
BENCHMARK(BM_gemm_nn)->Args({32, 288, 2500})->Args({64, 576, 625})
    ->Args({128, 1152, 144})->Args({128, 1152, 36})->Args({128, 1152, 9})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_gemm_nt)->Args({32, 2500, 288})->Args({64, 625, 576})
    ->Args({128, 144, 1152})->Args({128, 36, 1152})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_im2col)->Args({32, 50})->Args({128, 12})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_conv2d_forward)->Args({32, 32, 50})->Args({64, 64, 25})
    ->Args({128, 128, 12})->Args({128, 128, 6})
    ->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_conv2d_backward)->Args({32, 32, 50})->Args({64, 64, 25})
    ->Args({128, 128, 12})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_maxpool2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_network_forward)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_network_train_step)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
