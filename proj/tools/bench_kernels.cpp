// Throughput comparison of the OpenMP kernels against their serial
// references on training-sized shapes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <omp.h>

#include "sacl/kernels.hpp"
#include "sacl/rng.hpp"
#include "sacl/tensor.hpp"

using namespace sacl;
using kernels::i64;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void fill_random(Tensor<float>& t, Rng& rng) {
    for (auto& v : t.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
}

void bench_conv(i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    Rng rng(1);
    Tensor<float> x({B, Cin, L}), w({Cout, Cin, K}), bias({Cout}), y({B, Cout, L});
    fill_random(x, rng);
    fill_random(w, rng);

    const double flops = 2.0 * static_cast<double>(B * Cout * Cin * K * L);
    const double ts = time_best_of(3, [&] {
        kernels::serial::conv1d_forward(x.data(), w.data(), bias.data(), y.data(), B, Cin, Cout, L, K);
    });
    const double tp = time_best_of(3, [&] {
        kernels::conv1d_forward(x.data(), w.data(), bias.data(), y.data(), B, Cin, Cout, L, K);
    });
    std::printf("conv1d  B=%-3lld C=%lld->%-4lld L=%-4lld K=%lld  serial %7.2f ms (%5.2f GF/s)  omp %7.2f ms (%5.2f GF/s)  speedup %.2fx\n",
                (long long)B, (long long)Cin, (long long)Cout, (long long)L, (long long)K,
                ts * 1e3, flops / ts * 1e-9, tp * 1e3, flops / tp * 1e-9, ts / tp);
}

void bench_linear(i64 B, i64 I, i64 O) {
    Rng rng(2);
    Tensor<float> x({B, I}), w({O, I}), bias({O}), y({B, O});
    fill_random(x, rng);
    fill_random(w, rng);

    const double flops = 2.0 * static_cast<double>(B * I * O);
    const double ts = time_best_of(3, [&] {
        kernels::serial::linear_forward(x.data(), w.data(), bias.data(), y.data(), B, I, O);
    });
    const double tp = time_best_of(3, [&] {
        kernels::linear_forward(x.data(), w.data(), bias.data(), y.data(), B, I, O);
    });
    std::printf("linear  B=%-4lld %4lld->%-4lld            serial %7.2f ms (%5.2f GF/s)  omp %7.2f ms (%5.2f GF/s)  speedup %.2fx\n",
                (long long)B, (long long)I, (long long)O,
                ts * 1e3, flops / ts * 1e-9, tp * 1e3, flops / tp * 1e-9, ts / tp);
}

} // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    bench_conv(64, 32, 32, 320, 7);
    bench_conv(64, 64, 128, 80, 5);
    bench_conv(64, 128, 128, 20, 3);
    bench_conv(32, 2, 32, 704, 7);
    bench_linear(256, 256, 128);
    bench_linear(64, 128, 256);
    return 0;
}
