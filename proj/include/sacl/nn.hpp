#pragma once

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "sacl/kernels.hpp"
#include "sacl/rng.hpp"
#include "sacl/tensor.hpp"

// Differentiable building blocks. Every layer is an explicit
// forward/backward pair; backward() accumulates parameter gradients and
// returns the gradient w.r.t. its input. The gradient contract (match
// against 64-bit central differences) is enforced in tests/test_gradcheck.

namespace sacl::nn {

using kernels::i64;

template <class T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
};

template <class T>
struct BufRef {
    std::string name;
    Tensor<T>* value;
};

template <class T>
struct Param {
    Tensor<T> value;
    Tensor<T> grad;

    explicit Param(std::vector<i64> shape = {}) : value(shape), grad(shape) {}

    void resize(std::vector<i64> shape) {
        value = Tensor<T>(shape);
        grad = Tensor<T>(shape);
    }
};

template <class T>
void he_uniform_init(Tensor<T>& w, i64 fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (auto& x : w.v) x = static_cast<T>(rng.uniform(-bound, bound));
}

// ---- layers ----

template <class T>
struct Conv1d {
    i64 in_ch = 0, out_ch = 0, kernel = 1;
    Param<T> weight; // [out, in, K]
    Param<T> bias;   // [out]
    Tensor<T> x_cache;

    Conv1d() = default;
    Conv1d(i64 in, i64 out, i64 k) : in_ch(in), out_ch(out), kernel(k) {
        require(k % 2 == 1, "conv1d: kernel size must be odd");
        weight.resize({out, in, k});
        bias.resize({out});
    }

    void init(Rng& rng) { he_uniform_init(weight.value, in_ch * kernel, rng); }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.ndim() == 3 && x.size(1) == in_ch,
                "conv1d: expected input (B," + std::to_string(in_ch) + ",L), got " + x.shape_str());
        x_cache = x;
        Tensor<T> y({x.size(0), out_ch, x.size(2)});
        kernels::conv1d_forward(x.data(), weight.value.data(), bias.value.data(), y.data(),
                                x.size(0), in_ch, out_ch, x.size(2), kernel);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = x_cache.size(0), L = x_cache.size(2);
        kernels::conv1d_backward_params(x_cache.data(), gy.data(), weight.grad.data(),
                                        bias.grad.data(), B, in_ch, out_ch, L, kernel);
        Tensor<T> gx({B, in_ch, L});
        kernels::conv1d_backward_input(gy.data(), weight.value.data(), gx.data(),
                                       B, in_ch, out_ch, L, kernel);
        return gx;
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        out.push_back({p + ".weight", &weight.value, &weight.grad});
        out.push_back({p + ".bias", &bias.value, &bias.grad});
    }
};

template <class T>
struct BatchNorm1d {
    i64 channels = 0;
    T momentum = T(0.1);
    T eps = T(1e-5);
    Param<T> gamma, beta;
    Tensor<T> running_mean, running_var;
    Tensor<T> xhat_cache, inv_std_cache; // train-mode caches
    bool train_cached = true;

    BatchNorm1d() = default;
    explicit BatchNorm1d(i64 c) : channels(c) {
        gamma.resize({c});
        beta.resize({c});
        running_mean = Tensor<T>({c});
        running_var = Tensor<T>({c});
        for (auto& g : gamma.value.v) g = T(1);
        for (auto& v : running_var.v) v = T(1);
    }

    Tensor<T> forward(const Tensor<T>& x, bool train) {
        require(x.ndim() == 3 && x.size(1) == channels, "batchnorm: channel mismatch " + x.shape_str());
        const i64 B = x.size(0), C = channels, L = x.size(2);
        const i64 N = B * L;
        Tensor<T> y(x.shape);
        train_cached = train;
        if (train) {
            xhat_cache = Tensor<T>(x.shape);
            inv_std_cache = Tensor<T>({C});
#pragma omp parallel for schedule(static)
            for (i64 c = 0; c < C; ++c) {
                T mean = T(0);
                for (i64 b = 0; b < B; ++b) {
                    const T* row = x.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) mean += row[t];
                }
                mean /= static_cast<T>(N);
                T var = T(0);
                for (i64 b = 0; b < B; ++b) {
                    const T* row = x.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) {
                        const T d = row[t] - mean;
                        var += d * d;
                    }
                }
                var /= static_cast<T>(N);
                const T istd = T(1) / std::sqrt(var + eps);
                inv_std_cache.v[c] = istd;
                const T g = gamma.value.v[c], bt = beta.value.v[c];
                for (i64 b = 0; b < B; ++b) {
                    const T* row = x.data() + (b * C + c) * L;
                    T* xh = xhat_cache.data() + (b * C + c) * L;
                    T* yr = y.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) {
                        xh[t] = (row[t] - mean) * istd;
                        yr[t] = g * xh[t] + bt;
                    }
                }
                const T unbias = N > 1 ? static_cast<T>(N) / static_cast<T>(N - 1) : T(1);
                running_mean.v[c] = (T(1) - momentum) * running_mean.v[c] + momentum * mean;
                running_var.v[c] = (T(1) - momentum) * running_var.v[c] + momentum * var * unbias;
            }
        } else {
            inv_std_cache = Tensor<T>({C});
#pragma omp parallel for schedule(static)
            for (i64 c = 0; c < C; ++c) {
                const T istd = T(1) / std::sqrt(running_var.v[c] + eps);
                inv_std_cache.v[c] = istd;
                const T mean = running_mean.v[c];
                const T g = gamma.value.v[c], bt = beta.value.v[c];
                for (i64 b = 0; b < B; ++b) {
                    const T* row = x.data() + (b * C + c) * L;
                    T* yr = y.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) yr[t] = g * (row[t] - mean) * istd + bt;
                }
            }
            xhat_cache = Tensor<T>(x.shape);
#pragma omp parallel for schedule(static)
            for (i64 c = 0; c < C; ++c) {
                const T istd = inv_std_cache.v[c];
                const T mean = running_mean.v[c];
                for (i64 b = 0; b < B; ++b) {
                    const T* row = x.data() + (b * C + c) * L;
                    T* xh = xhat_cache.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) xh[t] = (row[t] - mean) * istd;
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = gy.size(0), C = channels, L = gy.size(2);
        const i64 N = B * L;
        Tensor<T> gx(gy.shape);
#pragma omp parallel for schedule(static)
        for (i64 c = 0; c < C; ++c) {
            T sum_gy = T(0), sum_gy_xhat = T(0);
            for (i64 b = 0; b < B; ++b) {
                const T* g = gy.data() + (b * C + c) * L;
                const T* xh = xhat_cache.data() + (b * C + c) * L;
                for (i64 t = 0; t < L; ++t) {
                    sum_gy += g[t];
                    sum_gy_xhat += g[t] * xh[t];
                }
            }
            gamma.grad.v[c] += sum_gy_xhat;
            beta.grad.v[c] += sum_gy;
            const T gscale = gamma.value.v[c] * inv_std_cache.v[c];
            if (train_cached) {
                const T mg = sum_gy / static_cast<T>(N);
                const T mgx = sum_gy_xhat / static_cast<T>(N);
                for (i64 b = 0; b < B; ++b) {
                    const T* g = gy.data() + (b * C + c) * L;
                    const T* xh = xhat_cache.data() + (b * C + c) * L;
                    T* gxr = gx.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) gxr[t] = gscale * (g[t] - mg - xh[t] * mgx);
                }
            } else {
                for (i64 b = 0; b < B; ++b) {
                    const T* g = gy.data() + (b * C + c) * L;
                    T* gxr = gx.data() + (b * C + c) * L;
                    for (i64 t = 0; t < L; ++t) gxr[t] = gscale * g[t];
                }
            }
        }
        return gx;
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        out.push_back({p + ".gamma", &gamma.value, &gamma.grad});
        out.push_back({p + ".beta", &beta.value, &beta.grad});
    }
    void collect_buffers(const std::string& p, std::vector<BufRef<T>>& out) {
        out.push_back({p + ".running_mean", &running_mean});
        out.push_back({p + ".running_var", &running_var});
    }
};

template <class T>
struct Elu {
    Tensor<T> y_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        Tensor<T> y(x.shape);
        const i64 n = x.numel();
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < n; ++i) {
            const T v = x.v[i];
            y.v[i] = v > T(0) ? v : static_cast<T>(std::expm1(static_cast<double>(v)));
        }
        y_cache = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        Tensor<T> gx(gy.shape);
        const i64 n = gy.numel();
#pragma omp parallel for schedule(static)
        for (i64 i = 0; i < n; ++i) {
            const T yv = y_cache.v[i];
            gx.v[i] = yv > T(0) ? gy.v[i] : gy.v[i] * (yv + T(1));
        }
        return gx;
    }
};

template <class T>
struct MaxPool1d {
    i64 kernel = 1;
    i64 in_len = 0;
    Tensor<std::int32_t> argmax;

    MaxPool1d() = default;
    explicit MaxPool1d(i64 k) : kernel(k) {}

    Tensor<T> forward(const Tensor<T>& x) {
        const i64 B = x.size(0), C = x.size(1), L = x.size(2);
        require(L >= kernel, "maxpool: input shorter than kernel");
        in_len = L;
        const i64 Lo = L / kernel;
        Tensor<T> y({B, C, Lo});
        argmax = Tensor<std::int32_t>({B, C, Lo});
        kernels::maxpool1d_forward(x.data(), y.data(), argmax.data(), B, C, L, kernel);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = gy.size(0), C = gy.size(1);
        Tensor<T> gx({B, C, in_len});
        kernels::maxpool1d_backward(gy.data(), argmax.data(), gx.data(), B, C, in_len, kernel);
        return gx;
    }
};

template <class T>
struct GlobalAvgPool {
    i64 in_len = 0;

    Tensor<T> forward(const Tensor<T>& x) {
        const i64 B = x.size(0), C = x.size(1), L = x.size(2);
        in_len = L;
        Tensor<T> y({B, C});
        kernels::global_avgpool_forward(x.data(), y.data(), B, C, L);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = gy.size(0), C = gy.size(1);
        Tensor<T> gx({B, C, in_len});
        kernels::global_avgpool_backward(gy.data(), gx.data(), B, C, in_len);
        return gx;
    }
};

template <class T>
struct Linear {
    i64 in_dim = 0, out_dim = 0;
    Param<T> weight; // [out, in]
    Param<T> bias;   // [out]
    Tensor<T> x_cache;

    Linear() = default;
    Linear(i64 in, i64 out) : in_dim(in), out_dim(out) {
        weight.resize({out, in});
        bias.resize({out});
    }

    void init(Rng& rng) { he_uniform_init(weight.value, in_dim, rng); }

    Tensor<T> forward(const Tensor<T>& x) {
        require(x.ndim() == 2 && x.size(1) == in_dim,
                "linear: expected input (B," + std::to_string(in_dim) + "), got " + x.shape_str());
        x_cache = x;
        Tensor<T> y({x.size(0), out_dim});
        kernels::linear_forward(x.data(), weight.value.data(), bias.value.data(), y.data(),
                                x.size(0), in_dim, out_dim);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = x_cache.size(0);
        kernels::linear_backward_params(x_cache.data(), gy.data(), weight.grad.data(),
                                        bias.grad.data(), B, in_dim, out_dim);
        Tensor<T> gx({B, in_dim});
        kernels::linear_backward_input(gy.data(), weight.value.data(), gx.data(), B, in_dim, out_dim);
        return gx;
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        out.push_back({p + ".weight", &weight.value, &weight.grad});
        out.push_back({p + ".bias", &bias.value, &bias.grad});
    }
};

// row-wise softmax with max subtraction
template <class T>
struct Softmax {
    Tensor<T> y_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        const i64 B = x.size(0), D = x.size(1);
        Tensor<T> y(x.shape);
#pragma omp parallel for schedule(static)
        for (i64 b = 0; b < B; ++b) {
            const T* xr = x.data() + b * D;
            T* yr = y.data() + b * D;
            T mx = xr[0];
            for (i64 d = 1; d < D; ++d) mx = std::max(mx, xr[d]);
            T sum = T(0);
            for (i64 d = 0; d < D; ++d) {
                yr[d] = std::exp(xr[d] - mx);
                sum += yr[d];
            }
            for (i64 d = 0; d < D; ++d) yr[d] /= sum;
        }
        y_cache = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = gy.size(0), D = gy.size(1);
        Tensor<T> gx(gy.shape);
#pragma omp parallel for schedule(static)
        for (i64 b = 0; b < B; ++b) {
            const T* g = gy.data() + b * D;
            const T* y = y_cache.data() + b * D;
            T dot = T(0);
            for (i64 d = 0; d < D; ++d) dot += g[d] * y[d];
            T* gxr = gx.data() + b * D;
            for (i64 d = 0; d < D; ++d) gxr[d] = y[d] * (g[d] - dot);
        }
        return gx;
    }
};

// L2 row normalization; rejects rows with vanishing norm
template <class T>
struct L2Normalize {
    Tensor<T> x_cache;
    Tensor<T> norm_cache;

    Tensor<T> forward(const Tensor<T>& x) {
        const i64 B = x.size(0), D = x.size(1);
        x_cache = x;
        norm_cache = Tensor<T>({B});
        Tensor<T> y(x.shape);
        for (i64 b = 0; b < B; ++b) {
            const T* xr = x.data() + b * D;
            T s = T(0);
            for (i64 d = 0; d < D; ++d) s += xr[d] * xr[d];
            const T n = std::sqrt(s);
            require(n > T(1e-12), "l2_normalize: zero-norm row " + std::to_string(b));
            norm_cache.v[b] = n;
            T* yr = y.data() + b * D;
            for (i64 d = 0; d < D; ++d) yr[d] = xr[d] / n;
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        const i64 B = gy.size(0), D = gy.size(1);
        Tensor<T> gx(gy.shape);
        for (i64 b = 0; b < B; ++b) {
            const T* g = gy.data() + b * D;
            const T* xr = x_cache.data() + b * D;
            const T n = norm_cache.v[b];
            T dot = T(0);
            for (i64 d = 0; d < D; ++d) dot += g[d] * xr[d];
            const T n3 = n * n * n;
            T* gxr = gx.data() + b * D;
            for (i64 d = 0; d < D; ++d) gxr[d] = g[d] / n - xr[d] * dot / n3;
        }
        return gx;
    }
};

template <class T>
Tensor<T> l2_normalize(const Tensor<T>& x) {
    L2Normalize<T> op;
    return op.forward(x);
}

// ---- composite blocks ----

// Pre-activation residual block: BN-ELU-Conv-BN-ELU-Conv plus skip
// (1x1 conv when channel counts differ).
template <class T>
struct ResBlock {
    i64 in_ch = 0, out_ch = 0, kernel = 1;
    BatchNorm1d<T> bn1, bn2;
    Elu<T> elu1, elu2;
    Conv1d<T> conv1, conv2;
    bool has_skip_conv = false;
    Conv1d<T> skip;

    ResBlock() = default;
    ResBlock(i64 in, i64 out, i64 k)
        : in_ch(in), out_ch(out), kernel(k), bn1(in), bn2(out),
          conv1(in, out, k), conv2(out, out, k), has_skip_conv(in != out) {
        if (has_skip_conv) skip = Conv1d<T>(in, out, 1);
    }

    void init(Rng& rng) {
        conv1.init(rng);
        conv2.init(rng);
        if (has_skip_conv) skip.init(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, bool train) {
        Tensor<T> m = conv2.forward(elu2.forward(bn2.forward(
            conv1.forward(elu1.forward(bn1.forward(x, train))), train)));
        if (has_skip_conv) {
            const Tensor<T> s = skip.forward(x);
            for (i64 i = 0; i < m.numel(); ++i) m.v[i] += s.v[i];
        } else {
            for (i64 i = 0; i < m.numel(); ++i) m.v[i] += x.v[i];
        }
        return m;
    }

    Tensor<T> backward(const Tensor<T>& gy) {
        Tensor<T> gx = bn1.backward(elu1.backward(conv1.backward(
            bn2.backward(elu2.backward(conv2.backward(gy))))));
        if (has_skip_conv) {
            const Tensor<T> gs = skip.backward(gy);
            for (i64 i = 0; i < gx.numel(); ++i) gx.v[i] += gs.v[i];
        } else {
            for (i64 i = 0; i < gx.numel(); ++i) gx.v[i] += gy.v[i];
        }
        return gx;
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        bn1.collect(p + ".bn1", out);
        conv1.collect(p + ".conv1", out);
        bn2.collect(p + ".bn2", out);
        conv2.collect(p + ".conv2", out);
        if (has_skip_conv) skip.collect(p + ".skip", out);
    }
    void collect_buffers(const std::string& p, std::vector<BufRef<T>>& out) {
        bn1.collect_buffers(p + ".bn1", out);
        bn2.collect_buffers(p + ".bn2", out);
    }
};

struct BlockCfg {
    i64 in_ch = 0;
    i64 out_ch = 0;
    i64 kernel = 3;
    i64 pool = 1; // maxpool factor applied after the block, 1 = none
};

struct EncoderConfig {
    std::string variant = "eeg"; // eeg | ecg | custom
    i64 in_channels = 64;
    i64 window = 320;
    i64 embed_dim = 256;
    i64 stem_out = 32;
    i64 stem_kernel = 7;
    std::vector<BlockCfg> blocks;

    static EncoderConfig eeg(i64 in_channels = 64, i64 window = 320) {
        EncoderConfig c;
        c.variant = "eeg";
        c.in_channels = in_channels;
        c.window = window;
        c.stem_out = 32;
        c.stem_kernel = 7;
        c.blocks = {{32, 32, 7, 4}, {32, 64, 5, 4}, {64, 128, 3, 4}, {128, 128, 3, 1}};
        return c;
    }

    static EncoderConfig ecg(i64 in_channels = 2, i64 window = 704) {
        EncoderConfig c;
        c.variant = "ecg";
        c.in_channels = in_channels;
        c.window = window;
        c.stem_out = 32;
        c.stem_kernel = 7;
        c.blocks = {{32, 64, 7, 2}, {64, 128, 5, 2}, {128, 256, 3, 2}, {256, 256, 3, 1}};
        return c;
    }

    i64 feature_dim() const { return blocks.empty() ? stem_out : blocks.back().out_ch; }

    void validate() const {
        require(in_channels >= 1 && window >= 1 && embed_dim >= 1, "model: positive dims required");
        i64 prev = stem_out;
        i64 len = window;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            require(blocks[i].in_ch == prev,
                    "model: block " + std::to_string(i) + " input channels " +
                        std::to_string(blocks[i].in_ch) + " do not chain from " + std::to_string(prev));
            require(blocks[i].pool >= 1, "model: pool factor must be >= 1");
            prev = blocks[i].out_ch;
            len /= blocks[i].pool;
            require(len >= 1, "model: window too short for pooling chain");
        }
    }
};

// Encoder G: stem conv, residual blocks with interleaved max pooling,
// global average pool, linear projection to the embedding.
template <class T>
struct EncoderG {
    EncoderConfig cfg;
    Conv1d<T> stem;
    std::vector<ResBlock<T>> blocks;
    std::vector<MaxPool1d<T>> pools; // parallel to blocks, kernel 1 = absent
    GlobalAvgPool<T> gap;
    Linear<T> head;

    EncoderG() = default;
    explicit EncoderG(const EncoderConfig& c) : cfg(c) {
        cfg.validate();
        stem = Conv1d<T>(cfg.in_channels, cfg.stem_out, cfg.stem_kernel);
        for (const auto& b : cfg.blocks) {
            blocks.emplace_back(b.in_ch, b.out_ch, b.kernel);
            pools.emplace_back(b.pool);
        }
        head = Linear<T>(cfg.feature_dim(), cfg.embed_dim);
    }

    void init(Rng& rng) {
        stem.init(rng);
        for (auto& b : blocks) b.init(rng);
        head.init(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, bool train) {
        Tensor<T> h = stem.forward(x);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            h = blocks[i].forward(h, train);
            if (pools[i].kernel > 1) h = pools[i].forward(h);
        }
        return head.forward(gap.forward(h));
    }

    Tensor<T> backward(const Tensor<T>& gh) {
        Tensor<T> g = gap.backward(head.backward(gh));
        for (std::size_t i = blocks.size(); i-- > 0;) {
            if (pools[i].kernel > 1) g = pools[i].backward(g);
            g = blocks[i].backward(g);
        }
        return stem.backward(g);
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        stem.collect(p + ".stem", out);
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect(p + ".block" + std::to_string(i), out);
        head.collect(p + ".head", out);
    }
    void collect_buffers(const std::string& p, std::vector<BufRef<T>>& out) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect_buffers(p + ".block" + std::to_string(i), out);
    }

    i64 param_count() {
        std::vector<ParamRef<T>> refs;
        collect("g", refs);
        i64 n = 0;
        for (auto& r : refs) n += r.value->numel();
        return n;
    }
};

// Projection head F: 256 -> 128 -> 128 -> 128 -> 64 with ELU between.
template <class T>
struct ProjectionF {
    Linear<T> l0, l1, l2, l3;
    Elu<T> e0, e1, e2;

    ProjectionF() = default;
    explicit ProjectionF(i64 in_dim, i64 hidden = 128, i64 out_dim = 64)
        : l0(in_dim, hidden), l1(hidden, hidden), l2(hidden, hidden), l3(hidden, out_dim) {}

    void init(Rng& rng) {
        l0.init(rng);
        l1.init(rng);
        l2.init(rng);
        l3.init(rng);
    }

    Tensor<T> forward(const Tensor<T>& h) {
        return l3.forward(e2.forward(l2.forward(e1.forward(l1.forward(e0.forward(l0.forward(h)))))));
    }

    Tensor<T> backward(const Tensor<T>& gq) {
        return l0.backward(e0.backward(l1.backward(e1.backward(l2.backward(e2.backward(l3.backward(gq)))))));
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        l0.collect(p + ".l0", out);
        l1.collect(p + ".l1", out);
        l2.collect(p + ".l2", out);
        l3.collect(p + ".l3", out);
    }
};

// Adversarial subject classifier over latent h; outputs probabilities.
template <class T>
struct SubjectClassifier {
    i64 n_subjects = 0;
    Linear<T> l0, l1;
    Elu<T> e0;
    Softmax<T> softmax;

    SubjectClassifier() = default;
    SubjectClassifier(i64 in_dim, i64 n_sub, i64 hidden = 128)
        : n_subjects(n_sub), l0(in_dim, hidden), l1(hidden, n_sub) {
        require(n_sub >= 2, "subject classifier: need at least 2 subjects");
    }

    void init(Rng& rng) {
        l0.init(rng);
        l1.init(rng);
    }

    Tensor<T> forward(const Tensor<T>& h) {
        return softmax.forward(l1.forward(e0.forward(l0.forward(h))));
    }

    Tensor<T> backward(const Tensor<T>& gprobs) {
        return l0.backward(e0.backward(l1.backward(softmax.backward(gprobs))));
    }

    void collect(const std::string& p, std::vector<ParamRef<T>>& out) {
        l0.collect(p + ".l0", out);
        l1.collect(p + ".l1", out);
    }
};

// ---- parameter utilities ----

template <class T>
void zero_grads(std::vector<ParamRef<T>>& refs) {
    for (auto& r : refs) r.grad->zero();
}

template <class T>
void copy_params(const std::vector<ParamRef<T>>& src, std::vector<ParamRef<T>>& dst) {
    require(src.size() == dst.size(), "copy_params: parameter list size mismatch");
    for (std::size_t i = 0; i < src.size(); ++i) {
        require(src[i].value->shape == dst[i].value->shape, "copy_params: shape mismatch at " + src[i].name);
        dst[i].value->v = src[i].value->v;
    }
}

template <class T>
std::uint64_t params_hash(std::vector<ParamRef<T>>& refs) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto& r : refs) {
        h = fnv1a64(r.name.data(), r.name.size(), h);
        h = fnv1a64(r.value->data(), sizeof(T) * static_cast<std::size_t>(r.value->numel()), h);
    }
    return h;
}

} // namespace sacl::nn
