#pragma once

#include <algorithm>
#include <cstdint>

#include "sacl/common.hpp"

// Data-parallel kernels behind the nn layers. The OpenMP variants assign
// every output element to exactly one thread and keep a fixed inner
// accumulation order, so results are bit-identical to the serial
// references in kernels::serial for any thread count. Tests assert exact
// equality; tools/bench_kernels compares throughput.
//
// Layouts: signals x[B][C][L], conv weights w[Cout][Cin][K] (odd K,
// symmetric zero padding), linear weights w[O][I].

namespace sacl::kernels {

using i64 = std::int64_t;

// ---- conv1d, same-length output ----

template <class T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y,
                    i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 oc = 0; oc < Cout; ++oc) {
            T* yrow = y + (b * Cout + oc) * L;
            const T bv = bias ? bias[oc] : T(0);
            for (i64 t = 0; t < L; ++t) yrow[t] = bv;
            for (i64 ic = 0; ic < Cin; ++ic) {
                const T* xrow = x + (b * Cin + ic) * L;
                const T* wrow = w + (oc * Cin + ic) * K;
                for (i64 k = 0; k < K; ++k) {
                    const T wv = wrow[k];
                    const i64 shift = k - pad; // y[t] += w[k] * x[t + shift]
                    const i64 t0 = std::max<i64>(0, -shift);
                    const i64 t1 = std::min<i64>(L, L - shift);
                    const T* xs = xrow + shift;
                    for (i64 t = t0; t < t1; ++t) yrow[t] += wv * xs[t];
                }
            }
        }
    }
}

template <class T>
void conv1d_backward_input(const T* gy, const T* w, T* gx,
                           i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 ic = 0; ic < Cin; ++ic) {
            T* gxrow = gx + (b * Cin + ic) * L;
            for (i64 t = 0; t < L; ++t) gxrow[t] = T(0);
            for (i64 oc = 0; oc < Cout; ++oc) {
                const T* gyrow = gy + (b * Cout + oc) * L;
                const T* wrow = w + (oc * Cin + ic) * K;
                for (i64 k = 0; k < K; ++k) {
                    const T wv = wrow[k];
                    const i64 shift = k - pad; // gx[t + shift] += w[k] * gy[t]
                    const i64 t0 = std::max<i64>(0, -shift);
                    const i64 t1 = std::min<i64>(L, L - shift);
                    T* gxs = gxrow + shift;
                    for (i64 t = t0; t < t1; ++t) gxs[t] += wv * gyrow[t];
                }
            }
        }
    }
}

// accumulates into gw / gbias
template <class T>
void conv1d_backward_params(const T* x, const T* gy, T* gw, T* gbias,
                            i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 oc = 0; oc < Cout; ++oc) {
        for (i64 ic = 0; ic < Cin; ++ic) {
            T* gwrow = gw + (oc * Cin + ic) * K;
            for (i64 k = 0; k < K; ++k) {
                const i64 shift = k - pad;
                T acc = T(0);
                for (i64 b = 0; b < B; ++b) {
                    const T* gyrow = gy + (b * Cout + oc) * L;
                    const T* xs = x + (b * Cin + ic) * L + shift;
                    const i64 t0 = std::max<i64>(0, -shift);
                    const i64 t1 = std::min<i64>(L, L - shift);
                    for (i64 t = t0; t < t1; ++t) acc += gyrow[t] * xs[t];
                }
                gwrow[k] += acc;
            }
        }
    }
    if (gbias) {
#pragma omp parallel for schedule(static)
        for (i64 oc = 0; oc < Cout; ++oc) {
            T acc = T(0);
            for (i64 b = 0; b < B; ++b) {
                const T* gyrow = gy + (b * Cout + oc) * L;
                for (i64 t = 0; t < L; ++t) acc += gyrow[t];
            }
            gbias[oc] += acc;
        }
    }
}

// ---- linear ----

template <class T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, i64 B, i64 I, i64 O) {
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 o = 0; o < O; ++o) {
            const T* xrow = x + b * I;
            const T* wrow = w + o * I;
            T acc = bias ? bias[o] : T(0);
            for (i64 i = 0; i < I; ++i) acc += wrow[i] * xrow[i];
            y[b * O + o] = acc;
        }
    }
}

template <class T>
void linear_backward_input(const T* gy, const T* w, T* gx, i64 B, i64 I, i64 O) {
#pragma omp parallel for schedule(static)
    for (i64 b = 0; b < B; ++b) {
        T* gxrow = gx + b * I;
        for (i64 i = 0; i < I; ++i) gxrow[i] = T(0);
        for (i64 o = 0; o < O; ++o) {
            const T g = gy[b * O + o];
            const T* wrow = w + o * I;
            for (i64 i = 0; i < I; ++i) gxrow[i] += g * wrow[i];
        }
    }
}

// accumulates into gw / gbias
template <class T>
void linear_backward_params(const T* x, const T* gy, T* gw, T* gbias, i64 B, i64 I, i64 O) {
#pragma omp parallel for schedule(static)
    for (i64 o = 0; o < O; ++o) {
        T* gwrow = gw + o * I;
        for (i64 b = 0; b < B; ++b) {
            const T g = gy[b * O + o];
            const T* xrow = x + b * I;
            for (i64 i = 0; i < I; ++i) gwrow[i] += g * xrow[i];
        }
        if (gbias) {
            T acc = T(0);
            for (i64 b = 0; b < B; ++b) acc += gy[b * O + o];
            gbias[o] += acc;
        }
    }
}

// ---- pooling ----

// kernel size == stride, trailing remainder dropped; winner index cached
template <class T>
void maxpool1d_forward(const T* x, T* y, std::int32_t* argmax, i64 B, i64 C, i64 L, i64 K) {
    const i64 Lo = L / K;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const T* xrow = x + (b * C + c) * L;
            T* yrow = y + (b * C + c) * Lo;
            std::int32_t* arow = argmax + (b * C + c) * Lo;
            for (i64 to = 0; to < Lo; ++to) {
                i64 best = to * K;
                T bv = xrow[best];
                for (i64 k = 1; k < K; ++k) {
                    const i64 idx = to * K + k;
                    if (xrow[idx] > bv) {
                        bv = xrow[idx];
                        best = idx;
                    }
                }
                yrow[to] = bv;
                arow[to] = static_cast<std::int32_t>(best);
            }
        }
    }
}

template <class T>
void maxpool1d_backward(const T* gy, const std::int32_t* argmax, T* gx, i64 B, i64 C, i64 L, i64 K) {
    const i64 Lo = L / K;
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const T* gyrow = gy + (b * C + c) * Lo;
            const std::int32_t* arow = argmax + (b * C + c) * Lo;
            T* gxrow = gx + (b * C + c) * L;
            for (i64 t = 0; t < L; ++t) gxrow[t] = T(0);
            for (i64 to = 0; to < Lo; ++to) gxrow[arow[to]] += gyrow[to];
        }
    }
}

template <class T>
void global_avgpool_forward(const T* x, T* y, i64 B, i64 C, i64 L) {
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const T* xrow = x + (b * C + c) * L;
            T acc = T(0);
            for (i64 t = 0; t < L; ++t) acc += xrow[t];
            y[b * C + c] = acc / static_cast<T>(L);
        }
    }
}

template <class T>
void global_avgpool_backward(const T* gy, T* gx, i64 B, i64 C, i64 L) {
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 b = 0; b < B; ++b) {
        for (i64 c = 0; c < C; ++c) {
            const T g = gy[b * C + c] / static_cast<T>(L);
            T* gxrow = gx + (b * C + c) * L;
            for (i64 t = 0; t < L; ++t) gxrow[t] = g;
        }
    }
}

// Serial reference implementations: naive per-element loops with the same
// per-element accumulation order as the OpenMP kernels.
namespace serial {

template <class T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y,
                    i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
    for (i64 b = 0; b < B; ++b)
        for (i64 oc = 0; oc < Cout; ++oc)
            for (i64 t = 0; t < L; ++t) {
                T acc = bias ? bias[oc] : T(0);
                for (i64 ic = 0; ic < Cin; ++ic)
                    for (i64 k = 0; k < K; ++k) {
                        const i64 src = t + k - pad;
                        if (src >= 0 && src < L)
                            acc += w[(oc * Cin + ic) * K + k] * x[(b * Cin + ic) * L + src];
                    }
                y[(b * Cout + oc) * L + t] = acc;
            }
}

template <class T>
void conv1d_backward_input(const T* gy, const T* w, T* gx,
                           i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
    for (i64 b = 0; b < B; ++b)
        for (i64 ic = 0; ic < Cin; ++ic)
            for (i64 s = 0; s < L; ++s) {
                T acc = T(0);
                for (i64 oc = 0; oc < Cout; ++oc)
                    for (i64 k = 0; k < K; ++k) {
                        const i64 t = s - (k - pad);
                        if (t >= 0 && t < L)
                            acc += w[(oc * Cin + ic) * K + k] * gy[(b * Cout + oc) * L + t];
                    }
                gx[(b * Cin + ic) * L + s] = acc;
            }
}

template <class T>
void conv1d_backward_params(const T* x, const T* gy, T* gw, T* gbias,
                            i64 B, i64 Cin, i64 Cout, i64 L, i64 K) {
    const i64 pad = (K - 1) / 2;
    for (i64 oc = 0; oc < Cout; ++oc)
        for (i64 ic = 0; ic < Cin; ++ic)
            for (i64 k = 0; k < K; ++k) {
                T acc = T(0);
                for (i64 b = 0; b < B; ++b)
                    for (i64 t = 0; t < L; ++t) {
                        const i64 src = t + k - pad;
                        if (src >= 0 && src < L)
                            acc += gy[(b * Cout + oc) * L + t] * x[(b * Cin + ic) * L + src];
                    }
                gw[(oc * Cin + ic) * K + k] += acc;
            }
    if (gbias)
        for (i64 oc = 0; oc < Cout; ++oc) {
            T acc = T(0);
            for (i64 b = 0; b < B; ++b)
                for (i64 t = 0; t < L; ++t) acc += gy[(b * Cout + oc) * L + t];
            gbias[oc] += acc;
        }
}

template <class T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, i64 B, i64 I, i64 O) {
    for (i64 b = 0; b < B; ++b)
        for (i64 o = 0; o < O; ++o) {
            T acc = bias ? bias[o] : T(0);
            for (i64 i = 0; i < I; ++i) acc += w[o * I + i] * x[b * I + i];
            y[b * O + o] = acc;
        }
}

template <class T>
void linear_backward_input(const T* gy, const T* w, T* gx, i64 B, i64 I, i64 O) {
    for (i64 b = 0; b < B; ++b)
        for (i64 i = 0; i < I; ++i) {
            T acc = T(0);
            for (i64 o = 0; o < O; ++o) acc += gy[b * O + o] * w[o * I + i];
            gx[b * I + i] = acc;
        }
}

template <class T>
void linear_backward_params(const T* x, const T* gy, T* gw, T* gbias, i64 B, i64 I, i64 O) {
    for (i64 o = 0; o < O; ++o) {
        for (i64 i = 0; i < I; ++i) {
            T acc = T(0);
            for (i64 b = 0; b < B; ++b) acc += gy[b * O + o] * x[b * I + i];
            gw[o * I + i] += acc;
        }
        if (gbias) {
            T acc = T(0);
            for (i64 b = 0; b < B; ++b) acc += gy[b * O + o];
            gbias[o] += acc;
        }
    }
}

} // namespace serial

} // namespace sacl::kernels
