#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sacl/nn.hpp"
#include "sacl/tensor.hpp"

// Contrastive machinery: momentum key queue, InfoNCE over queue negatives,
// and the adversarial subject losses.

namespace sacl::contrast {

using kernels::i64;
using nn::ParamRef;

enum class LossVariant { base, subject_specific, subject_invariant };

inline LossVariant variant_from_string(const std::string& s) {
    if (s == "base") return LossVariant::base;
    if (s == "subject_specific") return LossVariant::subject_specific;
    if (s == "subject_invariant") return LossVariant::subject_invariant;
    throw Error("contrast: unknown loss variant '" + s + "'");
}

struct LossConfig {
    LossVariant variant = LossVariant::base;
    double lambda = 1.0;
    double key_momentum = 0.999;
    i64 queue_capacity = 24000;
    double tau_init = 0.07;
    double tau_min = 0.01;
    double tau_max = 1.0;
    i64 min_negatives = 16; // subject-specific anchors with fewer are skipped

    void validate() const {
        require(lambda >= 0.0, "contrast: lambda must be >= 0");
        require(key_momentum > 0.0 && key_momentum < 1.0, "contrast: momentum must lie in (0,1)");
        require(queue_capacity >= 1, "contrast: queue capacity must be >= 1");
        require(tau_init >= tau_min && tau_init <= tau_max, "contrast: tau_init outside clamp range");
    }
};

// FIFO ring of (unit key, subject id) pairs.
template <class T>
struct KeyQueue {
    i64 dim = 0;
    i64 capacity = 0;
    std::vector<T> keys;       // [capacity][dim]
    std::vector<int> subjects; // [capacity]
    i64 cursor = 0;
    i64 fill = 0;

    KeyQueue() = default;
    KeyQueue(i64 d, i64 cap) : dim(d), capacity(cap) {
        require(cap >= 1 && d >= 1, "contrast: queue needs positive capacity and dim");
        keys.assign(static_cast<std::size_t>(cap * d), T(0));
        subjects.assign(static_cast<std::size_t>(cap), -1);
    }

    const T* key(i64 i) const { return keys.data() + i * dim; }
    int subject(i64 i) const { return subjects[static_cast<std::size_t>(i)]; }

    void enqueue(const Tensor<T>& batch_keys, const std::vector<int>& subject_ids) {
        const i64 B = batch_keys.size(0);
        require(batch_keys.ndim() == 2 && batch_keys.size(1) == dim, "contrast: enqueue key dim mismatch");
        require(static_cast<i64>(subject_ids.size()) == B, "contrast: enqueue subject count mismatch");
        require(B <= capacity, "contrast: batch of " + std::to_string(B) +
                                   " exceeds queue capacity " + std::to_string(capacity));
        for (i64 b = 0; b < B; ++b) {
            T s = T(0);
            const T* row = batch_keys.data() + b * dim;
            for (i64 d = 0; d < dim; ++d) s += row[d] * row[d];
            require(std::abs(std::sqrt(static_cast<double>(s)) - 1.0) < 1e-3,
                    "contrast: enqueued key " + std::to_string(b) + " is not unit-norm");
            for (i64 d = 0; d < dim; ++d) keys[static_cast<std::size_t>(cursor * dim + d)] = row[d];
            subjects[static_cast<std::size_t>(cursor)] = subject_ids[static_cast<std::size_t>(b)];
            cursor = (cursor + 1) % capacity;
            if (fill < capacity) ++fill;
        }
    }
};

// Negative index sets per anchor. `skipped` marks subject-specific anchors
// with too few same-subject keys; they are excluded from the loss mean.
struct NegativeSets {
    std::vector<std::vector<i64>> idx;
    std::vector<bool> skipped;
    i64 n_skipped = 0;
};

template <class T>
std::vector<i64> subject_filtered_negatives(const KeyQueue<T>& queue, int subject_id) {
    std::vector<i64> out;
    for (i64 i = 0; i < queue.fill; ++i)
        if (queue.subject(i) == subject_id) out.push_back(i);
    return out;
}

template <class T>
NegativeSets select_negatives(const KeyQueue<T>& queue, const std::vector<int>& subject_ids,
                              LossVariant variant, i64 min_negatives) {
    const auto B = static_cast<i64>(subject_ids.size());
    NegativeSets out;
    out.idx.resize(static_cast<std::size_t>(B));
    out.skipped.assign(static_cast<std::size_t>(B), false);
    for (i64 b = 0; b < B; ++b) {
        if (variant == LossVariant::subject_specific) {
            auto idx = subject_filtered_negatives(queue, subject_ids[static_cast<std::size_t>(b)]);
            if (static_cast<i64>(idx.size()) < min_negatives) {
                out.skipped[static_cast<std::size_t>(b)] = true;
                ++out.n_skipped;
            } else {
                out.idx[static_cast<std::size_t>(b)] = std::move(idx);
            }
        } else {
            auto& idx = out.idx[static_cast<std::size_t>(b)];
            idx.resize(static_cast<std::size_t>(queue.fill));
            for (i64 i = 0; i < queue.fill; ++i) idx[static_cast<std::size_t>(i)] = i;
        }
    }
    return out;
}

struct InfoNceResult {
    double loss = 0.0;
    i64 anchors_used = 0;
    i64 anchors_skipped = 0;
};

namespace detail {
template <class T>
void check_unit_rows(const Tensor<T>& m, const char* what) {
    const i64 B = m.size(0), D = m.size(1);
    for (i64 b = 0; b < B; ++b) {
        T s = T(0);
        const T* row = m.data() + b * D;
        for (i64 d = 0; d < D; ++d) s += row[d] * row[d];
        require(std::abs(std::sqrt(static_cast<double>(s)) - 1.0) < 1e-3,
                std::string("contrast: ") + what + " row " + std::to_string(b) + " is not unit-norm");
    }
}
} // namespace detail

// InfoNCE over per-anchor negative sets drawn from the queue. Optionally
// produces gradients w.r.t. q, k_pos and log-tau (keys carry none). The
// positive is never part of the negative set; each anchor's denominator is
// its positive plus its negatives, computed with max subtraction.
template <class T>
InfoNceResult info_nce(const Tensor<T>& q, const Tensor<T>& kpos, const KeyQueue<T>& queue,
                       const NegativeSets& negs, T tau,
                       Tensor<T>* gq = nullptr, Tensor<T>* gkpos = nullptr, T* glogtau = nullptr) {
    const i64 B = q.size(0), D = q.size(1);
    require(kpos.size(0) == B && kpos.size(1) == D, "contrast: q/k shape mismatch");
    require(tau > T(0), "contrast: tau must be > 0");
    detail::check_unit_rows(q, "query");
    detail::check_unit_rows(kpos, "positive key");

    InfoNceResult res;
    for (i64 b = 0; b < B; ++b)
        if (!negs.skipped[static_cast<std::size_t>(b)]) ++res.anchors_used;
    res.anchors_skipped = negs.n_skipped;
    if (res.anchors_used == 0) return res;

    if (gq) gq->zero();
    if (gkpos) gkpos->zero();

    std::vector<double> losses(static_cast<std::size_t>(B), 0.0);
    std::vector<double> gtau_terms(static_cast<std::size_t>(B), 0.0);
    const double inv_used = 1.0 / static_cast<double>(res.anchors_used);

#pragma omp parallel for schedule(static)
    for (i64 b = 0; b < B; ++b) {
        if (negs.skipped[static_cast<std::size_t>(b)]) continue;
        const auto& idx = negs.idx[static_cast<std::size_t>(b)];
        const i64 N = static_cast<i64>(idx.size());
        const T* qrow = q.data() + b * D;
        const T* krow = kpos.data() + b * D;

        std::vector<double> logits(static_cast<std::size_t>(N) + 1);
        double dot = 0.0;
        for (i64 d = 0; d < D; ++d) dot += static_cast<double>(qrow[d]) * static_cast<double>(krow[d]);
        logits[0] = dot / static_cast<double>(tau);
        for (i64 j = 0; j < N; ++j) {
            const T* nrow = queue.key(idx[static_cast<std::size_t>(j)]);
            double nd = 0.0;
            for (i64 d = 0; d < D; ++d) nd += static_cast<double>(qrow[d]) * static_cast<double>(nrow[d]);
            logits[static_cast<std::size_t>(j) + 1] = nd / static_cast<double>(tau);
        }
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        double denom = 0.0;
        for (double v : logits) denom += std::exp(v - mx);
        losses[static_cast<std::size_t>(b)] = -(logits[0] - mx - std::log(denom));

        if (gq || gkpos || glogtau) {
            double gtau = 0.0;
            T* gqrow = gq ? gq->data() + b * D : nullptr;
            for (std::size_t j = 0; j < logits.size(); ++j) {
                const double p = std::exp(logits[j] - mx) / denom;
                const double glogit = (j == 0 ? p - 1.0 : p) * inv_used;
                gtau -= glogit * logits[j]; // d logit / d log-tau = -logit
                const T* krow_j = j == 0 ? krow : queue.key(idx[j - 1]);
                if (gqrow)
                    for (i64 d = 0; d < D; ++d)
                        gqrow[d] += static_cast<T>(glogit * static_cast<double>(krow_j[d]) /
                                                   static_cast<double>(tau));
                if (j == 0 && gkpos) {
                    T* gkrow = gkpos->data() + b * D;
                    for (i64 d = 0; d < D; ++d)
                        gkrow[d] += static_cast<T>(glogit * static_cast<double>(qrow[d]) /
                                                   static_cast<double>(tau));
                }
            }
            gtau_terms[static_cast<std::size_t>(b)] = gtau;
        }
    }

    double total = 0.0;
    for (i64 b = 0; b < B; ++b)
        if (!negs.skipped[static_cast<std::size_t>(b)]) total += losses[static_cast<std::size_t>(b)];
    res.loss = total * inv_used;
    if (glogtau) {
        double g = 0.0;
        for (double v : gtau_terms) g += v;
        *glogtau += static_cast<T>(g);
    }
    return res;
}

// Oracle-facing form: one shared negative matrix, loss only.
template <class T>
double info_nce_explicit(const Tensor<T>& q, const Tensor<T>& kpos, const Tensor<T>& negatives, T tau) {
    KeyQueue<T> queue(q.size(1), std::max<i64>(1, negatives.size(0)));
    if (negatives.size(0) > 0) {
        std::vector<int> ids(static_cast<std::size_t>(negatives.size(0)), 0);
        queue.enqueue(negatives, ids);
    }
    NegativeSets negs;
    const i64 B = q.size(0);
    negs.idx.resize(static_cast<std::size_t>(B));
    negs.skipped.assign(static_cast<std::size_t>(B), false);
    for (i64 b = 0; b < B; ++b)
        for (i64 j = 0; j < negatives.size(0); ++j) negs.idx[static_cast<std::size_t>(b)].push_back(j);
    return info_nce(q, kpos, queue, negs, tau).loss;
}

// theta_k <- m * theta_k + (1 - m) * theta, elementwise; names must match
// after the leading model prefix.
template <class T>
void momentum_update(std::vector<ParamRef<T>>& key_params, const std::vector<ParamRef<T>>& params, T m) {
    require(key_params.size() == params.size(), "contrast: momentum update parameter count mismatch");
    auto strip = [](const std::string& n) {
        const auto p = n.find('.');
        return p == std::string::npos ? n : n.substr(p);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(strip(key_params[i].name) == strip(params[i].name),
                "contrast: momentum update name mismatch: " + key_params[i].name + " vs " + params[i].name);
        require(key_params[i].value->shape == params[i].value->shape,
                "contrast: momentum update shape mismatch at " + params[i].name);
        T* k = key_params[i].value->data();
        const T* p = params[i].value->data();
        const i64 n = params[i].value->numel();
#pragma omp parallel for schedule(static)
        for (i64 j = 0; j < n; ++j) k[j] = m * k[j] + (T(1) - m) * p[j];
    }
}

inline double clamp_prob(double p) { return std::min(1.0 - 1e-7, std::max(1e-7, p)); }

// Eq. 2: mean cross entropy -log p[i, s_i] with clamped probabilities.
template <class T>
double subject_ce_loss(const Tensor<T>& probs, const std::vector<int>& subjects,
                       Tensor<T>* gprobs = nullptr) {
    const i64 B = probs.size(0), S = probs.size(1);
    require(static_cast<i64>(subjects.size()) == B, "contrast: subject count mismatch");
    if (gprobs) gprobs->zero();
    double total = 0.0;
    for (i64 b = 0; b < B; ++b) {
        const int s = subjects[static_cast<std::size_t>(b)];
        require(s >= 0 && s < S, "contrast: subject id " + std::to_string(s) + " outside [0," +
                                     std::to_string(S) + ")");
        const double p = static_cast<double>(probs.at2(b, s));
        const double pc = clamp_prob(p);
        total += -std::log(pc);
        if (gprobs && p > 1e-7 && p < 1.0 - 1e-7)
            gprobs->at2(b, s) = static_cast<T>(-1.0 / (pc * static_cast<double>(B)));
    }
    return total / static_cast<double>(B);
}

// Eq. 3: mean -log(1 - p[i, s_i]), the confusion regularizer for G.
template <class T>
double subject_confusion_reg(const Tensor<T>& probs, const std::vector<int>& subjects,
                             Tensor<T>* gprobs = nullptr) {
    const i64 B = probs.size(0), S = probs.size(1);
    require(static_cast<i64>(subjects.size()) == B, "contrast: subject count mismatch");
    if (gprobs) gprobs->zero();
    double total = 0.0;
    for (i64 b = 0; b < B; ++b) {
        const int s = subjects[static_cast<std::size_t>(b)];
        require(s >= 0 && s < S, "contrast: subject id " + std::to_string(s) + " outside [0," +
                                     std::to_string(S) + ")");
        const double p = static_cast<double>(probs.at2(b, s));
        const double q = clamp_prob(1.0 - p);
        total += -std::log(q);
        if (gprobs && p > 1e-7 && p < 1.0 - 1e-7)
            gprobs->at2(b, s) = static_cast<T>(1.0 / (q * static_cast<double>(B)));
    }
    return total / static_cast<double>(B);
}

template <class T>
T clamp_log_tau(T log_tau, double tau_min = 0.01, double tau_max = 1.0) {
    const T lo = static_cast<T>(std::log(tau_min));
    const T hi = static_cast<T>(std::log(tau_max));
    return std::min(hi, std::max(lo, log_tau));
}

} // namespace sacl::contrast
