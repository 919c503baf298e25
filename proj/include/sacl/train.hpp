#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sacl/augment.hpp"
#include "sacl/checkpoint.hpp"
#include "sacl/contrast.hpp"
#include "sacl/dataio.hpp"
#include "sacl/nn.hpp"

// Optimization loops: SSL pretraining (base / subject-specific /
// subject-invariant), linear probes on frozen embeddings, fine-tuning,
// and class-imbalance machinery.

namespace sacl::train {

using contrast::LossConfig;
using contrast::LossVariant;
using dataio::Recording;
using dataio::WindowRef;
using kernels::i64;
using nn::ParamRef;

// ---- Adam with decoupled weight decay ----

template <class T>
struct Adam {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    i64 t = 0;
    std::vector<Tensor<T>> m, v;

    void init(const std::vector<ParamRef<T>>& params) {
        m.clear();
        v.clear();
        for (const auto& p : params) {
            m.emplace_back(p.value->shape);
            v.emplace_back(p.value->shape);
        }
        t = 0;
    }

    void step(std::vector<ParamRef<T>>& params) {
        require(m.size() == params.size(), "adam: state/parameter count mismatch");
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
            T* th = params[pi].value->data();
            const T* g = params[pi].grad->data();
            T* mm = m[pi].data();
            T* vv = v[pi].data();
            const i64 n = params[pi].value->numel();
            for (i64 i = 0; i < n; ++i)
                if (!std::isfinite(static_cast<double>(g[i])))
                    throw Error("adam: non-finite gradient in " + params[pi].name + " at step " +
                                std::to_string(t));
#pragma omp parallel for schedule(static)
            for (i64 i = 0; i < n; ++i) {
                mm[i] = static_cast<T>(beta1 * mm[i] + (1.0 - beta1) * g[i]);
                vv[i] = static_cast<T>(beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i]);
                const double mhat = mm[i] / bc1;
                const double vhat = vv[i] / bc2;
                double upd = lr * mhat / (std::sqrt(vhat) + eps);
                if (weight_decay > 0.0) upd += lr * weight_decay * th[i];
                th[i] = static_cast<T>(th[i] - upd);
            }
        }
    }
};

// ---- class imbalance ----

struct ClassWeights {
    std::vector<double> w;
    double beta = 0.999;
    std::vector<i64> counts;
};

// Default form is the effective-number weighting (1-beta)/(1-beta^n) that
// down-weights frequent classes; verbatim_formula selects the printed
// expression (1-beta^n)/(1-beta) instead. unknown_class (if >= 0) gets the
// same weight as the majority class.
inline ClassWeights class_balanced_weights(const std::vector<i64>& counts, double beta,
                                           bool verbatim_formula = false, int unknown_class = -1) {
    require(beta > 0.0 && beta < 1.0, "train: class weight beta must lie in (0,1)");
    ClassWeights cw;
    cw.beta = beta;
    cw.counts = counts;
    cw.w.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        require(counts[i] >= 0, "train: negative class count");
        const double bn = std::pow(beta, static_cast<double>(counts[i]));
        if (verbatim_formula) {
            cw.w[i] = (1.0 - bn) / (1.0 - beta);
        } else {
            cw.w[i] = counts[i] == 0 ? 0.0 : (1.0 - beta) / (1.0 - bn);
        }
    }
    if (unknown_class >= 0) {
        require(static_cast<std::size_t>(unknown_class) < counts.size(), "train: unknown class out of range");
        std::size_t majority = 0;
        for (std::size_t i = 1; i < counts.size(); ++i)
            if (counts[i] > counts[majority]) majority = i;
        cw.w[static_cast<std::size_t>(unknown_class)] = cw.w[majority];
    }
    return cw;
}

// class uniform, then example uniform within class, with replacement
struct BalancedSampler {
    std::vector<std::vector<i64>> by_class;

    BalancedSampler(const std::vector<int>& labels, int n_classes) {
        by_class.resize(static_cast<std::size_t>(n_classes));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            require(labels[i] >= 0 && labels[i] < n_classes, "train: label out of range");
            by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<i64>(i));
        }
        for (int c = 0; c < n_classes; ++c)
            require(!by_class[static_cast<std::size_t>(c)].empty(),
                    "train: balanced resampling with empty class " + std::to_string(c));
    }

    i64 draw(Rng& rng) const {
        const auto c = static_cast<std::size_t>(rng.uniform_int(0, static_cast<i64>(by_class.size()) - 1));
        const auto& v = by_class[c];
        return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<i64>(v.size()) - 1))];
    }
};

template <class T>
void mixup(const Tensor<T>& x1, const Tensor<T>& y1, const Tensor<T>& x2, const Tensor<T>& y2,
           double alpha, Rng& rng, Tensor<T>& x_out, Tensor<T>& y_out) {
    require(alpha > 0.0, "train: mixup alpha must be > 0");
    require(x1.shape == x2.shape && y1.shape == y2.shape, "train: mixup shape mismatch");
    const double gamma = rng.beta(alpha, alpha);
    x_out = x1;
    y_out = y1;
    for (i64 i = 0; i < x_out.numel(); ++i)
        x_out.v[i] = static_cast<T>(gamma * x1.v[i] + (1.0 - gamma) * x2.v[i]);
    for (i64 i = 0; i < y_out.numel(); ++i)
        y_out.v[i] = static_cast<T>(gamma * y1.v[i] + (1.0 - gamma) * y2.v[i]);
}

// ---- softmax cross entropy on logits (fused, stable) ----

// returns mean loss; glogits gets (softmax - target) scaled by example
// weight / sum(weights). Targets may be soft (MixUp).
template <class T>
double softmax_ce(const Tensor<T>& logits, const Tensor<T>& targets_onehot,
                  const std::vector<double>* example_weights, Tensor<T>* glogits) {
    const i64 B = logits.size(0), C = logits.size(1);
    require(targets_onehot.size(0) == B && targets_onehot.size(1) == C, "train: target shape mismatch");
    double wsum = 0.0;
    for (i64 b = 0; b < B; ++b)
        wsum += example_weights ? (*example_weights)[static_cast<std::size_t>(b)] : 1.0;
    require(wsum > 0.0, "train: zero total example weight");
    if (glogits) glogits->zero();
    double total = 0.0;
    for (i64 b = 0; b < B; ++b) {
        const T* lrow = logits.data() + b * C;
        const T* trow = targets_onehot.data() + b * C;
        double mx = static_cast<double>(lrow[0]);
        for (i64 c = 1; c < C; ++c) mx = std::max(mx, static_cast<double>(lrow[c]));
        double denom = 0.0;
        for (i64 c = 0; c < C; ++c) denom += std::exp(static_cast<double>(lrow[c]) - mx);
        const double logz = mx + std::log(denom);
        const double w = example_weights ? (*example_weights)[static_cast<std::size_t>(b)] : 1.0;
        double ce = 0.0;
        for (i64 c = 0; c < C; ++c)
            ce += static_cast<double>(trow[c]) * (logz - static_cast<double>(lrow[c]));
        total += w * ce;
        if (glogits) {
            T* grow = glogits->data() + b * C;
            for (i64 c = 0; c < C; ++c) {
                const double p = std::exp(static_cast<double>(lrow[c]) - logz);
                grow[c] = static_cast<T>(w * (p - static_cast<double>(trow[c])) / wsum);
            }
        }
    }
    return total / wsum;
}

// ---- SSL model bundle ----

template <class T>
struct SslModel {
    nn::EncoderConfig enc_cfg;
    int n_subjects = 0;
    nn::EncoderG<T> g, gk;
    nn::ProjectionF<T> f, fk;
    nn::SubjectClassifier<T> csub;
    Tensor<T> log_tau{{1}};
    Tensor<T> log_tau_grad{{1}};

    SslModel(const nn::EncoderConfig& cfg, int n_sub, double tau_init, Rng& rng)
        : enc_cfg(cfg), n_subjects(n_sub), g(cfg), gk(cfg), f(cfg.embed_dim), fk(cfg.embed_dim),
          csub(cfg.embed_dim, std::max(2, n_sub)) {
        g.init(rng);
        f.init(rng);
        csub.init(rng);
        log_tau.v[0] = static_cast<T>(std::log(tau_init));
        sync_key_model();
    }

    void sync_key_model() {
        auto src = query_params(false);
        auto dst = key_params();
        nn::copy_params(src, dst);
        std::vector<nn::BufRef<T>> sb, db;
        g.collect_buffers("g", sb);
        gk.collect_buffers("gk", db);
        for (std::size_t i = 0; i < sb.size(); ++i) db[i].value->v = sb[i].value->v;
    }

    std::vector<ParamRef<T>> query_params(bool with_tau = true) {
        std::vector<ParamRef<T>> out;
        g.collect("g", out);
        f.collect("f", out);
        if (with_tau) out.push_back({"log_tau", &log_tau, &log_tau_grad});
        return out;
    }
    std::vector<ParamRef<T>> key_params() {
        std::vector<ParamRef<T>> out;
        gk.collect("gk", out);
        fk.collect("fk", out);
        return out;
    }
    std::vector<ParamRef<T>> csub_params() {
        std::vector<ParamRef<T>> out;
        csub.collect("csub", out);
        return out;
    }

    double tau() const { return std::exp(static_cast<double>(log_tau.v[0])); }
};

// ---- batch assembly ----

template <class T>
Tensor<T> segments_to_batch(const std::vector<dataio::Segment>& segs) {
    require(!segs.empty(), "train: empty batch");
    const i64 C = segs.front().channels, W = segs.front().samples;
    Tensor<T> out({static_cast<i64>(segs.size()), C, W});
    for (std::size_t b = 0; b < segs.size(); ++b) {
        require(segs[b].channels == C && segs[b].samples == W, "train: ragged batch");
        for (std::size_t i = 0; i < segs[b].data.size(); ++i)
            out.v[b * static_cast<std::size_t>(C * W) + i] = static_cast<T>(segs[b].data[i]);
    }
    return out;
}

// ---- SSL pretraining ----

struct PretrainCfg {
    i64 steps = 2000;
    i64 batch_size = 64;
    double lr = 1e-4;
    double weight_decay = 0.0;
    i64 window = 320;
    bool mode_center = false; // per-window ECG normalization
    std::uint64_t seed = 7;
};

struct StepMetrics {
    i64 step = 0;
    double loss = 0.0;
    double loss_infonce = 0.0;
    double loss_rsub = 0.0;
    double loss_csub = 0.0;
    double tau = 0.0;
    i64 queue_fill = 0;
    i64 anchors_skipped = 0;
};

using MetricsSink = std::function<void(const StepMetrics&)>;

// Remaps arbitrary subject ids to dense indices for the classifier.
struct SubjectIndex {
    std::map<int, int> to_dense;
    std::vector<int> ids;

    explicit SubjectIndex(const std::vector<Recording>& recs) {
        for (const auto& r : recs)
            if (!to_dense.count(r.subject_id)) {
                to_dense[r.subject_id] = static_cast<int>(ids.size());
                ids.push_back(r.subject_id);
            }
    }
    int size() const { return static_cast<int>(ids.size()); }
};

template <class T>
struct PretrainResult {
    contrast::KeyQueue<T> queue;
    Adam<T> opt_gf; // returned so checkpoints can carry optimizer state
    double first_loss = 0.0;
    double last_loss = 0.0;
    i64 steps_run = 0;
};

// One SSL pretraining run. Every random draw comes from a stream derived
// from (seed, step, item, role), so reruns are bit-identical in a given
// precision and the loop itself can stay single-threaded while kernels
// parallelize internally.
template <class T>
PretrainResult<T> pretrain_ssl(SslModel<T>& model, const std::vector<Recording>& recs,
                               const dataio::Montage* montage, const augment::AugmentPipeline& pipeline,
                               const LossConfig& loss_cfg, const PretrainCfg& cfg,
                               const MetricsSink& sink = nullptr) {
    loss_cfg.validate();
    require(!recs.empty(), "train: pretraining needs at least one recording");
    const SubjectIndex subj_index(recs);
    if (loss_cfg.variant == LossVariant::subject_invariant)
        require(subj_index.size() >= 2, "train: subject-invariant training needs >= 2 subjects");

    // delay margin shrinks the valid base-offset range
    i64 margin = 0;
    for (const auto& s : pipeline.specs)
        if (s.kind == augment::Kind::temporal_delay) margin = std::max(margin, s.max_delay);

    std::vector<std::size_t> usable;
    std::vector<i64> offsets; // cumulative count of valid base starts
    i64 total_offsets = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const i64 valid = recs[i].samples - cfg.window - 2 * margin + 1;
        if (valid > 0) {
            usable.push_back(i);
            total_offsets += valid;
            offsets.push_back(total_offsets);
        }
    }
    require(total_offsets > 0, "train: no recording long enough for window plus delay margin");

    const i64 embed = model.enc_cfg.embed_dim;
    PretrainResult<T> result{contrast::KeyQueue<T>(64, loss_cfg.queue_capacity)};

    Adam<T> opt_gf, opt_csub;
    opt_gf.lr = cfg.lr;
    opt_gf.weight_decay = cfg.weight_decay;
    auto gf_params = model.query_params();
    opt_gf.init(gf_params);
    auto csub_params = model.csub_params();
    opt_csub.lr = cfg.lr;
    opt_csub.init(csub_params);

    nn::L2Normalize<T> qnorm;
    const bool adversarial = loss_cfg.variant == LossVariant::subject_invariant;

    for (i64 step = 0; step < cfg.steps; ++step) {
        // sample batch positions uniformly over all valid offsets
        Rng batch_rng = Rng::stream(cfg.seed, 0xBA7C4, static_cast<std::uint64_t>(step));
        std::vector<dataio::Segment> views1, views2;
        std::vector<int> subject_ids, subject_dense;
        views1.reserve(static_cast<std::size_t>(cfg.batch_size));
        views2.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (i64 b = 0; b < cfg.batch_size; ++b) {
            const i64 pick = batch_rng.uniform_int(0, total_offsets - 1);
            const auto it = std::upper_bound(offsets.begin(), offsets.end(), pick);
            const auto ui = static_cast<std::size_t>(it - offsets.begin());
            const Recording& rec = recs[usable[ui]];
            const i64 prev = ui == 0 ? 0 : offsets[ui - 1];
            const i64 base = margin + (pick - prev);

            augment::SegmentSource src;
            src.recording = &rec;
            src.base_start = base;
            src.length = cfg.window;
            src.dataset = &recs;
            src.montage = montage;
            src.fs = rec.sample_rate_hz;
            dataio::Segment seg = dataio::extract_window(rec, base, cfg.window);
            if (cfg.mode_center) seg = dataio::mode_center_normalize(seg);
            Rng rng1 = Rng::stream(cfg.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(b), 1);
            Rng rng2 = Rng::stream(cfg.seed, static_cast<std::uint64_t>(step), static_cast<std::uint64_t>(b), 2);
            views1.push_back(augment::apply_pipeline(seg, src, pipeline, rng1));
            views2.push_back(augment::apply_pipeline(seg, src, pipeline, rng2));
            subject_ids.push_back(rec.subject_id);
            subject_dense.push_back(subj_index.to_dense.at(rec.subject_id));
        }

        Tensor<T> x1 = segments_to_batch<T>(views1);
        Tensor<T> x2 = segments_to_batch<T>(views2);

        // query path
        Tensor<T> h = model.g.forward(x1, true);

        // adversarial classifier first, on detached latents
        double loss_csub = 0.0, loss_rsub = 0.0;
        if (adversarial) {
            nn::zero_grads(csub_params);
            Tensor<T> probs = model.csub.forward(h);
            Tensor<T> gprobs(probs.shape);
            loss_csub = contrast::subject_ce_loss(probs, subject_dense, &gprobs);
            model.csub.backward(gprobs); // h is detached: gradient w.r.t. h discarded
            opt_csub.step(csub_params);
        }

        Tensor<T> q = qnorm.forward(model.f.forward(h));

        // key path, no gradients
        Tensor<T> hk = model.gk.forward(x2, true);
        Tensor<T> k = nn::l2_normalize(model.fk.forward(hk));

        const auto negs = contrast::select_negatives(result.queue, subject_ids, loss_cfg.variant,
                                                     loss_cfg.min_negatives);

        nn::zero_grads(gf_params);
        nn::zero_grads(csub_params); // r_sub backprop passes through frozen C_sub
        Tensor<T> gq(q.shape);
        T glogtau = T(0);
        const auto nce = contrast::info_nce(q, k, result.queue, negs, static_cast<T>(model.tau()),
                                            &gq, static_cast<Tensor<T>*>(nullptr), &glogtau);
        model.log_tau_grad.v[0] = glogtau;

        Tensor<T> gh = model.f.backward(qnorm.backward(gq));
        if (adversarial && loss_cfg.lambda > 0.0) {
            Tensor<T> probs = model.csub.forward(h);
            Tensor<T> gprobs(probs.shape);
            loss_rsub = contrast::subject_confusion_reg(probs, subject_dense, &gprobs);
            for (auto& v : gprobs.v) v = static_cast<T>(v * loss_cfg.lambda);
            Tensor<T> gh2 = model.csub.backward(gprobs);
            for (i64 i = 0; i < gh.numel(); ++i) gh.v[i] += gh2.v[i];
        }
        model.g.backward(gh);
        opt_gf.step(gf_params);
        model.log_tau.v[0] = contrast::clamp_log_tau(model.log_tau.v[0], loss_cfg.tau_min, loss_cfg.tau_max);

        auto key_refs = model.key_params();
        contrast::momentum_update(key_refs, model.query_params(false),
                                  static_cast<T>(loss_cfg.key_momentum));
        result.queue.enqueue(k, subject_ids);

        StepMetrics sm;
        sm.step = step;
        sm.loss_infonce = nce.loss;
        sm.loss_rsub = loss_rsub;
        sm.loss_csub = loss_csub;
        sm.loss = nce.loss + loss_cfg.lambda * loss_rsub;
        sm.tau = model.tau();
        sm.queue_fill = result.queue.fill;
        sm.anchors_skipped = nce.anchors_skipped;
        if (!std::isfinite(sm.loss) || !std::isfinite(sm.loss_csub))
            throw Error("train: non-finite loss at step " + std::to_string(step) +
                        " (infonce=" + std::to_string(sm.loss_infonce) +
                        ", rsub=" + std::to_string(sm.loss_rsub) +
                        ", csub=" + std::to_string(sm.loss_csub) + ", tau=" + std::to_string(sm.tau) + ")");
        if (sink) sink(sm);
        if (step == 0) result.first_loss = sm.loss;
        result.last_loss = sm.loss;
        ++result.steps_run;
    }
    (void)embed;
    result.opt_gf = std::move(opt_gf);
    return result;
}

// ---- embeddings & linear heads ----

template <class T>
Tensor<T> embed_windows(nn::EncoderG<T>& encoder, const std::vector<Recording>& recs,
                        const std::vector<WindowRef>& windows, i64 window_len, i64 batch_size = 256,
                        bool mode_center = false) {
    Tensor<T> out({static_cast<i64>(windows.size()), encoder.cfg.embed_dim});
    std::vector<dataio::Segment> segs;
    for (std::size_t start = 0; start < windows.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(windows.size(), start + static_cast<std::size_t>(batch_size));
        segs.clear();
        for (std::size_t i = start; i < end; ++i) {
            dataio::Segment seg = dataio::materialize(recs, windows[i], window_len);
            if (mode_center) seg = dataio::mode_center_normalize(seg);
            segs.push_back(std::move(seg));
        }
        Tensor<T> x = segments_to_batch<T>(segs);
        Tensor<T> h = encoder.forward(x, false);
        for (std::size_t i = start; i < end; ++i)
            for (i64 d = 0; d < h.size(1); ++d)
                out.at2(static_cast<i64>(i), d) = h.at2(static_cast<i64>(i - start), d);
    }
    return out;
}

enum class SamplingMode { shuffle, balanced_resample, weighted_ce };

struct HeadCfg {
    double lr = 1e-3;
    double weight_decay = 0.01;
    i64 batch_size = 256;
    i64 epochs = 200;
    SamplingMode sampling = SamplingMode::shuffle;
    double class_weight_beta = 0.999;
    bool verbatim_class_weights = false;
    int unknown_class = -1;
    std::uint64_t seed = 7;
};

template <class T>
struct TrainedHead {
    nn::Linear<T> linear;
    double final_loss = 0.0;
};

template <class T>
Tensor<T> onehot(const std::vector<int>& labels, i64 n_classes) {
    Tensor<T> out({static_cast<i64>(labels.size()), n_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && labels[i] < n_classes, "train: label out of range");
        out.at2(static_cast<i64>(i), labels[i]) = T(1);
    }
    return out;
}

// Logistic-regression head on fixed features.
template <class T>
TrainedHead<T> train_linear_head(const Tensor<T>& features, const std::vector<int>& labels,
                                 i64 n_classes, const HeadCfg& cfg) {
    const i64 N = features.size(0), D = features.size(1);
    require(static_cast<i64>(labels.size()) == N, "train: feature/label count mismatch");
    require(n_classes >= 2, "train: need at least 2 classes");
    {
        std::vector<bool> seen(static_cast<std::size_t>(n_classes), false);
        for (int l : labels) seen[static_cast<std::size_t>(l)] = true;
        int distinct = 0;
        for (bool b : seen) distinct += b ? 1 : 0;
        require(distinct >= 2, "train: labels contain a single class");
    }

    TrainedHead<T> th;
    th.linear = nn::Linear<T>(D, n_classes);
    Rng init_rng = Rng::stream(cfg.seed, 0x4EAD);
    th.linear.init(init_rng);
    std::vector<ParamRef<T>> params;
    th.linear.collect("head", params);
    Adam<T> opt;
    opt.lr = cfg.lr;
    opt.weight_decay = cfg.weight_decay;
    opt.init(params);

    std::vector<double> weights_by_class;
    if (cfg.sampling == SamplingMode::weighted_ce) {
        std::vector<i64> counts(static_cast<std::size_t>(n_classes), 0);
        for (int l : labels) counts[static_cast<std::size_t>(l)]++;
        weights_by_class = class_balanced_weights(counts, cfg.class_weight_beta,
                                                  cfg.verbatim_class_weights, cfg.unknown_class)
                               .w;
    }
    std::unique_ptr<BalancedSampler> sampler;
    if (cfg.sampling == SamplingMode::balanced_resample)
        sampler = std::make_unique<BalancedSampler>(labels, static_cast<int>(n_classes));

    std::vector<i64> order(static_cast<std::size_t>(N));
    for (i64 i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;

    for (i64 epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = Rng::stream(cfg.seed, 0xE90C4, static_cast<std::uint64_t>(epoch));
        if (cfg.sampling == SamplingMode::balanced_resample) {
            for (auto& o : order) o = sampler->draw(rng);
        } else {
            for (i64 i = N - 1; i > 0; --i)
                std::swap(order[static_cast<std::size_t>(i)],
                          order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        }
        for (i64 start = 0; start < N; start += cfg.batch_size) {
            const i64 bsz = std::min(cfg.batch_size, N - start);
            Tensor<T> x({bsz, D});
            std::vector<int> y(static_cast<std::size_t>(bsz));
            std::vector<double> ew(static_cast<std::size_t>(bsz), 1.0);
            for (i64 b = 0; b < bsz; ++b) {
                const i64 src = order[static_cast<std::size_t>(start + b)];
                for (i64 d = 0; d < D; ++d) x.at2(b, d) = features.at2(src, d);
                y[static_cast<std::size_t>(b)] = labels[static_cast<std::size_t>(src)];
                if (cfg.sampling == SamplingMode::weighted_ce)
                    ew[static_cast<std::size_t>(b)] =
                        weights_by_class[static_cast<std::size_t>(y[static_cast<std::size_t>(b)])];
            }
            Tensor<T> targets = onehot<T>(y, n_classes);
            nn::zero_grads(params);
            Tensor<T> logits = th.linear.forward(x);
            Tensor<T> glogits(logits.shape);
            th.final_loss = softmax_ce(logits, targets,
                                       cfg.sampling == SamplingMode::weighted_ce ? &ew : nullptr, &glogits);
            th.linear.backward(glogits);
            opt.step(params);
        }
    }
    return th;
}

template <class T>
std::vector<int> predict(nn::Linear<T>& head, const Tensor<T>& features) {
    Tensor<T> logits = head.forward(features);
    std::vector<int> pred(static_cast<std::size_t>(logits.size(0)));
    for (i64 b = 0; b < logits.size(0); ++b) {
        i64 best = 0;
        for (i64 c = 1; c < logits.size(1); ++c)
            if (logits.at2(b, c) > logits.at2(b, best)) best = c;
        pred[static_cast<std::size_t>(b)] = static_cast<int>(best);
    }
    return pred;
}

// ---- fine-tuning ----

struct FinetuneCfg {
    double lr = 1e-5;
    i64 batch_size = 256;
    i64 epochs = 200;
    double mixup_alpha = 0.0; // 0 disables MixUp
    bool mode_center = false;
    std::uint64_t seed = 7;
};

// Head plus encoder updated end to end; optional MixUp and augmentation.
template <class T>
double finetune(nn::EncoderG<T>& encoder, nn::Linear<T>& head, const std::vector<Recording>& recs,
                const std::vector<WindowRef>& windows, i64 window_len, i64 n_classes,
                const FinetuneCfg& cfg, const augment::AugmentPipeline* pipeline = nullptr,
                const dataio::Montage* montage = nullptr) {
    const auto N = static_cast<i64>(windows.size());
    require(N > 0, "train: empty fine-tuning set");
    std::vector<ParamRef<T>> params;
    encoder.collect("g", params);
    head.collect("head", params);
    Adam<T> opt;
    opt.lr = cfg.lr;
    opt.init(params);

    std::vector<i64> order(static_cast<std::size_t>(N));
    for (i64 i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
    double last_loss = 0.0;

    for (i64 epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng = Rng::stream(cfg.seed, 0xF17E, static_cast<std::uint64_t>(epoch));
        for (i64 i = N - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        for (i64 start = 0; start < N; start += cfg.batch_size) {
            const i64 bsz = std::min(cfg.batch_size, N - start);
            if (bsz < 2) continue;
            std::vector<dataio::Segment> segs;
            std::vector<int> y;
            for (i64 b = 0; b < bsz; ++b) {
                const auto& w = windows[static_cast<std::size_t>(order[static_cast<std::size_t>(start + b)])];
                dataio::Segment seg = dataio::materialize(recs, w, window_len);
                if (cfg.mode_center) seg = dataio::mode_center_normalize(seg);
                if (pipeline) {
                    augment::SegmentSource src;
                    src.recording = &recs[static_cast<std::size_t>(w.recording)];
                    src.base_start = w.start;
                    src.length = window_len;
                    src.dataset = &recs;
                    src.montage = montage;
                    src.fs = src.recording->sample_rate_hz;
                    Rng arng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(epoch),
                                           static_cast<std::uint64_t>(start + b), 3);
                    seg = augment::apply_pipeline(seg, src, *pipeline, arng);
                }
                segs.push_back(std::move(seg));
                y.push_back(w.label);
            }
            Tensor<T> x = segments_to_batch<T>(segs);
            Tensor<T> targets = onehot<T>(y, n_classes);
            if (cfg.mixup_alpha > 0.0) {
                // pair each example with its batch neighbor under a rolled index
                Tensor<T> x2 = x, t2 = targets;
                for (i64 b = 0; b < bsz; ++b) {
                    const i64 src = (b + 1) % bsz;
                    for (i64 j = 0; j < x.numel() / bsz; ++j)
                        x2.v[static_cast<std::size_t>(b * (x.numel() / bsz) + j)] =
                            x.v[static_cast<std::size_t>(src * (x.numel() / bsz) + j)];
                    for (i64 c = 0; c < n_classes; ++c) t2.at2(b, c) = targets.at2(src, c);
                }
                Rng mrng = Rng::stream(cfg.seed, 0x3117, static_cast<std::uint64_t>(epoch),
                                       static_cast<std::uint64_t>(start));
                Tensor<T> xm, tm;
                mixup(x, targets, x2, t2, cfg.mixup_alpha, mrng, xm, tm);
                x = std::move(xm);
                targets = std::move(tm);
            }
            nn::zero_grads(params);
            Tensor<T> h = encoder.forward(x, true);
            Tensor<T> logits = head.forward(h);
            Tensor<T> glogits(logits.shape);
            last_loss = softmax_ce(logits, targets, nullptr, &glogits);
            encoder.backward(head.backward(glogits));
            opt.step(params);
        }
    }
    return last_loss;
}

// ---- checkpoint assembly ----

template <class T>
void save_ssl_checkpoint(const std::string& path, SslModel<T>& model, i64 step,
                         Adam<T>* opt_gf = nullptr) {
    std::vector<checkpoint::NamedTensorRef<T>> refs;
    auto add_params = [&refs](std::vector<ParamRef<T>> ps) {
        for (auto& p : ps) refs.push_back({p.name, p.value});
    };
    add_params(model.query_params(false));
    add_params(model.key_params());
    add_params(model.csub_params());
    std::vector<nn::BufRef<T>> bufs;
    model.g.collect_buffers("g", bufs);
    model.gk.collect_buffers("gk", bufs);
    for (auto& b : bufs) refs.push_back({b.name, b.value});
    if (opt_gf) {
        auto ps = model.query_params();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            refs.push_back({"opt.m." + ps[i].name, &opt_gf->m[i]});
            refs.push_back({"opt.v." + ps[i].name, &opt_gf->v[i]});
        }
    }
    std::map<std::string, double> scalars;
    scalars["step"] = static_cast<double>(step);
    scalars["log_tau"] = static_cast<double>(model.log_tau.v[0]);
    scalars["n_subjects"] = static_cast<double>(model.n_subjects);
    if (opt_gf) scalars["opt.t"] = static_cast<double>(opt_gf->t);
    checkpoint::save(path, refs, scalars);
}

template <class T>
void load_ssl_checkpoint(const checkpoint::LoadedCheckpoint& ck, SslModel<T>& model) {
    auto fill_params = [&ck](std::vector<ParamRef<T>> ps) {
        for (auto& p : ps) ck.fill(p.name, *p.value);
    };
    fill_params(model.query_params(false));
    fill_params(model.key_params());
    fill_params(model.csub_params());
    std::vector<nn::BufRef<T>> bufs;
    model.g.collect_buffers("g", bufs);
    model.gk.collect_buffers("gk", bufs);
    for (auto& b : bufs) ck.fill(b.name, *b.value);
    model.log_tau.v[0] = static_cast<T>(ck.scalars.at("log_tau"));
}

} // namespace sacl::train
