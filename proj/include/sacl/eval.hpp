#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sacl/train.hpp"

// Metrics, probe protocols, and the ECG feature plumbing.

namespace sacl::eval {

using kernels::i64;

struct ConfusionMatrix {
    i64 n_classes = 0;
    std::vector<i64> m; // rows = true, cols = predicted
    std::vector<std::string> names;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(i64 n) : n_classes(n), m(static_cast<std::size_t>(n * n), 0) {
        for (i64 i = 0; i < n; ++i) names.push_back("class" + std::to_string(i));
    }

    i64& at(i64 t, i64 p) { return m[static_cast<std::size_t>(t * n_classes + p)]; }
    i64 at(i64 t, i64 p) const { return m[static_cast<std::size_t>(t * n_classes + p)]; }

    i64 total() const {
        i64 s = 0;
        for (auto v : m) s += v;
        return s;
    }
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 i64 n_classes) {
    require(y_true.size() == y_pred.size(), "eval: prediction count mismatch");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        require(y_true[i] >= 0 && y_true[i] < n_classes,
                "eval: true label " + std::to_string(y_true[i]) + " out of range");
        require(y_pred[i] >= 0 && y_pred[i] < n_classes,
                "eval: predicted label " + std::to_string(y_pred[i]) + " out of range");
        cm.at(y_true[i], y_pred[i])++;
    }
    return cm;
}

struct ClassMetrics {
    std::string name;
    double sensitivity = 0.0;          // percent
    double positive_predictivity = 0.0; // percent
    double f1 = 0.0;                   // scaled by 100 to match the tables
    bool zero_true = false;
    bool zero_predicted = false;
};

struct MetricReport {
    double overall_accuracy = 0.0;  // percent
    double balanced_accuracy = 0.0; // percent, mean sensitivity over included classes
    std::vector<ClassMetrics> per_class;
    std::vector<std::string> excluded_classes;
};

// Se_c = TP/row, +P_c = TP/col, F1 = harmonic mean; zero denominators give
// 0 and are flagged. Balanced accuracy averages sensitivities over classes
// not listed in `excluded`.
inline MetricReport metrics_from_confusion(const ConfusionMatrix& cm,
                                           const std::set<i64>& excluded = {}) {
    require(cm.n_classes >= 1, "eval: empty confusion matrix");
    const i64 total = cm.total();
    require(total > 0, "eval: confusion matrix has no observations");

    MetricReport rep;
    i64 trace = 0;
    for (i64 c = 0; c < cm.n_classes; ++c) trace += cm.at(c, c);
    rep.overall_accuracy = 100.0 * static_cast<double>(trace) / static_cast<double>(total);

    double se_sum = 0.0;
    i64 included = 0;
    for (i64 c = 0; c < cm.n_classes; ++c) {
        ClassMetrics m;
        m.name = cm.names[static_cast<std::size_t>(c)];
        i64 row = 0, col = 0;
        for (i64 j = 0; j < cm.n_classes; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        const auto tp = static_cast<double>(cm.at(c, c));
        m.zero_true = row == 0;
        m.zero_predicted = col == 0;
        const double se = row > 0 ? tp / static_cast<double>(row) : 0.0;
        const double pp = col > 0 ? tp / static_cast<double>(col) : 0.0;
        m.sensitivity = 100.0 * se;
        m.positive_predictivity = 100.0 * pp;
        m.f1 = (se + pp) > 0.0 ? 100.0 * 2.0 * se * pp / (se + pp) : 0.0;
        rep.per_class.push_back(m);
        if (excluded.count(c)) {
            rep.excluded_classes.push_back(m.name);
        } else {
            se_sum += se;
            ++included;
        }
    }
    require(included > 0, "eval: all classes excluded from balanced accuracy");
    rep.balanced_accuracy = 100.0 * se_sum / static_cast<double>(included);
    return rep;
}

inline std::string confusion_to_csv(const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "true\\pred";
    for (i64 p = 0; p < cm.n_classes; ++p) out << "," << cm.names[static_cast<std::size_t>(p)];
    out << "\n";
    for (i64 t = 0; t < cm.n_classes; ++t) {
        out << cm.names[static_cast<std::size_t>(t)];
        for (i64 p = 0; p < cm.n_classes; ++p) out << "," << cm.at(t, p);
        out << "\n";
    }
    return out.str();
}

// elementwise mean of exactly 5 consecutive embeddings
template <class T>
std::vector<T> rhythm_pool(const std::vector<std::vector<T>>& embeddings) {
    require(embeddings.size() == 5, "eval: rhythm pooling expects exactly 5 vectors, got " +
                                        std::to_string(embeddings.size()));
    const std::size_t d = embeddings.front().size();
    std::vector<T> out(d, T(0));
    for (const auto& e : embeddings) {
        require(e.size() == d, "eval: rhythm pooling dimension mismatch");
        for (std::size_t i = 0; i < d; ++i) out[i] += e[i];
    }
    for (auto& v : out) v /= T(5);
    return out;
}

struct RrFeature {
    std::int64_t beat_sample = 0;
    double rr_prev_norm = 0.0;
    double rr_next_norm = 0.0;
};

// RR intervals around each beat, normalized by the recording's mean RR;
// first and last beats are dropped.
inline std::vector<RrFeature> rr_features(const dataio::Recording& rec) {
    std::vector<std::int64_t> beats;
    for (const auto& a : rec.annotations)
        if (a.kind == "beat") beats.push_back(a.sample_index);
    std::sort(beats.begin(), beats.end());
    require(beats.size() >= 3, "eval: rr_features needs >= 3 beats, got " + std::to_string(beats.size()));

    double mean_rr = 0.0;
    for (std::size_t i = 1; i < beats.size(); ++i)
        mean_rr += static_cast<double>(beats[i] - beats[i - 1]);
    mean_rr /= static_cast<double>(beats.size() - 1);
    require(mean_rr > 0.0, "eval: degenerate beat sequence");

    std::vector<RrFeature> out;
    for (std::size_t i = 1; i + 1 < beats.size(); ++i) {
        RrFeature f;
        f.beat_sample = beats[i];
        f.rr_prev_norm = static_cast<double>(beats[i] - beats[i - 1]) / mean_rr;
        f.rr_next_norm = static_cast<double>(beats[i + 1] - beats[i]) / mean_rr;
        out.push_back(f);
    }
    return out;
}

enum class SubjectIdProtocol { eeg_intrasubject, ecg_first_5min };

// Linear probe for subject identity on frozen embeddings. EEG protocol
// splits each recording 75/25 in time; ECG trains on the first 5 minutes
// per subject and tests on the remainder.
template <class T>
double subject_id_probe(nn::EncoderG<T>& encoder, const std::vector<dataio::Recording>& recs,
                        SubjectIdProtocol protocol, i64 window_len, const train::HeadCfg& cfg,
                        i64 stride = 0) {
    const train::SubjectIndex subj(recs);
    require(subj.size() >= 2, "eval: subject-id probe needs >= 2 subjects");
    if (stride <= 0) stride = window_len;

    auto windows = dataio::enumerate_tiled_windows(recs, window_len, stride);
    std::vector<dataio::WindowRef> train_w, test_w;
    if (protocol == SubjectIdProtocol::eeg_intrasubject) {
        dataio::SplitSpec spec;
        spec.mode = dataio::SplitMode::intrasubject;
        auto split = dataio::make_splits(recs, windows, window_len, spec);
        train_w = std::move(split.train);
        test_w = std::move(split.test);
    } else {
        for (const auto& w : windows) {
            const auto& r = recs[static_cast<std::size_t>(w.recording)];
            const auto boundary = static_cast<std::int64_t>(300.0 * r.sample_rate_hz);
            if (w.start + window_len <= boundary) train_w.push_back(w);
            else if (w.start >= boundary) test_w.push_back(w);
        }
    }
    require(!train_w.empty() && !test_w.empty(), "eval: subject-id probe split produced an empty side");

    auto label_of = [&](const dataio::WindowRef& w) { return subj.to_dense.at(w.subject_id); };
    std::vector<int> y_train, y_test;
    for (const auto& w : train_w) y_train.push_back(label_of(w));
    for (const auto& w : test_w) y_test.push_back(label_of(w));

    Tensor<T> x_train = train::embed_windows(encoder, recs, train_w, window_len);
    Tensor<T> x_test = train::embed_windows(encoder, recs, test_w, window_len);
    auto head = train::train_linear_head(x_train, y_train, subj.size(), cfg);
    const auto pred = train::predict(head.linear, x_test);

    i64 correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == y_test[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

} // namespace sacl::eval
