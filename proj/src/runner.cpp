#include "sacl/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "sacl/eval.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sacl::runner {

namespace {

struct LoadedData {
    std::vector<dataio::Recording> recs;
    std::optional<dataio::Montage> montage;
    std::uint64_t hash = 0;
};

LoadedData load_data(const config::ExperimentConfig& cfg) {
    LoadedData d;
    if (!cfg.dataset.manifest.empty()) {
        d.recs = dataio::load_dataset(cfg.dataset.manifest, cfg.window.length);
    } else {
        d.recs = dataio::generate_synthetic(*cfg.dataset.synthetic);
    }
    d.hash = dataio::dataset_hash(d.recs);
    if (!cfg.dataset.montage.empty()) {
        d.montage = dataio::load_montage(cfg.dataset.montage, d.recs.front().channel_names);
    } else if (!cfg.dataset.manifest.empty()) {
        // montage next to the manifest, when present
        const fs::path p = fs::path(cfg.dataset.manifest).parent_path() / "montage.json";
        if (fs::exists(p)) d.montage = dataio::load_montage(p.string(), d.recs.front().channel_names);
    } else {
        d.montage = dataio::grid_montage(d.recs.front().channels);
    }

    if (cfg.preprocess.rereference)
        for (auto& r : d.recs) r = dataio::rereference_channel_average(r);
    if (cfg.preprocess.zscore) {
        const auto stats = dataio::compute_stats(d.recs);
        for (auto& r : d.recs) r = dataio::zscore_normalize(r, stats);
    }
    return d;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    require(out.good(), "runner: cannot write " + path.string());
    out << text;
    require(out.good(), "runner: write failed for " + path.string());
}

void write_run_manifest(const config::ExperimentConfig& cfg, const std::string& command,
                        std::uint64_t dataset_hash, const std::vector<std::string>& outputs) {
    json run;
    run["command"] = command;
    run["config"] = cfg.to_json();
    run["dataset_hash"] = hex64(dataset_hash);
    run["outputs"] = outputs;
    write_text(fs::path(cfg.out) / "run.json", run.dump(2) + "\n");
}

json report_to_json(const eval::MetricReport& rep, const EvalSummary& summary,
                    const std::string& target) {
    json doc;
    doc["target"] = target;
    doc["overall_accuracy"] = rep.overall_accuracy;
    doc["balanced_accuracy"] = rep.balanced_accuracy;
    doc["n_train"] = summary.n_train;
    doc["n_test"] = summary.n_test;
    json per = json::array();
    for (const auto& c : rep.per_class)
        per.push_back({{"name", c.name},
                       {"sensitivity", c.sensitivity},
                       {"positive_predictivity", c.positive_predictivity},
                       {"f1", c.f1},
                       {"zero_true", c.zero_true},
                       {"zero_predicted", c.zero_predicted}});
    doc["per_class"] = per;
    doc["excluded_classes"] = rep.excluded_classes;
    return doc;
}

// Labeled train/test windows per the eval section. Subject targets take
// their labels from the subject index; the ECG protocol replaces the
// temporal split with a first-5-minutes boundary.
struct EvalWindows {
    std::vector<dataio::WindowRef> train, test;
    std::int64_t n_classes = 0;
};

EvalWindows build_eval_windows(const config::ExperimentConfig& cfg,
                               const std::vector<dataio::Recording>& recs) {
    const auto W = cfg.window.length;
    const std::int64_t group = cfg.eval.rhythm_pool ? 5 : 1;
    const std::int64_t span = W * group;
    const std::int64_t train_stride = cfg.window.train_stride > 0 ? cfg.window.train_stride : span;
    const std::int64_t test_stride = cfg.window.test_stride > 0 ? cfg.window.test_stride : span;

    const bool subject_target = cfg.eval.target == "subject";
    auto enumerate = [&](std::int64_t stride) {
        std::vector<dataio::WindowRef> ws;
        if (subject_target) {
            ws = dataio::enumerate_tiled_windows(recs, span, stride);
        } else if (cfg.eval.label_source == "task") {
            ws = dataio::enumerate_task_windows(recs, span, cfg.window.cue_offset_sec);
        } else if (cfg.eval.label_source == "beat") {
            ws = dataio::enumerate_beat_windows(recs, span);
        } else {
            ws = dataio::enumerate_rhythm_windows(recs, span, stride);
        }
        return ws;
    };

    EvalWindows out;
    const train::SubjectIndex subj(recs);
    if (subject_target && cfg.eval.subject_protocol == "ecg") {
        for (auto& w : enumerate(train_stride)) {
            const auto& r = recs[static_cast<std::size_t>(w.recording)];
            const auto boundary = static_cast<std::int64_t>(300.0 * r.sample_rate_hz);
            if (w.start + span <= boundary) out.train.push_back(w);
        }
        for (auto& w : enumerate(test_stride)) {
            const auto& r = recs[static_cast<std::size_t>(w.recording)];
            const auto boundary = static_cast<std::int64_t>(300.0 * r.sample_rate_hz);
            if (w.start >= boundary) out.test.push_back(w);
        }
    } else {
        dataio::SplitSpec spec;
        spec.mode = cfg.eval.split == "intersubject" ? dataio::SplitMode::intersubject
                                                     : dataio::SplitMode::intrasubject;
        spec.train_subjects = cfg.eval.train_subjects;
        spec.test_subjects = cfg.eval.test_subjects;
        spec.train_fraction = cfg.eval.train_fraction;
        if (spec.mode == dataio::SplitMode::intersubject)
            require(!spec.train_subjects.empty() && !spec.test_subjects.empty(),
                    "runner: intersubject evaluation needs eval.train_subjects and eval.test_subjects");
        auto train_split = dataio::make_splits(recs, enumerate(train_stride), span, spec);
        out.train = std::move(train_split.train);
        if (train_stride == test_stride) {
            out.test = std::move(train_split.test);
        } else {
            auto test_split = dataio::make_splits(recs, enumerate(test_stride), span, spec);
            out.test = std::move(test_split.test);
        }
    }

    if (subject_target)
        for (auto* side : {&out.train, &out.test})
            for (auto& w : *side) w.label = subj.to_dense.at(w.subject_id);

    require(!out.train.empty(), "runner: evaluation train split is empty");
    require(!out.test.empty(), "runner: evaluation test split is empty");

    if (cfg.eval.n_classes > 0) {
        out.n_classes = cfg.eval.n_classes;
    } else {
        int mx = -1;
        for (const auto* side : {&out.train, &out.test})
            for (const auto& w : *side) mx = std::max(mx, w.label);
        require(mx >= 1, "runner: need at least two classes in the labels");
        out.n_classes = mx + 1;
    }
    for (const auto* side : {&out.train, &out.test})
        for (const auto& w : *side)
            require(w.label >= 0 && w.label < out.n_classes,
                    "runner: label " + std::to_string(w.label) + " outside [0," +
                        std::to_string(out.n_classes) + ")");
    return out;
}

// Embedding matrix for probe/eval: plain windows, or groups of 5 pooled
// windows for rhythm classification, optionally with RR features appended.
template <class T>
Tensor<T> probe_features(nn::EncoderG<T>& enc, const std::vector<dataio::Recording>& recs,
                         const std::vector<dataio::WindowRef>& windows,
                         const config::ExperimentConfig& cfg, std::vector<int>& labels_out) {
    const auto W = cfg.window.length;
    const bool mode_center = cfg.preprocess.mode_center;
    labels_out.clear();
    for (const auto& w : windows) labels_out.push_back(w.label);

    Tensor<T> emb;
    if (cfg.eval.rhythm_pool) {
        // each WindowRef spans 5 consecutive windows; embed each and average
        std::vector<dataio::WindowRef> parts;
        parts.reserve(windows.size() * 5);
        for (const auto& w : windows)
            for (int k = 0; k < 5; ++k) parts.push_back({w.recording, w.start + k * W, w.subject_id, w.label});
        Tensor<T> all = train::embed_windows(enc, recs, parts, W, 256, mode_center);
        emb = Tensor<T>({static_cast<std::int64_t>(windows.size()), enc.cfg.embed_dim});
        for (std::size_t i = 0; i < windows.size(); ++i) {
            std::vector<std::vector<T>> five;
            for (int k = 0; k < 5; ++k) {
                std::vector<T> row(static_cast<std::size_t>(enc.cfg.embed_dim));
                for (std::int64_t d = 0; d < enc.cfg.embed_dim; ++d)
                    row[static_cast<std::size_t>(d)] = all.at2(static_cast<std::int64_t>(i * 5 + k), d);
                five.push_back(std::move(row));
            }
            const auto pooled = eval::rhythm_pool(five);
            for (std::int64_t d = 0; d < enc.cfg.embed_dim; ++d)
                emb.at2(static_cast<std::int64_t>(i), d) = pooled[static_cast<std::size_t>(d)];
        }
    } else {
        emb = train::embed_windows(enc, recs, windows, W, 256, mode_center);
    }

    if (!cfg.eval.rr_features) return emb;

    // append (rr_prev, rr_next), matching beat windows by their center sample
    std::vector<std::map<std::int64_t, std::pair<double, double>>> rr_by_rec(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i)
        for (const auto& f : eval::rr_features(recs[i]))
            rr_by_rec[i][f.beat_sample] = {f.rr_prev_norm, f.rr_next_norm};

    Tensor<T> out({emb.size(0), emb.size(1) + 2});
    for (std::int64_t i = 0; i < emb.size(0); ++i) {
        const auto& w = windows[static_cast<std::size_t>(i)];
        const std::int64_t beat = w.start + W / 2;
        const auto& m = rr_by_rec[static_cast<std::size_t>(w.recording)];
        const auto it = m.find(beat);
        double prev = 1.0, next = 1.0; // boundary beats fall back to the mean RR
        if (it != m.end()) {
            prev = it->second.first;
            next = it->second.second;
        }
        for (std::int64_t d = 0; d < emb.size(1); ++d) out.at2(i, d) = emb.at2(i, d);
        out.at2(i, emb.size(1)) = static_cast<T>(prev);
        out.at2(i, emb.size(1) + 1) = static_cast<T>(next);
    }
    return out;
}

template <class T>
nn::EncoderG<T> encoder_from_checkpoint(const config::ExperimentConfig& cfg, const std::string& path) {
    nn::EncoderG<T> enc(cfg.model);
    const auto ck = checkpoint::load(path);
    std::vector<nn::ParamRef<T>> params;
    enc.collect("g", params);
    for (auto& p : params) {
        try {
            ck.fill(p.name, *p.value);
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " (checkpoint/model architecture mismatch for '" +
                        p.name + "', model expects " + p.value->shape_str() + ")");
        }
    }
    std::vector<nn::BufRef<T>> bufs;
    enc.collect_buffers("g", bufs);
    for (auto& b : bufs) ck.fill(b.name, *b.value);
    return enc;
}

template <class T>
void save_probe_checkpoint(const std::string& path, nn::EncoderG<T>& enc, nn::Linear<T>& head,
                           std::int64_t n_classes) {
    std::vector<checkpoint::NamedTensorRef<T>> refs;
    std::vector<nn::ParamRef<T>> params;
    enc.collect("g", params);
    head.collect("head", params);
    for (auto& p : params) refs.push_back({p.name, p.value});
    std::vector<nn::BufRef<T>> bufs;
    enc.collect_buffers("g", bufs);
    for (auto& b : bufs) refs.push_back({b.name, b.value});
    std::map<std::string, double> scalars;
    scalars["n_classes"] = static_cast<double>(n_classes);
    scalars["head_in_dim"] = static_cast<double>(head.in_dim);
    checkpoint::save(path, refs, scalars);
}

template <class T>
PretrainSummary pretrain_impl(const config::ExperimentConfig& cfg) {
    const LoadedData data = load_data(cfg);
    Rng init_rng = Rng::stream(cfg.seed, 0x5EED);
    const train::SubjectIndex subj(data.recs);
    train::SslModel<T> model(cfg.model, subj.size(), cfg.loss.tau_init, init_rng);

    train::PretrainCfg pc;
    pc.steps = cfg.train.steps;
    pc.batch_size = cfg.train.batch_size;
    pc.lr = cfg.train.lr;
    pc.weight_decay = cfg.train.weight_decay;
    pc.window = cfg.window.length;
    pc.mode_center = cfg.preprocess.mode_center;
    pc.seed = cfg.seed;

    fs::create_directories(cfg.out);
    std::ofstream metrics(fs::path(cfg.out) / "metrics.jsonl");
    require(metrics.good(), "runner: cannot write metrics.jsonl");
    auto sink = [&metrics](const train::StepMetrics& m) {
        json line = {{"step", m.step},           {"loss", m.loss},
                     {"loss_infonce", m.loss_infonce}, {"loss_rsub", m.loss_rsub},
                     {"loss_csub", m.loss_csub}, {"tau", m.tau},
                     {"queue_fill", m.queue_fill}, {"anchors_skipped", m.anchors_skipped}};
        metrics << line.dump() << "\n";
    };

    auto result = train::pretrain_ssl(model, data.recs, data.montage ? &*data.montage : nullptr,
                                      cfg.pipeline, cfg.loss, pc, sink);
    metrics.close();

    const std::string ckpt = (fs::path(cfg.out) / "checkpoint.bin").string();
    train::save_ssl_checkpoint(ckpt, model, result.steps_run, &result.opt_gf);
    write_run_manifest(cfg, "pretrain", data.hash, {"metrics.jsonl", "checkpoint.bin"});

    PretrainSummary s;
    s.first_loss = result.first_loss;
    s.last_loss = result.last_loss;
    s.checkpoint_path = ckpt;
    return s;
}

template <class T>
EvalSummary probe_impl(const config::ExperimentConfig& cfg, const std::string& checkpoint_path,
                       bool random_encoder) {
    const LoadedData data = load_data(cfg);
    nn::EncoderG<T> enc = [&] {
        if (random_encoder) {
            Rng rng = Rng::stream(cfg.seed, 0x4A4D);
            nn::EncoderG<T> e(cfg.model);
            e.init(rng);
            return e;
        }
        return encoder_from_checkpoint<T>(cfg, checkpoint_path);
    }();

    const EvalWindows ew = build_eval_windows(cfg, data.recs);
    std::vector<int> y_train, y_test;
    Tensor<T> x_train = probe_features(enc, data.recs, ew.train, cfg, y_train);
    Tensor<T> x_test = probe_features(enc, data.recs, ew.test, cfg, y_test);

    auto head = train::train_linear_head(x_train, y_train, ew.n_classes, cfg.probe.head);
    const auto pred = train::predict(head.linear, x_test);
    const auto cm = eval::confusion(y_test, pred, ew.n_classes);
    std::set<kernels::i64> excluded(cfg.eval.excluded_classes.begin(), cfg.eval.excluded_classes.end());
    const auto rep = eval::metrics_from_confusion(cm, excluded);

    EvalSummary summary;
    summary.overall_accuracy = rep.overall_accuracy;
    summary.balanced_accuracy = rep.balanced_accuracy;
    summary.n_train = static_cast<std::int64_t>(ew.train.size());
    summary.n_test = static_cast<std::int64_t>(ew.test.size());

    fs::create_directories(cfg.out);
    write_text(fs::path(cfg.out) / "report.json", report_to_json(rep, summary, cfg.eval.target).dump(2) + "\n");
    write_text(fs::path(cfg.out) / "confusion.csv", eval::confusion_to_csv(cm));
    save_probe_checkpoint((fs::path(cfg.out) / "checkpoint.bin").string(), enc, head.linear, ew.n_classes);
    write_run_manifest(cfg, "probe", data.hash, {"report.json", "confusion.csv", "checkpoint.bin"});
    return summary;
}

template <class T>
FinetuneSummary finetune_impl(const config::ExperimentConfig& cfg, const std::string& checkpoint_path) {
    const LoadedData data = load_data(cfg);
    nn::EncoderG<T> enc = encoder_from_checkpoint<T>(cfg, checkpoint_path);
    const EvalWindows ew = build_eval_windows(cfg, data.recs);
    require(!cfg.eval.rhythm_pool && !cfg.eval.rr_features,
            "runner: fine-tuning works on plain windows (no pooling or RR features)");

    std::vector<int> y_train, y_test;
    FinetuneSummary out;

    // pre-finetune: frozen-probe metrics from the same head initialization
    Tensor<T> x_train = probe_features(enc, data.recs, ew.train, cfg, y_train);
    Tensor<T> x_test = probe_features(enc, data.recs, ew.test, cfg, y_test);
    auto head = train::train_linear_head(x_train, y_train, ew.n_classes, cfg.probe.head);
    {
        const auto pred = train::predict(head.linear, x_test);
        const auto cm = eval::confusion(y_test, pred, ew.n_classes);
        std::set<kernels::i64> excluded(cfg.eval.excluded_classes.begin(),
                                        cfg.eval.excluded_classes.end());
        const auto rep = eval::metrics_from_confusion(cm, excluded);
        out.before.overall_accuracy = rep.overall_accuracy;
        out.before.balanced_accuracy = rep.balanced_accuracy;
        out.before.n_train = static_cast<std::int64_t>(ew.train.size());
        out.before.n_test = static_cast<std::int64_t>(ew.test.size());
        fs::create_directories(cfg.out);
        write_text(fs::path(cfg.out) / "report_prefinetune.json",
                   report_to_json(rep, out.before, cfg.eval.target).dump(2) + "\n");
    }

    train::FinetuneCfg fc;
    fc.lr = cfg.probe.finetune_lr;
    fc.batch_size = cfg.probe.finetune_batch;
    fc.epochs = cfg.probe.finetune_epochs;
    fc.mixup_alpha = cfg.probe.mixup_alpha;
    fc.mode_center = cfg.preprocess.mode_center;
    fc.seed = cfg.seed;
    train::finetune(enc, head.linear, data.recs, ew.train, cfg.window.length, ew.n_classes, fc,
                    cfg.probe.finetune_augment ? &cfg.pipeline : nullptr,
                    data.montage ? &*data.montage : nullptr);

    Tensor<T> x_test2 = probe_features(enc, data.recs, ew.test, cfg, y_test);
    const auto pred = train::predict(head.linear, x_test2);
    const auto cm = eval::confusion(y_test, pred, ew.n_classes);
    std::set<kernels::i64> excluded(cfg.eval.excluded_classes.begin(), cfg.eval.excluded_classes.end());
    const auto rep = eval::metrics_from_confusion(cm, excluded);
    out.after.overall_accuracy = rep.overall_accuracy;
    out.after.balanced_accuracy = rep.balanced_accuracy;
    out.after.n_train = static_cast<std::int64_t>(ew.train.size());
    out.after.n_test = static_cast<std::int64_t>(ew.test.size());

    write_text(fs::path(cfg.out) / "report.json", report_to_json(rep, out.after, cfg.eval.target).dump(2) + "\n");
    write_text(fs::path(cfg.out) / "confusion.csv", eval::confusion_to_csv(cm));
    save_probe_checkpoint((fs::path(cfg.out) / "checkpoint.bin").string(), enc, head.linear, ew.n_classes);
    write_run_manifest(cfg, "finetune", data.hash,
                       {"report_prefinetune.json", "report.json", "confusion.csv", "checkpoint.bin"});
    return out;
}

template <class T>
EvalSummary eval_impl(const config::ExperimentConfig& cfg, const std::string& checkpoint_path) {
    const LoadedData data = load_data(cfg);
    nn::EncoderG<T> enc = encoder_from_checkpoint<T>(cfg, checkpoint_path);
    const auto ck = checkpoint::load(checkpoint_path);
    require(ck.has("head.weight"), "runner: eval needs a checkpoint with a trained head (run probe "
                                   "or finetune first)");
    const auto n_classes = static_cast<std::int64_t>(ck.scalars.at("n_classes"));
    const auto head_in = static_cast<std::int64_t>(ck.scalars.at("head_in_dim"));
    nn::Linear<T> head(head_in, n_classes);
    ck.fill("head.weight", head.weight.value);
    ck.fill("head.bias", head.bias.value);

    config::ExperimentConfig ecfg = cfg;
    ecfg.eval.n_classes = n_classes;
    const EvalWindows ew = build_eval_windows(ecfg, data.recs);
    std::vector<int> y_test;
    Tensor<T> x_test = probe_features(enc, data.recs, ew.test, ecfg, y_test);
    require(x_test.size(1) == head_in, "runner: checkpoint head expects " + std::to_string(head_in) +
                                           " features, evaluation produced " +
                                           std::to_string(x_test.size(1)));

    const auto pred = train::predict(head, x_test);
    const auto cm = eval::confusion(y_test, pred, n_classes);
    std::set<kernels::i64> excluded(cfg.eval.excluded_classes.begin(), cfg.eval.excluded_classes.end());
    const auto rep = eval::metrics_from_confusion(cm, excluded);

    EvalSummary summary;
    summary.overall_accuracy = rep.overall_accuracy;
    summary.balanced_accuracy = rep.balanced_accuracy;
    summary.n_train = 0;
    summary.n_test = static_cast<std::int64_t>(ew.test.size());

    fs::create_directories(cfg.out);
    write_text(fs::path(cfg.out) / "report.json", report_to_json(rep, summary, cfg.eval.target).dump(2) + "\n");
    write_text(fs::path(cfg.out) / "confusion.csv", eval::confusion_to_csv(cm));
    write_run_manifest(cfg, "eval", data.hash, {"report.json", "confusion.csv"});
    return summary;
}

void preview_impl(const config::ExperimentConfig& cfg) {
    const LoadedData data = load_data(cfg);
    const auto& rec = data.recs.front();
    const auto W = cfg.window.length;

    // leave margin so temporal delay can re-crop
    std::int64_t margin = 0;
    for (const auto& s : cfg.pipeline.specs)
        if (s.kind == augment::Kind::temporal_delay) margin = std::max(margin, s.max_delay);
    require(rec.samples >= W + 2 * margin, "runner: first recording too short for preview window");
    const std::int64_t base = margin;
    const dataio::Segment seg = dataio::extract_window(rec, base, W);

    augment::SegmentSource src;
    src.recording = &rec;
    src.base_start = base;
    src.length = W;
    src.dataset = &data.recs;
    src.montage = data.montage ? &*data.montage : nullptr;
    src.fs = rec.sample_rate_hz;

    fs::create_directories(cfg.out);
    std::vector<std::string> outputs;
    for (std::size_t i = 0; i < cfg.pipeline.specs.size(); ++i) {
        augment::AugmentPipeline single;
        single.specs.push_back(cfg.pipeline.specs[i]);
        single.specs.back().probability = 1.0; // preview always fires
        Rng rng = Rng::stream(cfg.seed, 0xBEEF, static_cast<std::uint64_t>(i));
        const dataio::Segment aug = augment::apply_pipeline(seg, src, single, rng);

        std::ostringstream csv;
        csv << "t";
        for (std::int64_t c = 0; c < seg.channels; ++c) csv << ",in_ch" << c;
        for (std::int64_t c = 0; c < seg.channels; ++c) csv << ",out_ch" << c;
        csv << "\n";
        for (std::int64_t t = 0; t < W; ++t) {
            csv << t;
            for (std::int64_t c = 0; c < seg.channels; ++c) csv << "," << seg.at(c, t);
            for (std::int64_t c = 0; c < seg.channels; ++c) csv << "," << aug.at(c, t);
            csv << "\n";
        }
        const std::string name = "preview_" + std::to_string(i) + "_" +
                                 augment::kind_to_string(cfg.pipeline.specs[i].kind) + ".csv";
        write_text(fs::path(cfg.out) / name, csv.str());
        outputs.push_back(name);
    }
    write_run_manifest(cfg, "augment-preview", data.hash, outputs);
}

} // namespace

std::uint64_t run_gen_synthetic(const dataio::SyntheticCfg& scfg, const std::string& out_dir) {
    const auto recs = dataio::generate_synthetic(scfg);
    dataio::write_dataset(recs, out_dir);
    dataio::write_montage(dataio::grid_montage(scfg.channels), (fs::path(out_dir) / "montage.json").string());
    return dataio::dataset_hash(recs);
}

PretrainSummary run_pretrain(const config::ExperimentConfig& cfg) {
    return cfg.precision == Precision::f64 ? pretrain_impl<double>(cfg) : pretrain_impl<float>(cfg);
}

EvalSummary run_probe(const config::ExperimentConfig& cfg, const std::string& checkpoint_path,
                      bool random_encoder) {
    return cfg.precision == Precision::f64 ? probe_impl<double>(cfg, checkpoint_path, random_encoder)
                                           : probe_impl<float>(cfg, checkpoint_path, random_encoder);
}

FinetuneSummary run_finetune(const config::ExperimentConfig& cfg, const std::string& checkpoint_path) {
    return cfg.precision == Precision::f64 ? finetune_impl<double>(cfg, checkpoint_path)
                                           : finetune_impl<float>(cfg, checkpoint_path);
}

EvalSummary run_eval(const config::ExperimentConfig& cfg, const std::string& checkpoint_path) {
    return cfg.precision == Precision::f64 ? eval_impl<double>(cfg, checkpoint_path)
                                           : eval_impl<float>(cfg, checkpoint_path);
}

void run_augment_preview(const config::ExperimentConfig& cfg) {
    preview_impl(cfg);
}

} // namespace sacl::runner
