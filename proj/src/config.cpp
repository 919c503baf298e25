#include "sacl/config.hpp"

#include <fstream>

using json = nlohmann::json;

namespace sacl::config {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error("config: " + field + " " + why);
}

template <class T>
T get_or(const json& j, const std::string& field, const std::string& path, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const std::exception&) {
        bad(path + field, "has the wrong type");
    }
}

augment::AugmentSpec parse_spec(const json& j, const std::string& path) {
    augment::AugmentSpec s;
    if (!j.contains("kind")) bad(path + ".kind", "is required");
    s.kind = augment::kind_from_string(j.at("kind").get<std::string>());
    s.probability = get_or(j, "probability", path + ".", 1.0);
    if (s.probability < 0.0 || s.probability > 1.0) bad(path + ".probability", "must lie in [0,1]");
    s.cutout_len = get_or<std::int64_t>(j, "cutout_len", path + ".", s.cutout_len);
    if (j.contains("fill")) s.fill = augment::fill_from_string(j.at("fill").get<std::string>());
    s.max_delay = get_or<std::int64_t>(j, "max_delay", path + ".", s.max_delay);
    s.noise_scale = get_or(j, "noise_scale", path + ".", s.noise_scale);
    s.bandstop_width_hz = get_or(j, "bandstop_width_hz", path + ".", s.bandstop_width_hz);
    s.mix_scale = get_or(j, "mix_scale", path + ".", s.mix_scale);
    s.rotation_deg = get_or(j, "rotation_deg", path + ".", s.rotation_deg);
    s.shift_mag = get_or(j, "shift_mag", path + ".", s.shift_mag);
    s.dropout_p = get_or(j, "dropout_p", path + ".", s.dropout_p);
    s.cutout_radius = get_or(j, "cutout_radius", path + ".", s.cutout_radius);
    try {
        s.validate();
    } catch (const Error& e) {
        bad(path, std::string("invalid: ") + e.what());
    }
    return s;
}

json spec_to_json(const augment::AugmentSpec& s) {
    json j;
    j["kind"] = augment::kind_to_string(s.kind);
    j["probability"] = s.probability;
    switch (s.kind) {
        case augment::Kind::temporal_cutout:
            j["cutout_len"] = s.cutout_len;
            j["fill"] = s.fill == augment::FillMode::zeros ? "zeros"
                        : s.fill == augment::FillMode::noise ? "noise"
                                                             : "mix";
            break;
        case augment::Kind::temporal_delay: j["max_delay"] = s.max_delay; break;
        case augment::Kind::gaussian_noise: j["noise_scale"] = s.noise_scale; break;
        case augment::Kind::bandstop: j["bandstop_width_hz"] = s.bandstop_width_hz; break;
        case augment::Kind::signal_mix: j["mix_scale"] = s.mix_scale; break;
        case augment::Kind::spatial_rotation: j["rotation_deg"] = s.rotation_deg; break;
        case augment::Kind::spatial_shift: j["shift_mag"] = s.shift_mag; break;
        case augment::Kind::sensor_dropout: j["dropout_p"] = s.dropout_p; break;
        case augment::Kind::sensor_cutout: j["cutout_radius"] = s.cutout_radius; break;
        default: break;
    }
    return j;
}

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "config: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw Error(std::string("config: JSON parse error in ") + path + ": " + e.what());
    }
    // a run manifest echoes the resolved config under "config"
    if (doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
    return from_json(doc);
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    ExperimentConfig c;
    c.seed = get_or<std::uint64_t>(doc, "seed", "", 7);
    const std::string prec = get_or<std::string>(doc, "precision", "", "f32");
    if (prec == "f32") c.precision = Precision::f32;
    else if (prec == "f64") c.precision = Precision::f64;
    else bad("precision", "must be 'f32' or 'f64'");
    c.out = get_or<std::string>(doc, "out", "", "run");

    if (doc.contains("dataset")) {
        const json& d = doc.at("dataset");
        c.dataset.manifest = get_or<std::string>(d, "manifest", "dataset.", "");
        c.dataset.montage = get_or<std::string>(d, "montage", "dataset.", "");
        if (d.contains("synthetic")) {
            const json& s = d.at("synthetic");
            dataio::SyntheticCfg sc;
            sc.n_subjects = get_or(s, "subjects", "dataset.synthetic.", sc.n_subjects);
            sc.n_classes = get_or(s, "classes", "dataset.synthetic.", sc.n_classes);
            sc.recs_per_subject = get_or(s, "recs_per_subject", "dataset.synthetic.", sc.recs_per_subject);
            sc.rec_len = get_or(s, "rec_len", "dataset.synthetic.", sc.rec_len);
            sc.channels = get_or(s, "channels", "dataset.synthetic.", sc.channels);
            sc.fs = get_or(s, "fs", "dataset.synthetic.", sc.fs);
            sc.seed = get_or<std::uint64_t>(s, "seed", "dataset.synthetic.", c.seed);
            sc.class_amp = get_or(s, "class_amp", "dataset.synthetic.", sc.class_amp);
            sc.subject_amp = get_or(s, "subject_amp", "dataset.synthetic.", sc.subject_amp);
            sc.noise_std = get_or(s, "noise_std", "dataset.synthetic.", sc.noise_std);
            sc.trial_len = get_or(s, "trial_len", "dataset.synthetic.", sc.trial_len);
            if (sc.n_subjects < 1) bad("dataset.synthetic.subjects", "must be >= 1");
            if (sc.n_classes < 1) bad("dataset.synthetic.classes", "must be >= 1");
            if (sc.recs_per_subject < 1) bad("dataset.synthetic.recs_per_subject", "must be >= 1");
            if (sc.rec_len < 1) bad("dataset.synthetic.rec_len", "must be >= 1");
            if (sc.channels < 1) bad("dataset.synthetic.channels", "must be >= 1");
            if (sc.fs <= 0) bad("dataset.synthetic.fs", "must be > 0");
            c.dataset.synthetic = sc;
        }
        if (c.dataset.manifest.empty() && !c.dataset.synthetic)
            bad("dataset", "needs either 'manifest' or 'synthetic'");
    } else {
        bad("dataset", "section is required");
    }

    if (doc.contains("preprocess")) {
        const json& p = doc.at("preprocess");
        c.preprocess.rereference = get_or(p, "rereference", "preprocess.", false);
        c.preprocess.zscore = get_or(p, "zscore", "preprocess.", true);
        c.preprocess.mode_center = get_or(p, "mode_center", "preprocess.", false);
    }

    if (doc.contains("window")) {
        const json& w = doc.at("window");
        c.window.length = get_or<std::int64_t>(w, "length", "window.", 320);
        c.window.cue_offset_sec = get_or(w, "cue_offset_sec", "window.", 0.25);
        c.window.train_stride = get_or<std::int64_t>(w, "train_stride", "window.", 0);
        c.window.test_stride = get_or<std::int64_t>(w, "test_stride", "window.", 0);
        if (c.window.length < 1) bad("window.length", "must be >= 1");
        if (c.window.train_stride < 0) bad("window.train_stride", "must be >= 0");
        if (c.window.test_stride < 0) bad("window.test_stride", "must be >= 0");
    }

    if (doc.contains("augment")) {
        const json& a = doc.at("augment");
        c.spatial_augments = get_or(a, "spatial", "augment.", false);
        if (a.contains("pipeline")) {
            if (!a.at("pipeline").is_array()) bad("augment.pipeline", "must be an array");
            c.pipeline.specs.clear();
            c.pipeline_is_default = false;
            int i = 0;
            for (const auto& e : a.at("pipeline")) {
                c.pipeline.specs.push_back(parse_spec(e, "augment.pipeline[" + std::to_string(i) + "]"));
                ++i;
            }
        } else {
            c.pipeline = augment::default_ssl_pipeline(c.spatial_augments);
        }
    } else {
        c.pipeline = augment::default_ssl_pipeline(false);
    }

    if (doc.contains("model")) {
        const json& m = doc.at("model");
        const std::string variant = get_or<std::string>(m, "variant", "model.", "eeg");
        const auto in_ch = get_or<std::int64_t>(m, "input_channels", "model.", variant == "ecg" ? 2 : 64);
        const auto window = get_or<std::int64_t>(m, "window", "model.", variant == "ecg" ? 704 : 320);
        if (variant == "eeg") c.model = nn::EncoderConfig::eeg(in_ch, window);
        else if (variant == "ecg") c.model = nn::EncoderConfig::ecg(in_ch, window);
        else if (variant == "custom") {
            c.model = nn::EncoderConfig{};
            c.model.variant = "custom";
            c.model.in_channels = in_ch;
            c.model.window = window;
        } else {
            bad("model.variant", "must be 'eeg', 'ecg' or 'custom'");
        }
        c.model.embed_dim = get_or<std::int64_t>(m, "embed_dim", "model.", 256);
        if (m.contains("stem")) {
            c.model.stem_out = get_or<std::int64_t>(m.at("stem"), "out", "model.stem.", c.model.stem_out);
            c.model.stem_kernel =
                get_or<std::int64_t>(m.at("stem"), "kernel", "model.stem.", c.model.stem_kernel);
        }
        if (m.contains("blocks")) {
            if (!m.at("blocks").is_array()) bad("model.blocks", "must be an array");
            c.model.blocks.clear();
            int i = 0;
            for (const auto& b : m.at("blocks")) {
                nn::BlockCfg bc;
                bc.in_ch = get_or<std::int64_t>(b, "in", "model.blocks[" + std::to_string(i) + "].", 0);
                bc.out_ch = get_or<std::int64_t>(b, "out", "model.blocks[" + std::to_string(i) + "].", 0);
                bc.kernel = get_or<std::int64_t>(b, "kernel", "model.blocks[" + std::to_string(i) + "].", 3);
                bc.pool = get_or<std::int64_t>(b, "pool", "model.blocks[" + std::to_string(i) + "].", 1);
                c.model.blocks.push_back(bc);
                ++i;
            }
        } else if (variant == "custom") {
            bad("model.blocks", "is required for variant 'custom'");
        }
        try {
            c.model.validate();
        } catch (const Error& e) {
            bad("model", std::string("invalid: ") + e.what());
        }
    }

    if (doc.contains("loss")) {
        const json& l = doc.at("loss");
        c.loss.variant = contrast::variant_from_string(get_or<std::string>(l, "variant", "loss.", "base"));
        c.loss.lambda = get_or(l, "lambda", "loss.", 1.0);
        if (c.loss.lambda < 0.0) bad("loss.lambda", "must be >= 0");
        c.loss.key_momentum = get_or(l, "momentum", "loss.", 0.999);
        if (c.loss.key_momentum <= 0.0 || c.loss.key_momentum >= 1.0)
            bad("loss.momentum", "must lie in (0,1)");
        c.loss.queue_capacity = get_or<std::int64_t>(l, "queue_capacity", "loss.", 24000);
        if (c.loss.queue_capacity < 1) bad("loss.queue_capacity", "must be >= 1");
        c.loss.tau_init = get_or(l, "tau_init", "loss.", 0.07);
        if (c.loss.tau_init < c.loss.tau_min || c.loss.tau_init > c.loss.tau_max)
            bad("loss.tau_init", "must lie in [0.01, 1.0]");
        c.loss.min_negatives = get_or<std::int64_t>(l, "min_negatives", "loss.", 16);
        if (c.loss.min_negatives < 1) bad("loss.min_negatives", "must be >= 1");
    }

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        c.train.steps = get_or<std::int64_t>(t, "steps", "train.", 2000);
        c.train.batch_size = get_or<std::int64_t>(t, "batch_size", "train.", 64);
        c.train.lr = get_or(t, "lr", "train.", 1e-4);
        c.train.weight_decay = get_or(t, "weight_decay", "train.", 0.0);
        if (c.train.steps < 1) bad("train.steps", "must be >= 1");
        if (c.train.batch_size < 1) bad("train.batch_size", "must be >= 1");
        if (c.train.lr <= 0) bad("train.lr", "must be > 0");
        if (c.train.weight_decay < 0) bad("train.weight_decay", "must be >= 0");
    }

    if (doc.contains("probe")) {
        const json& p = doc.at("probe");
        c.probe.head.lr = get_or(p, "lr", "probe.", 1e-3);
        c.probe.head.weight_decay = get_or(p, "weight_decay", "probe.", 0.01);
        c.probe.head.batch_size = get_or<std::int64_t>(p, "batch_size", "probe.", 256);
        c.probe.head.epochs = get_or<std::int64_t>(p, "epochs", "probe.", 200);
        const std::string sampling = get_or<std::string>(p, "sampling", "probe.", "shuffle");
        if (sampling == "shuffle") c.probe.head.sampling = train::SamplingMode::shuffle;
        else if (sampling == "balanced_resample")
            c.probe.head.sampling = train::SamplingMode::balanced_resample;
        else if (sampling == "weighted_ce") c.probe.head.sampling = train::SamplingMode::weighted_ce;
        else bad("probe.sampling", "must be shuffle | balanced_resample | weighted_ce");
        c.probe.head.class_weight_beta = get_or(p, "class_weight_beta", "probe.", 0.999);
        c.probe.head.verbatim_class_weights = get_or(p, "verbatim_class_weights", "probe.", false);
        c.probe.head.unknown_class = get_or(p, "unknown_class", "probe.", -1);
        c.probe.finetune_lr = get_or(p, "finetune_lr", "probe.", 1e-5);
        c.probe.finetune_epochs = get_or<std::int64_t>(p, "finetune_epochs", "probe.", 200);
        c.probe.finetune_batch = get_or<std::int64_t>(p, "finetune_batch", "probe.", 256);
        c.probe.mixup_alpha = get_or(p, "mixup_alpha", "probe.", 0.2);
        c.probe.finetune_augment = get_or(p, "finetune_augment", "probe.", false);
        if (c.probe.head.lr <= 0) bad("probe.lr", "must be > 0");
        if (c.probe.head.epochs < 1) bad("probe.epochs", "must be >= 1");
    }
    c.probe.head.seed = c.seed;

    if (doc.contains("eval")) {
        const json& e = doc.at("eval");
        c.eval.target = get_or<std::string>(e, "target", "eval.", "task");
        if (c.eval.target != "task" && c.eval.target != "subject")
            bad("eval.target", "must be 'task' or 'subject'");
        c.eval.label_source = get_or<std::string>(e, "label_source", "eval.", "task");
        if (c.eval.label_source != "task" && c.eval.label_source != "beat" &&
            c.eval.label_source != "rhythm")
            bad("eval.label_source", "must be task | beat | rhythm");
        c.eval.split = get_or<std::string>(e, "split", "eval.", "intrasubject");
        if (c.eval.split != "intrasubject" && c.eval.split != "intersubject")
            bad("eval.split", "must be 'intrasubject' or 'intersubject'");
        c.eval.train_subjects = get_or<std::vector<int>>(e, "train_subjects", "eval.", {});
        c.eval.test_subjects = get_or<std::vector<int>>(e, "test_subjects", "eval.", {});
        c.eval.train_fraction = get_or(e, "train_fraction", "eval.", 0.75);
        if (c.eval.train_fraction <= 0 || c.eval.train_fraction >= 1)
            bad("eval.train_fraction", "must lie in (0,1)");
        c.eval.excluded_classes = get_or<std::vector<std::int64_t>>(e, "excluded_classes", "eval.", {});
        c.eval.rhythm_pool = get_or(e, "rhythm_pool", "eval.", false);
        c.eval.rr_features = get_or(e, "rr_features", "eval.", false);
        c.eval.n_classes = get_or<std::int64_t>(e, "n_classes", "eval.", 0);
        c.eval.subject_protocol = get_or<std::string>(e, "subject_protocol", "eval.", "eeg");
        if (c.eval.subject_protocol != "eeg" && c.eval.subject_protocol != "ecg")
            bad("eval.subject_protocol", "must be 'eeg' or 'ecg'");
    }

    return c;
}

json ExperimentConfig::to_json() const {
    json doc;
    doc["seed"] = seed;
    doc["precision"] = precision == Precision::f32 ? "f32" : "f64";
    doc["out"] = out;

    json ds;
    if (!dataset.manifest.empty()) ds["manifest"] = dataset.manifest;
    if (!dataset.montage.empty()) ds["montage"] = dataset.montage;
    if (dataset.synthetic) {
        const auto& s = *dataset.synthetic;
        ds["synthetic"] = {{"subjects", s.n_subjects},
                           {"classes", s.n_classes},
                           {"recs_per_subject", s.recs_per_subject},
                           {"rec_len", s.rec_len},
                           {"channels", s.channels},
                           {"fs", s.fs},
                           {"seed", s.seed},
                           {"class_amp", s.class_amp},
                           {"subject_amp", s.subject_amp},
                           {"noise_std", s.noise_std},
                           {"trial_len", s.trial_len}};
    }
    doc["dataset"] = ds;
    doc["preprocess"] = {{"rereference", preprocess.rereference},
                         {"zscore", preprocess.zscore},
                         {"mode_center", preprocess.mode_center}};
    doc["window"] = {{"length", window.length},
                     {"cue_offset_sec", window.cue_offset_sec},
                     {"train_stride", window.train_stride},
                     {"test_stride", window.test_stride}};
    json pipe = json::array();
    for (const auto& s : pipeline.specs) pipe.push_back(spec_to_json(s));
    doc["augment"] = {{"spatial", spatial_augments}, {"pipeline", pipe}};
    json blocks = json::array();
    for (const auto& b : model.blocks)
        blocks.push_back({{"in", b.in_ch}, {"out", b.out_ch}, {"kernel", b.kernel}, {"pool", b.pool}});
    doc["model"] = {{"variant", model.variant},
                    {"input_channels", model.in_channels},
                    {"window", model.window},
                    {"embed_dim", model.embed_dim},
                    {"stem", {{"out", model.stem_out}, {"kernel", model.stem_kernel}}},
                    {"blocks", blocks}};
    const char* var = loss.variant == contrast::LossVariant::base ? "base"
                      : loss.variant == contrast::LossVariant::subject_specific ? "subject_specific"
                                                                                : "subject_invariant";
    doc["loss"] = {{"variant", var},
                   {"lambda", loss.lambda},
                   {"momentum", loss.key_momentum},
                   {"queue_capacity", loss.queue_capacity},
                   {"tau_init", loss.tau_init},
                   {"min_negatives", loss.min_negatives}};
    doc["train"] = {{"steps", train.steps},
                    {"batch_size", train.batch_size},
                    {"lr", train.lr},
                    {"weight_decay", train.weight_decay}};
    const char* sampling = probe.head.sampling == train::SamplingMode::shuffle ? "shuffle"
                           : probe.head.sampling == train::SamplingMode::balanced_resample
                               ? "balanced_resample"
                               : "weighted_ce";
    doc["probe"] = {{"lr", probe.head.lr},
                    {"weight_decay", probe.head.weight_decay},
                    {"batch_size", probe.head.batch_size},
                    {"epochs", probe.head.epochs},
                    {"sampling", sampling},
                    {"class_weight_beta", probe.head.class_weight_beta},
                    {"verbatim_class_weights", probe.head.verbatim_class_weights},
                    {"unknown_class", probe.head.unknown_class},
                    {"finetune_lr", probe.finetune_lr},
                    {"finetune_epochs", probe.finetune_epochs},
                    {"finetune_batch", probe.finetune_batch},
                    {"mixup_alpha", probe.mixup_alpha},
                    {"finetune_augment", probe.finetune_augment}};
    doc["eval"] = {{"target", eval.target},
                   {"label_source", eval.label_source},
                   {"split", eval.split},
                   {"train_subjects", eval.train_subjects},
                   {"test_subjects", eval.test_subjects},
                   {"train_fraction", eval.train_fraction},
                   {"excluded_classes", eval.excluded_classes},
                   {"rhythm_pool", eval.rhythm_pool},
                   {"rr_features", eval.rr_features},
                   {"n_classes", eval.n_classes},
                   {"subject_protocol", eval.subject_protocol}};
    return doc;
}

} // namespace sacl::config
