#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sacl/augment.hpp"
#include "sacl/contrast.hpp"
#include "sacl/dataio.hpp"
#include "sacl/nn.hpp"
#include "sacl/train.hpp"

// Experiment configuration: one JSON document describing dataset,
// preprocessing, augmentation, model, loss, training and evaluation.
// Parsing validates eagerly and reports the offending field path; the
// resolved (defaults filled) form is echoed into every run directory.

namespace sacl::config {

struct DatasetCfg {
    std::string manifest;                             // container on disk
    std::optional<dataio::SyntheticCfg> synthetic;    // or generated in-process
    std::string montage;                              // optional montage JSON
};

struct PreprocessCfg {
    bool rereference = false;
    bool zscore = true;
    bool mode_center = false;
};

struct WindowCfg {
    std::int64_t length = 320;
    double cue_offset_sec = 0.25;
    std::int64_t train_stride = 0; // 0 = non-overlapping
    std::int64_t test_stride = 0;
};

struct TrainSection {
    std::int64_t steps = 2000;
    std::int64_t batch_size = 64;
    double lr = 1e-4;
    double weight_decay = 0.0;
};

struct ProbeSection {
    train::HeadCfg head;
    double finetune_lr = 1e-5;
    std::int64_t finetune_epochs = 200;
    std::int64_t finetune_batch = 256;
    double mixup_alpha = 0.2;
    bool finetune_augment = false;
};

struct EvalSection {
    std::string target = "task";        // task | subject
    std::string label_source = "task";  // task | beat | rhythm
    std::string split = "intrasubject"; // intrasubject | intersubject
    std::vector<int> train_subjects;
    std::vector<int> test_subjects;
    double train_fraction = 0.75;
    std::vector<std::int64_t> excluded_classes;
    bool rhythm_pool = false;
    bool rr_features = false;
    std::int64_t n_classes = 0; // 0 = infer from labels
    std::string subject_protocol = "eeg"; // eeg | ecg
};

struct ExperimentConfig {
    std::uint64_t seed = 7;
    Precision precision = Precision::f32;
    std::string out = "run";
    DatasetCfg dataset;
    PreprocessCfg preprocess;
    WindowCfg window;
    augment::AugmentPipeline pipeline;
    bool pipeline_is_default = true;
    bool spatial_augments = false;
    nn::EncoderConfig model = nn::EncoderConfig::eeg();
    contrast::LossConfig loss;
    TrainSection train;
    ProbeSection probe;
    EvalSection eval;

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& doc);
    static ExperimentConfig from_file(const std::string& path);
};

} // namespace sacl::config
