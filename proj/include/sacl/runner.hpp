#pragma once

#include <cstdint>
#include <string>

#include "sacl/config.hpp"
#include "sacl/dataio.hpp"

// Command implementations shared by the CLI and the acceptance suite.
// Each writes its outputs (run.json echo, metrics, checkpoints, reports)
// under cfg.out and returns the headline numbers.

namespace sacl::runner {

struct EvalSummary {
    double overall_accuracy = 0.0;
    double balanced_accuracy = 0.0;
    std::int64_t n_train = 0;
    std::int64_t n_test = 0;
};

std::uint64_t run_gen_synthetic(const dataio::SyntheticCfg& scfg, const std::string& out_dir);

struct PretrainSummary {
    double first_loss = 0.0;
    double last_loss = 0.0;
    std::string checkpoint_path;
};

PretrainSummary run_pretrain(const config::ExperimentConfig& cfg);

EvalSummary run_probe(const config::ExperimentConfig& cfg, const std::string& checkpoint_path,
                      bool random_encoder = false);

struct FinetuneSummary {
    EvalSummary before;
    EvalSummary after;
};

FinetuneSummary run_finetune(const config::ExperimentConfig& cfg, const std::string& checkpoint_path);

EvalSummary run_eval(const config::ExperimentConfig& cfg, const std::string& checkpoint_path);

void run_augment_preview(const config::ExperimentConfig& cfg);

} // namespace sacl::runner
