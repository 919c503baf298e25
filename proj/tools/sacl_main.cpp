// Command-line front end: gen-synthetic, pretrain, probe, finetune, eval,
// augment-preview. Errors are reported as a JSON object on stderr with a
// nonzero exit code.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "sacl/runner.hpp"

using sacl::config::ExperimentConfig;

namespace {

struct GlobalOverrides {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string precision;
};

ExperimentConfig load_config(const std::string& path, const GlobalOverrides& g) {
    ExperimentConfig cfg = ExperimentConfig::from_file(path);
    if (g.seed) {
        cfg.seed = *g.seed;
        cfg.probe.head.seed = *g.seed;
        if (cfg.dataset.synthetic && cfg.dataset.manifest.empty()) cfg.dataset.synthetic->seed = *g.seed;
    }
    if (!g.out.empty()) cfg.out = g.out;
    if (!g.precision.empty()) {
        if (g.precision == "f32") cfg.precision = sacl::Precision::f32;
        else if (g.precision == "f64") cfg.precision = sacl::Precision::f64;
        else throw sacl::Error("config: precision must be 'f32' or 'f64'");
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subject-aware contrastive learning for biosignals"};
    app.require_subcommand(1);

    GlobalOverrides g;
    std::string config_path, checkpoint_path;

    // gen-synthetic
    sacl::dataio::SyntheticCfg scfg;
    std::string gen_out = "data";
    auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic dataset container");
    gen->add_option("--subjects", scfg.n_subjects, "number of subjects");
    gen->add_option("--classes", scfg.n_classes, "number of task classes");
    gen->add_option("--recs-per-subject", scfg.recs_per_subject, "recordings per subject");
    gen->add_option("--rec-len", scfg.rec_len, "samples per recording");
    gen->add_option("--channels", scfg.channels, "channel count");
    gen->add_option("--fs", scfg.fs, "sampling rate in Hz");
    gen->add_option("--seed", scfg.seed, "generator seed");
    gen->add_option("--class-amp", scfg.class_amp, "class oscillation amplitude");
    gen->add_option("--subject-amp", scfg.subject_amp, "subject fingerprint amplitude");
    gen->add_option("--noise-std", scfg.noise_std, "white noise standard deviation");
    gen->add_option("--trial-len", scfg.trial_len, "trial length in samples (0 = 4*fs)");
    gen->add_option("--out", gen_out, "output directory");

    auto add_common = [&](CLI::App* cmd, bool needs_ckpt) {
        cmd->add_option("--config", config_path, "experiment config JSON")->required();
        if (needs_ckpt)
            cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
        cmd->add_option("--seed", g.seed, "override config seed");
        cmd->add_option("--out", g.out, "override output directory");
        cmd->add_option("--precision", g.precision, "f32 or f64");
    };

    auto* pretrain = app.add_subcommand("pretrain", "self-supervised pretraining");
    add_common(pretrain, false);
    auto* probe = app.add_subcommand("probe", "linear probe on a frozen encoder");
    add_common(probe, true);
    bool random_encoder = false;
    probe->add_flag("--random-encoder", random_encoder,
                    "ignore the checkpoint weights and probe a randomly initialized encoder");
    auto* finetune = app.add_subcommand("finetune", "fine-tune encoder plus head");
    add_common(finetune, true);
    auto* evalc = app.add_subcommand("eval", "evaluate a probe/finetune checkpoint");
    add_common(evalc, true);
    auto* preview = app.add_subcommand("augment-preview", "emit before/after CSVs per transform");
    add_common(preview, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const auto hash = sacl::runner::run_gen_synthetic(scfg, gen_out);
            std::cout << "dataset_hash " << sacl::hex64(hash) << "\n";
        } else if (pretrain->parsed()) {
            const auto s = sacl::runner::run_pretrain(load_config(config_path, g));
            std::cout << "pretrain done: loss " << s.first_loss << " -> " << s.last_loss << ", checkpoint "
                      << s.checkpoint_path << "\n";
        } else if (probe->parsed()) {
            const auto s = sacl::runner::run_probe(load_config(config_path, g), checkpoint_path,
                                                   random_encoder);
            std::cout << "probe accuracy " << s.overall_accuracy << " (balanced " << s.balanced_accuracy
                      << ") on " << s.n_test << " windows\n";
        } else if (finetune->parsed()) {
            const auto s = sacl::runner::run_finetune(load_config(config_path, g), checkpoint_path);
            std::cout << "finetune accuracy " << s.before.overall_accuracy << " -> "
                      << s.after.overall_accuracy << " on " << s.after.n_test << " windows\n";
        } else if (evalc->parsed()) {
            const auto s = sacl::runner::run_eval(load_config(config_path, g), checkpoint_path);
            std::cout << "eval accuracy " << s.overall_accuracy << " (balanced " << s.balanced_accuracy
                      << ") on " << s.n_test << " windows\n";
        } else if (preview->parsed()) {
            sacl::runner::run_augment_preview(load_config(config_path, g));
            std::cout << "previews written\n";
        }
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
