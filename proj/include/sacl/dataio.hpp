#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sacl/common.hpp"
#include "sacl/rng.hpp"

namespace sacl::dataio {

struct Annotation {
    std::int64_t sample_index = 0;
    std::string kind; // beat | rhythm | task
    std::int64_t value = 0;
};

// One subject's continuous multichannel signal, channel-major storage.
struct Recording {
    std::string id;
    int subject_id = 0;
    double sample_rate_hz = 0.0;
    std::int64_t channels = 0;
    std::int64_t samples = 0;
    std::vector<std::string> channel_names;
    std::vector<double> data; // [channels][samples]
    std::vector<Annotation> annotations;

    double& at(std::int64_t c, std::int64_t t) { return data[static_cast<std::size_t>(c * samples + t)]; }
    double at(std::int64_t c, std::int64_t t) const { return data[static_cast<std::size_t>(c * samples + t)]; }
};

// Fixed-length window (channels x samples) cut from a recording.
struct Segment {
    std::int64_t channels = 0;
    std::int64_t samples = 0;
    std::vector<double> data; // [channels][samples]
    int subject_id = 0;
    std::optional<int> label;
    std::string source_id;
    std::int64_t source_start = 0;

    double& at(std::int64_t c, std::int64_t t) { return data[static_cast<std::size_t>(c * samples + t)]; }
    double at(std::int64_t c, std::int64_t t) const { return data[static_cast<std::size_t>(c * samples + t)]; }
};

// Per-channel normalized 2-D sensor coordinates in [0,1]^2.
struct Montage {
    std::vector<std::string> names;
    std::vector<std::array<double, 2>> coords;

    std::size_t size() const { return coords.size(); }
};

struct DatasetStats {
    std::vector<double> mean;
    std::vector<double> stdev;
};

enum class SplitMode { intersubject, intrasubject };

struct SplitSpec {
    SplitMode mode = SplitMode::intersubject;
    std::vector<int> train_subjects;
    std::vector<int> test_subjects;
    double train_fraction = 0.75; // intrasubject temporal split
};

// Lightweight handle to a window of a recording; label < 0 means unlabeled.
struct WindowRef {
    int recording = 0;
    std::int64_t start = 0;
    int subject_id = 0;
    int label = -1;
};

struct SplitResult {
    std::vector<WindowRef> train;
    std::vector<WindowRef> test;
};

struct SyntheticCfg {
    int n_subjects = 8;
    int n_classes = 2;
    int recs_per_subject = 2;
    std::int64_t rec_len = 16000;
    std::int64_t channels = 8;
    double fs = 160.0;
    std::uint64_t seed = 7;
    double class_amp = 1.0;     // a
    double subject_amp = 1.0;   // b
    double noise_std = 0.5;     // sigma
    std::int64_t trial_len = 0; // 0 = 4 * fs
};

// ---- container IO ----

std::vector<Recording> load_dataset(const std::string& manifest_path, std::int64_t min_samples = 0);
void write_dataset(const std::vector<Recording>& recs, const std::string& out_dir);
Montage load_montage(const std::string& path, const std::vector<std::string>& channel_names);
void write_montage(const Montage& m, const std::string& path);
std::uint64_t dataset_hash(const std::vector<Recording>& recs);

// ---- preprocessing ----

Recording rereference_channel_average(const Recording& r);
DatasetStats compute_stats(const std::vector<Recording>& recs);
Recording zscore_normalize(const Recording& r, const DatasetStats& stats);
Segment mode_center_normalize(const Segment& s);
double histogram_mode(const std::vector<double>& values, int bins = 101);

// ---- windowing & splits ----

Segment extract_window(const Recording& r, std::int64_t start, std::int64_t length);
Segment materialize(const std::vector<Recording>& recs, const WindowRef& w, std::int64_t length);

std::vector<WindowRef> enumerate_task_windows(const std::vector<Recording>& recs,
                                              std::int64_t window, double cue_offset_sec);
std::vector<WindowRef> enumerate_tiled_windows(const std::vector<Recording>& recs,
                                               std::int64_t window, std::int64_t stride);
std::vector<WindowRef> enumerate_beat_windows(const std::vector<Recording>& recs, std::int64_t window);
std::vector<WindowRef> enumerate_rhythm_windows(const std::vector<Recording>& recs,
                                                std::int64_t window, std::int64_t stride);

SplitResult make_splits(const std::vector<Recording>& recs, const std::vector<WindowRef>& windows,
                        std::int64_t window_len, const SplitSpec& spec);

// ---- synthetic oracle dataset ----

std::vector<Recording> generate_synthetic(const SyntheticCfg& cfg);
Montage grid_montage(std::int64_t channels);

} // namespace sacl::dataio
