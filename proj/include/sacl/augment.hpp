#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sacl/dataio.hpp"
#include "sacl/rng.hpp"

namespace sacl::augment {

using dataio::Montage;
using dataio::Recording;
using dataio::Segment;

enum class Kind {
    identity,
    temporal_cutout,
    temporal_delay,
    gaussian_noise,
    bandstop,
    signal_mix,
    spatial_rotation,
    spatial_shift,
    sensor_dropout,
    sensor_cutout,
};

enum class FillMode { zeros, noise, mix };

Kind kind_from_string(const std::string& s);
std::string kind_to_string(Kind k);
FillMode fill_from_string(const std::string& s);

struct AugmentSpec {
    Kind kind = Kind::identity;
    double probability = 1.0;

    std::int64_t cutout_len = 200;       // temporal_cutout
    FillMode fill = FillMode::noise;     // temporal_cutout
    std::int64_t max_delay = 40;         // temporal_delay
    double noise_scale = 6.0;            // gaussian_noise
    double bandstop_width_hz = 64.0;     // bandstop
    double mix_scale = 0.9;              // signal_mix
    double rotation_deg = 30.0;          // spatial_rotation
    double shift_mag = 0.1;              // spatial_shift
    double dropout_p = 0.2;              // sensor_dropout
    double cutout_radius = 0.25;         // sensor_cutout

    void validate() const;
};

struct AugmentPipeline {
    std::vector<AugmentSpec> specs;

    void validate() const {
        for (const auto& s : specs) s.validate();
    }
};

// Context a pipeline may need: parent recording for true temporal delay,
// dataset for mix partners, montage for spatial transforms, sampling rate,
// and per-channel reference std for the noise transform.
struct SegmentSource {
    const Recording* recording = nullptr; // enables re-crop delay
    std::int64_t base_start = 0;
    std::int64_t length = 0;
    const std::vector<Recording>* dataset = nullptr; // mix partner pool
    const Montage* montage = nullptr;
    double fs = 0.0;
    const std::vector<double>* noise_std_ref = nullptr; // default all-ones
};

// ---- individual transforms ----

Segment temporal_cutout(const Segment& s, std::int64_t window_len, FillMode fill, Rng& rng,
                        const Segment* mix_source = nullptr);
Segment temporal_delay(const Recording& r, std::int64_t base_start, std::int64_t length,
                       std::int64_t max_delay, Rng& rng);
// standalone fallback when no parent recording is available: circular shift
Segment temporal_delay_circular(const Segment& s, std::int64_t max_delay, Rng& rng);
Segment gaussian_noise(const Segment& s, double scale, Rng& rng,
                       const std::vector<double>* std_ref = nullptr);

// 31-tap Hamming-windowed sinc lowpass prototype, cutoff width/2
std::vector<double> design_lowpass_proto(double width_hz, double fs);
// prototype modulated to center_hz: lp[n] * 2 * cos(2*pi*center*(n-15)/fs + phi)
std::vector<double> design_bandstop(double center_hz, double width_hz, double fs, double phi = 0.0);
// zero-padded same-length convolution, filter center aligned to t
std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& h);

Segment bandstop(const Segment& s, double width_hz, double fs, Rng& rng);
Segment bandstop_at(const Segment& s, double center_hz, double width_hz, double fs, double phi);

Segment signal_mix(const Segment& s, const Segment& other, double scale);

enum class WarpKind { rotation, shift };
Segment spatial_warp(const Segment& s, const Montage& m, WarpKind kind, double magnitude, Rng& rng);

Segment sensor_dropout(const Segment& s, double p, Rng& rng);
Segment sensor_cutout(const Segment& s, const Montage& m, double radius, Rng& rng);

// ---- pipeline ----

Segment apply_pipeline(const Segment& seg, const SegmentSource& src, const AugmentPipeline& p, Rng& rng);

// paper-tuned per-transform parameters, each applied with probability 0.5
AugmentPipeline default_ssl_pipeline(bool spatial_enabled);

} // namespace sacl::augment
