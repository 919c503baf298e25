#include "sacl/augment.hpp"

#include <algorithm>
#include <cmath>

namespace sacl::augment {

namespace {
constexpr int kTaps = 31;
constexpr int kHalf = (kTaps - 1) / 2;
} // namespace

Kind kind_from_string(const std::string& s) {
    if (s == "identity") return Kind::identity;
    if (s == "temporal_cutout") return Kind::temporal_cutout;
    if (s == "temporal_delay") return Kind::temporal_delay;
    if (s == "gaussian_noise") return Kind::gaussian_noise;
    if (s == "bandstop") return Kind::bandstop;
    if (s == "signal_mix") return Kind::signal_mix;
    if (s == "spatial_rotation") return Kind::spatial_rotation;
    if (s == "spatial_shift") return Kind::spatial_shift;
    if (s == "sensor_dropout") return Kind::sensor_dropout;
    if (s == "sensor_cutout") return Kind::sensor_cutout;
    throw Error("augment: unknown transform kind '" + s + "'");
}

std::string kind_to_string(Kind k) {
    switch (k) {
        case Kind::identity: return "identity";
        case Kind::temporal_cutout: return "temporal_cutout";
        case Kind::temporal_delay: return "temporal_delay";
        case Kind::gaussian_noise: return "gaussian_noise";
        case Kind::bandstop: return "bandstop";
        case Kind::signal_mix: return "signal_mix";
        case Kind::spatial_rotation: return "spatial_rotation";
        case Kind::spatial_shift: return "spatial_shift";
        case Kind::sensor_dropout: return "sensor_dropout";
        case Kind::sensor_cutout: return "sensor_cutout";
    }
    return "?";
}

FillMode fill_from_string(const std::string& s) {
    if (s == "zeros") return FillMode::zeros;
    if (s == "noise") return FillMode::noise;
    if (s == "mix") return FillMode::mix;
    throw Error("augment: unknown cutout fill mode '" + s + "'");
}

void AugmentSpec::validate() const {
    require(probability >= 0.0 && probability <= 1.0, "augment: probability outside [0,1]");
    switch (kind) {
        case Kind::temporal_cutout:
            require(cutout_len >= 0, "augment: cutout length must be >= 0");
            break;
        case Kind::temporal_delay:
            require(max_delay >= 0, "augment: max delay must be >= 0");
            break;
        case Kind::gaussian_noise:
            require(noise_scale >= 0.0, "augment: noise scale must be >= 0");
            break;
        case Kind::bandstop:
            require(bandstop_width_hz >= 0.0, "augment: bandstop width must be >= 0");
            break;
        case Kind::sensor_dropout:
            require(dropout_p >= 0.0 && dropout_p <= 1.0, "augment: dropout p outside [0,1]");
            break;
        case Kind::sensor_cutout:
            require(cutout_radius >= 0.0, "augment: sensor cutout radius must be >= 0");
            break;
        case Kind::spatial_rotation:
            require(rotation_deg >= 0.0, "augment: rotation magnitude must be >= 0");
            break;
        case Kind::spatial_shift:
            require(shift_mag >= 0.0, "augment: shift magnitude must be >= 0");
            break;
        default:
            break;
    }
}

Segment temporal_cutout(const Segment& s, std::int64_t window_len, FillMode fill, Rng& rng,
                        const Segment* mix_source) {
    require(window_len >= 0 && window_len <= s.samples,
            "augment: cutout window " + std::to_string(window_len) + " exceeds segment length " +
                std::to_string(s.samples));
    Segment out = s;
    if (window_len == 0) return out;
    const std::int64_t start = rng.uniform_int(0, s.samples - window_len);
    if (fill == FillMode::mix) {
        require(mix_source && mix_source->channels == s.channels && mix_source->samples >= window_len,
                "augment: cutout mix source missing or too short");
    }
    for (std::int64_t c = 0; c < s.channels; ++c)
        for (std::int64_t t = start; t < start + window_len; ++t) {
            switch (fill) {
                case FillMode::zeros: out.at(c, t) = 0.0; break;
                case FillMode::noise: out.at(c, t) = rng.normal(); break;
                case FillMode::mix: out.at(c, t) = mix_source->at(c, t - start); break;
            }
        }
    return out;
}

Segment temporal_delay(const Recording& r, std::int64_t base_start, std::int64_t length,
                       std::int64_t max_delay, Rng& rng) {
    require(base_start - max_delay >= 0 && base_start + length + max_delay <= r.samples,
            "augment: delay margin of " + std::to_string(max_delay) + " samples does not fit around [" +
                std::to_string(base_start) + "," + std::to_string(base_start + length) + ")");
    const std::int64_t d = max_delay == 0 ? 0 : rng.uniform_int(-max_delay, max_delay);
    return dataio::extract_window(r, base_start + d, length);
}

Segment temporal_delay_circular(const Segment& s, std::int64_t max_delay, Rng& rng) {
    Segment out = s;
    const std::int64_t d = max_delay == 0 ? 0 : rng.uniform_int(-max_delay, max_delay);
    if (d == 0) return out;
    const std::int64_t W = s.samples;
    for (std::int64_t c = 0; c < s.channels; ++c)
        for (std::int64_t t = 0; t < W; ++t) out.at(c, t) = s.at(c, ((t + d) % W + W) % W);
    return out;
}

Segment gaussian_noise(const Segment& s, double scale, Rng& rng, const std::vector<double>* std_ref) {
    require(scale >= 0.0, "augment: noise scale must be >= 0");
    if (std_ref)
        require(static_cast<std::int64_t>(std_ref->size()) == s.channels,
                "augment: noise std_ref channel mismatch");
    Segment out = s;
    for (std::int64_t c = 0; c < s.channels; ++c) {
        const double sd = scale * (std_ref ? (*std_ref)[static_cast<std::size_t>(c)] : 1.0);
        for (std::int64_t t = 0; t < s.samples; ++t) out.at(c, t) += sd * rng.normal();
    }
    return out;
}

std::vector<double> design_lowpass_proto(double width_hz, double fs) {
    require(fs > 0, "augment: fs must be > 0");
    require(width_hz >= 0 && width_hz <= fs, "augment: bandstop width outside [0, fs]");
    const double fc = width_hz / 2.0;
    std::vector<double> h(kTaps);
    for (int n = 0; n < kTaps; ++n) {
        const double m = n - kHalf;
        const double x = 2.0 * fc * m / fs;
        const double sinc = x == 0.0 ? 1.0 : std::sin(M_PI * x) / (M_PI * x);
        const double ham = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (kTaps - 1));
        h[static_cast<std::size_t>(n)] = (2.0 * fc / fs) * sinc * ham;
    }
    return h;
}

std::vector<double> design_bandstop(double center_hz, double width_hz, double fs, double phi) {
    require(center_hz >= width_hz / 2.0 && center_hz <= fs / 2.0 - width_hz / 2.0,
            "augment: band [" + std::to_string(center_hz - width_hz / 2) + "," +
                std::to_string(center_hz + width_hz / 2) + "] outside (0, fs/2)");
    std::vector<double> h = design_lowpass_proto(width_hz, fs);
    for (int n = 0; n < kTaps; ++n)
        h[static_cast<std::size_t>(n)] *= 2.0 * std::cos(2.0 * M_PI * center_hz * (n - kHalf) / fs + phi);
    return h;
}

std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& h) {
    const auto L = static_cast<std::int64_t>(x.size());
    const auto K = static_cast<std::int64_t>(h.size());
    const std::int64_t half = (K - 1) / 2;
    std::vector<double> y(x.size(), 0.0);
    for (std::int64_t t = 0; t < L; ++t) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < K; ++k) {
            const std::int64_t src = t - (k - half);
            if (src >= 0 && src < L) acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(src)];
        }
        y[static_cast<std::size_t>(t)] = acc;
    }
    return y;
}

// Bandpass via modulate -> lowpass -> demodulate with the drawn phase. The
// phase enters both mixers and cancels in the output, so the subtracted
// signal keeps a zero-phase notch at the center frequency for every draw
// (tap-domain modulation alone shifts the passband phase by phi and can
// even amplify the center instead of removing it).
Segment bandstop_at(const Segment& s, double center_hz, double width_hz, double fs, double phi) {
    require(fs > 0, "augment: fs must be > 0 for bandstop");
    require(center_hz >= width_hz / 2.0 && center_hz <= fs / 2.0 - width_hz / 2.0,
            "augment: bandstop band outside (0, fs/2)");
    const std::vector<double> lp = design_lowpass_proto(width_hz, fs);
    const double w = 2.0 * M_PI * center_hz / fs;
    Segment out = s;
    const auto W = s.samples;
    std::vector<double> re(static_cast<std::size_t>(W)), im(static_cast<std::size_t>(W));
    for (std::int64_t c = 0; c < s.channels; ++c) {
        for (std::int64_t t = 0; t < W; ++t) {
            const double ph = w * static_cast<double>(t) + phi;
            re[static_cast<std::size_t>(t)] = s.at(c, t) * std::cos(ph);
            im[static_cast<std::size_t>(t)] = -s.at(c, t) * std::sin(ph);
        }
        const std::vector<double> fre = convolve_same(re, lp);
        const std::vector<double> fim = convolve_same(im, lp);
        for (std::int64_t t = 0; t < W; ++t) {
            const double ph = w * static_cast<double>(t) + phi;
            const double bp = 2.0 * (fre[static_cast<std::size_t>(t)] * std::cos(ph) -
                                     fim[static_cast<std::size_t>(t)] * std::sin(ph));
            out.at(c, t) = s.at(c, t) - bp;
        }
    }
    return out;
}

Segment bandstop(const Segment& s, double width_hz, double fs, Rng& rng) {
    require(width_hz < fs / 2.0, "augment: bandstop width must be below fs/2");
    const double lo = width_hz / 2.0, hi = fs / 2.0 - width_hz / 2.0;
    const double center = rng.uniform(lo, hi);
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    return bandstop_at(s, center, width_hz, fs, phi);
}

Segment signal_mix(const Segment& s, const Segment& other, double scale) {
    require(s.channels == other.channels && s.samples == other.samples,
            "augment: mix shape mismatch " + std::to_string(s.channels) + "x" + std::to_string(s.samples) +
                " vs " + std::to_string(other.channels) + "x" + std::to_string(other.samples));
    Segment out = s;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += scale * other.data[i];
    return out;
}

namespace {

// Gaussian RBF with a constant polynomial term; shape parameter is the
// median pairwise sensor distance. Solves the (C+1)x(C+1) saddle system
// once per call with partial-pivot LU, then backsolves per time sample.
struct RbfInterpolator {
    std::int64_t n = 0;
    double sigma2 = 1.0;
    std::vector<double> lu;
    std::vector<int> piv;
    const Montage* montage = nullptr;

    static double dist2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
        const double dx = a[0] - b[0], dy = a[1] - b[1];
        return dx * dx + dy * dy;
    }

    explicit RbfInterpolator(const Montage& m) : n(static_cast<std::int64_t>(m.size())), montage(&m) {
        std::vector<double> dists;
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = i + 1; j < n; ++j)
                dists.push_back(std::sqrt(dist2(m.coords[static_cast<std::size_t>(i)],
                                                m.coords[static_cast<std::size_t>(j)])));
        double sigma = 1.0;
        if (!dists.empty()) {
            std::sort(dists.begin(), dists.end());
            sigma = dists[dists.size() / 2];
        }
        require(sigma > 0.0, "augment: montage has duplicate sensor coordinates");
        sigma2 = sigma * sigma;

        const std::int64_t m1 = n + 1;
        lu.assign(static_cast<std::size_t>(m1 * m1), 0.0);
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t j = 0; j < n; ++j) {
                const double k = std::exp(-dist2(montage->coords[static_cast<std::size_t>(i)],
                                                 montage->coords[static_cast<std::size_t>(j)]) /
                                          sigma2);
                lu[static_cast<std::size_t>(i * m1 + j)] = k + (i == j ? 1e-8 : 0.0);
            }
            lu[static_cast<std::size_t>(i * m1 + n)] = 1.0;
            lu[static_cast<std::size_t>(n * m1 + i)] = 1.0;
        }
        factorize();
    }

    void factorize() {
        const std::int64_t m1 = n + 1;
        piv.resize(static_cast<std::size_t>(m1));
        for (std::int64_t col = 0; col < m1; ++col) {
            std::int64_t p = col;
            double best = std::abs(lu[static_cast<std::size_t>(col * m1 + col)]);
            for (std::int64_t r = col + 1; r < m1; ++r) {
                const double v = std::abs(lu[static_cast<std::size_t>(r * m1 + col)]);
                if (v > best) {
                    best = v;
                    p = r;
                }
            }
            require(best > 1e-14, "augment: singular RBF system (duplicate sensor coordinates?)");
            piv[static_cast<std::size_t>(col)] = static_cast<int>(p);
            if (p != col)
                for (std::int64_t j = 0; j < m1; ++j)
                    std::swap(lu[static_cast<std::size_t>(col * m1 + j)], lu[static_cast<std::size_t>(p * m1 + j)]);
            const double d = lu[static_cast<std::size_t>(col * m1 + col)];
            for (std::int64_t r = col + 1; r < m1; ++r) {
                const double f = lu[static_cast<std::size_t>(r * m1 + col)] / d;
                lu[static_cast<std::size_t>(r * m1 + col)] = f;
                for (std::int64_t j = col + 1; j < m1; ++j)
                    lu[static_cast<std::size_t>(r * m1 + j)] -= f * lu[static_cast<std::size_t>(col * m1 + j)];
            }
        }
    }

    void solve(std::vector<double>& rhs) const {
        const std::int64_t m1 = n + 1;
        for (std::int64_t col = 0; col < m1; ++col) {
            const int p = piv[static_cast<std::size_t>(col)];
            if (p != col) std::swap(rhs[static_cast<std::size_t>(col)], rhs[static_cast<std::size_t>(p)]);
            for (std::int64_t r = col + 1; r < m1; ++r)
                rhs[static_cast<std::size_t>(r)] -= lu[static_cast<std::size_t>(r * m1 + col)] * rhs[static_cast<std::size_t>(col)];
        }
        for (std::int64_t r = m1 - 1; r >= 0; --r) {
            double acc = rhs[static_cast<std::size_t>(r)];
            for (std::int64_t j = r + 1; j < m1; ++j)
                acc -= lu[static_cast<std::size_t>(r * m1 + j)] * rhs[static_cast<std::size_t>(j)];
            rhs[static_cast<std::size_t>(r)] = acc / lu[static_cast<std::size_t>(r * m1 + r)];
        }
    }

    double eval(const std::array<double, 2>& q, const std::vector<double>& coef) const {
        double acc = coef[static_cast<std::size_t>(n)];
        for (std::int64_t j = 0; j < n; ++j)
            acc += coef[static_cast<std::size_t>(j)] *
                   std::exp(-dist2(q, montage->coords[static_cast<std::size_t>(j)]) / sigma2);
        return acc;
    }
};

} // namespace

Segment spatial_warp(const Segment& s, const Montage& m, WarpKind kind, double magnitude, Rng& rng) {
    require(static_cast<std::int64_t>(m.size()) == s.channels,
            "augment: montage size " + std::to_string(m.size()) + " does not match channels " +
                std::to_string(s.channels));

    // draw the transform, then build inverse-mapped evaluation coordinates
    double cu = 0.0, cv = 0.0;
    for (const auto& c : m.coords) {
        cu += c[0];
        cv += c[1];
    }
    cu /= static_cast<double>(m.size());
    cv /= static_cast<double>(m.size());

    std::vector<std::array<double, 2>> q(m.size());
    if (kind == WarpKind::rotation) {
        const double theta = rng.uniform(-magnitude, magnitude) * M_PI / 180.0;
        const double c = std::cos(-theta), sn = std::sin(-theta); // inverse rotation
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double du = m.coords[i][0] - cu, dv = m.coords[i][1] - cv;
            q[i][0] = cu + c * du - sn * dv;
            q[i][1] = cv + sn * du + c * dv;
        }
    } else {
        const double r = magnitude * std::sqrt(rng.uniform());
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        const double dx = r * std::cos(a), dy = r * std::sin(a);
        for (std::size_t i = 0; i < m.size(); ++i) {
            q[i][0] = m.coords[i][0] - dx;
            q[i][1] = m.coords[i][1] - dy;
        }
    }
    for (auto& p : q) {
        p[0] = std::clamp(p[0], 0.0, 1.0);
        p[1] = std::clamp(p[1], 0.0, 1.0);
    }

    const RbfInterpolator rbf(m);
    Segment out = s;
    const std::int64_t C = s.channels, W = s.samples;
    std::vector<double> rhs(static_cast<std::size_t>(C + 1));
    std::vector<double> eval_mat(static_cast<std::size_t>(C * (C + 1)));
    for (std::int64_t i = 0; i < C; ++i) {
        for (std::int64_t j = 0; j < C; ++j)
            eval_mat[static_cast<std::size_t>(i * (C + 1) + j)] =
                std::exp(-RbfInterpolator::dist2(q[static_cast<std::size_t>(i)],
                                                 m.coords[static_cast<std::size_t>(j)]) /
                         rbf.sigma2);
        eval_mat[static_cast<std::size_t>(i * (C + 1) + C)] = 1.0;
    }
    for (std::int64_t t = 0; t < W; ++t) {
        for (std::int64_t c = 0; c < C; ++c) rhs[static_cast<std::size_t>(c)] = s.at(c, t);
        rhs[static_cast<std::size_t>(C)] = 0.0;
        rbf.solve(rhs);
        for (std::int64_t c = 0; c < C; ++c) {
            double acc = 0.0;
            for (std::int64_t j = 0; j <= C; ++j)
                acc += eval_mat[static_cast<std::size_t>(c * (C + 1) + j)] * rhs[static_cast<std::size_t>(j)];
            out.at(c, t) = acc;
        }
    }
    return out;
}

Segment sensor_dropout(const Segment& s, double p, Rng& rng) {
    require(p >= 0.0 && p <= 1.0, "augment: dropout p outside [0,1]");
    Segment out = s;
    for (std::int64_t c = 0; c < s.channels; ++c) {
        if (rng.uniform() < p)
            for (std::int64_t t = 0; t < s.samples; ++t) out.at(c, t) = 0.0;
    }
    return out;
}

Segment sensor_cutout(const Segment& s, const Montage& m, double radius, Rng& rng) {
    require(radius >= 0.0, "augment: sensor cutout radius must be >= 0");
    require(static_cast<std::int64_t>(m.size()) == s.channels,
            "augment: montage size does not match channels");
    const double u = rng.uniform(), v = rng.uniform();
    Segment out = s;
    for (std::int64_t c = 0; c < s.channels; ++c) {
        const double du = m.coords[static_cast<std::size_t>(c)][0] - u;
        const double dv = m.coords[static_cast<std::size_t>(c)][1] - v;
        if (std::sqrt(du * du + dv * dv) <= radius)
            for (std::int64_t t = 0; t < s.samples; ++t) out.at(c, t) = 0.0;
    }
    return out;
}

Segment apply_pipeline(const Segment& seg, const SegmentSource& src, const AugmentPipeline& p, Rng& rng) {
    p.validate();
    Segment out = seg;
    bool pristine = true; // true until a transform touches the values
    for (const auto& spec : p.specs) {
        if (spec.probability < 1.0) {
            if (rng.uniform() >= spec.probability) continue;
        }
        switch (spec.kind) {
            case Kind::identity:
                break;
            case Kind::temporal_cutout: {
                const Segment* mix_src = nullptr;
                Segment partner;
                if (spec.fill == FillMode::mix) {
                    require(src.dataset && !src.dataset->empty(), "augment: cutout mix needs a dataset");
                    const auto ri = static_cast<std::size_t>(
                        rng.uniform_int(0, static_cast<std::int64_t>(src.dataset->size()) - 1));
                    const Recording& r = (*src.dataset)[ri];
                    require(r.samples >= out.samples, "augment: mix partner recording too short");
                    const std::int64_t st = rng.uniform_int(0, r.samples - out.samples);
                    partner = dataio::extract_window(r, st, out.samples);
                    mix_src = &partner;
                }
                out = temporal_cutout(out, spec.cutout_len, spec.fill, rng, mix_src);
                pristine = false;
                break;
            }
            case Kind::temporal_delay: {
                if (pristine && src.recording) {
                    out = temporal_delay(*src.recording, src.base_start, src.length, spec.max_delay, rng);
                } else {
                    out = temporal_delay_circular(out, spec.max_delay, rng);
                }
                pristine = false;
                break;
            }
            case Kind::gaussian_noise:
                out = gaussian_noise(out, spec.noise_scale, rng, src.noise_std_ref);
                pristine = false;
                break;
            case Kind::bandstop:
                require(src.fs > 0, "augment: bandstop needs sampling rate in the segment source");
                out = bandstop(out, spec.bandstop_width_hz, src.fs, rng);
                pristine = false;
                break;
            case Kind::signal_mix: {
                require(src.dataset && !src.dataset->empty(), "augment: signal_mix needs a dataset");
                const auto ri = static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(src.dataset->size()) - 1));
                const Recording& r = (*src.dataset)[ri];
                require(r.samples >= out.samples, "augment: mix partner recording too short");
                const std::int64_t st = rng.uniform_int(0, r.samples - out.samples);
                out = signal_mix(out, dataio::extract_window(r, st, out.samples), spec.mix_scale);
                pristine = false;
                break;
            }
            case Kind::spatial_rotation:
                require(src.montage, "augment: spatial rotation needs a montage");
                out = spatial_warp(out, *src.montage, WarpKind::rotation, spec.rotation_deg, rng);
                pristine = false;
                break;
            case Kind::spatial_shift:
                require(src.montage, "augment: spatial shift needs a montage");
                out = spatial_warp(out, *src.montage, WarpKind::shift, spec.shift_mag, rng);
                pristine = false;
                break;
            case Kind::sensor_dropout:
                out = sensor_dropout(out, spec.dropout_p, rng);
                pristine = false;
                break;
            case Kind::sensor_cutout:
                require(src.montage, "augment: sensor cutout needs a montage");
                out = sensor_cutout(out, *src.montage, spec.cutout_radius, rng);
                pristine = false;
                break;
        }
    }
    return out;
}

AugmentPipeline default_ssl_pipeline(bool spatial_enabled) {
    AugmentPipeline p;
    auto add = [&p](Kind k) {
        AugmentSpec s;
        s.kind = k;
        s.probability = 0.5;
        p.specs.push_back(s);
    };
    add(Kind::temporal_cutout);
    add(Kind::temporal_delay);
    add(Kind::gaussian_noise);
    add(Kind::bandstop);
    add(Kind::signal_mix);
    add(Kind::sensor_dropout);
    if (spatial_enabled) add(Kind::sensor_cutout);
    return p;
}

} // namespace sacl::augment
