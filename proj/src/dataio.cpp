#include "sacl/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace sacl::dataio {

namespace {

std::vector<Annotation> read_annotations_csv(const std::string& path, std::int64_t samples,
                                             const std::string& entry) {
    std::ifstream in(path);
    require(in.good(), "dataio: entry '" + entry + "': cannot open annotations file " + path);
    std::vector<Annotation> out;
    std::string line;
    std::getline(in, line);
    require(line.rfind("sample_index,kind,value", 0) == 0,
            "dataio: entry '" + entry + "': annotations header must be 'sample_index,kind,value'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        Annotation an;
        an.sample_index = std::stoll(a);
        an.kind = b;
        an.value = std::stoll(c);
        require(an.kind == "beat" || an.kind == "rhythm" || an.kind == "task",
                "dataio: entry '" + entry + "': unknown annotation kind '" + an.kind + "'");
        require(an.sample_index >= 0 && an.sample_index < samples,
                "dataio: entry '" + entry + "': annotation sample " + std::to_string(an.sample_index) +
                    " outside [0," + std::to_string(samples) + ")");
        out.push_back(an);
    }
    return out;
}

void write_annotations_csv(const std::vector<Annotation>& anns, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "dataio: cannot write " + path);
    out << "sample_index,kind,value\n";
    for (const auto& a : anns) out << a.sample_index << "," << a.kind << "," << a.value << "\n";
}

std::vector<float> payload_f32(const Recording& r) {
    std::vector<float> buf(r.data.size());
    for (std::size_t i = 0; i < r.data.size(); ++i) buf[i] = static_cast<float>(r.data[i]);
    return buf;
}

} // namespace

std::vector<Recording> load_dataset(const std::string& manifest_path, std::int64_t min_samples) {
    std::ifstream mf(manifest_path);
    require(mf.good(), "dataio: cannot open manifest " + manifest_path);
    json doc;
    try {
        mf >> doc;
    } catch (const std::exception& e) {
        throw Error(std::string("dataio: manifest parse error: ") + e.what());
    }
    require(doc.is_array(), "dataio: manifest must be a JSON array");

    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<Recording> recs;
    for (const auto& e : doc) {
        Recording r;
        r.id = e.value("data_file", std::string("?"));
        try {
            r.subject_id = e.at("subject_id").get<int>();
            r.sample_rate_hz = e.at("sample_rate_hz").get<double>();
            r.channel_names = e.at("channels").get<std::vector<std::string>>();
            r.samples = e.at("samples").get<std::int64_t>();
        } catch (const std::exception& ex) {
            throw Error("dataio: entry '" + r.id + "': bad manifest fields: " + ex.what());
        }
        r.channels = static_cast<std::int64_t>(r.channel_names.size());
        require(r.channels >= 1 && r.samples >= 1, "dataio: entry '" + r.id + "': empty shape");
        require(r.sample_rate_hz > 0, "dataio: entry '" + r.id + "': sample_rate_hz must be > 0");
        require(r.samples >= min_samples,
                "dataio: entry '" + r.id + "': recording of " + std::to_string(r.samples) +
                    " samples is shorter than the configured window (" + std::to_string(min_samples) + ")");

        const fs::path data_path = base / e.at("data_file").get<std::string>();
        std::ifstream df(data_path, std::ios::binary);
        require(df.good(), "dataio: entry '" + r.id + "': missing data file " + data_path.string());
        df.seekg(0, std::ios::end);
        const std::int64_t bytes = static_cast<std::int64_t>(df.tellg());
        const std::int64_t expect = r.channels * r.samples * 4;
        require(bytes == expect, "dataio: entry '" + r.id + "': payload length mismatch (expected " +
                                     std::to_string(expect) + " bytes, got " + std::to_string(bytes) + ")");
        df.seekg(0);
        std::vector<float> buf(static_cast<std::size_t>(r.channels * r.samples));
        df.read(reinterpret_cast<char*>(buf.data()), expect);
        require(df.good(), "dataio: entry '" + r.id + "': short read");
        r.data.resize(buf.size());
        for (std::size_t i = 0; i < buf.size(); ++i) {
            require(std::isfinite(buf[i]), "dataio: entry '" + r.id + "': NaN/Inf in payload at index " +
                                               std::to_string(i));
            r.data[i] = static_cast<double>(buf[i]);
        }

        if (e.contains("annotations_file") && !e.at("annotations_file").is_null()) {
            const fs::path ap = base / e.at("annotations_file").get<std::string>();
            r.annotations = read_annotations_csv(ap.string(), r.samples, r.id);
        }
        recs.push_back(std::move(r));
    }
    return recs;
}

void write_dataset(const std::vector<Recording>& recs, const std::string& out_dir) {
    fs::create_directories(out_dir);
    json manifest = json::array();
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const Recording& r = recs[i];
        const std::string stem = "rec" + std::to_string(i);
        const std::string data_file = stem + ".f32";
        const auto buf = payload_f32(r);
        std::ofstream df(fs::path(out_dir) / data_file, std::ios::binary);
        require(df.good(), "dataio: cannot write " + data_file);
        df.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * sizeof(float)));

        json e;
        e["subject_id"] = r.subject_id;
        e["sample_rate_hz"] = r.sample_rate_hz;
        e["channels"] = r.channel_names;
        e["samples"] = r.samples;
        e["data_file"] = data_file;
        if (!r.annotations.empty()) {
            const std::string af = stem + ".csv";
            write_annotations_csv(r.annotations, (fs::path(out_dir) / af).string());
            e["annotations_file"] = af;
        }
        manifest.push_back(e);
    }
    std::ofstream mf(fs::path(out_dir) / "manifest.json");
    require(mf.good(), "dataio: cannot write manifest.json");
    mf << manifest.dump(2) << "\n";
}

Montage load_montage(const std::string& path, const std::vector<std::string>& channel_names) {
    std::ifstream in(path);
    require(in.good(), "dataio: cannot open montage " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw Error(std::string("dataio: montage parse error: ") + e.what());
    }
    require(doc.is_object(), "dataio: montage must be a JSON object of channel -> [u, v]");
    Montage m;
    for (const auto& name : channel_names) {
        require(doc.contains(name), "dataio: montage missing channel '" + name + "'");
        const auto& uv = doc.at(name);
        require(uv.is_array() && uv.size() == 2, "dataio: montage entry '" + name + "' must be [u, v]");
        const double u = uv[0].get<double>(), v = uv[1].get<double>();
        require(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0,
                "dataio: montage coordinate for '" + name + "' outside [0,1]^2");
        m.names.push_back(name);
        m.coords.push_back({u, v});
    }
    return m;
}

void write_montage(const Montage& m, const std::string& path) {
    json doc = json::object();
    for (std::size_t i = 0; i < m.size(); ++i) doc[m.names[i]] = {m.coords[i][0], m.coords[i][1]};
    std::ofstream out(path);
    require(out.good(), "dataio: cannot write montage " + path);
    out << doc.dump(2) << "\n";
}

std::uint64_t dataset_hash(const std::vector<Recording>& recs) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& r : recs) {
        h = fnv1a64(&r.subject_id, sizeof(r.subject_id), h);
        h = fnv1a64(&r.sample_rate_hz, sizeof(r.sample_rate_hz), h);
        const auto buf = payload_f32(r);
        h = fnv1a64(buf.data(), buf.size() * sizeof(float), h);
        for (const auto& a : r.annotations) {
            h = fnv1a64(&a.sample_index, sizeof(a.sample_index), h);
            h = fnv1a64(a.kind.data(), a.kind.size(), h);
            h = fnv1a64(&a.value, sizeof(a.value), h);
        }
    }
    return h;
}

Recording rereference_channel_average(const Recording& r) {
    require(r.channels >= 2, "dataio: channel-average re-reference needs >= 2 channels");
    Recording out = r;
    for (std::int64_t t = 0; t < r.samples; ++t) {
        double mean = 0.0;
        for (std::int64_t c = 0; c < r.channels; ++c) mean += r.at(c, t);
        mean /= static_cast<double>(r.channels);
        for (std::int64_t c = 0; c < r.channels; ++c) out.at(c, t) = r.at(c, t) - mean;
    }
    return out;
}

DatasetStats compute_stats(const std::vector<Recording>& recs) {
    require(!recs.empty(), "dataio: compute_stats on empty dataset");
    const std::int64_t C = recs.front().channels;
    for (const auto& r : recs)
        require(r.channels == C, "dataio: compute_stats channel count mismatch");
    DatasetStats st;
    st.mean.assign(static_cast<std::size_t>(C), 0.0);
    st.stdev.assign(static_cast<std::size_t>(C), 0.0);
    std::int64_t n = 0;
    for (const auto& r : recs) n += r.samples;
    for (std::int64_t c = 0; c < C; ++c) {
        double mean = 0.0;
        for (const auto& r : recs)
            for (std::int64_t t = 0; t < r.samples; ++t) mean += r.at(c, t);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& r : recs)
            for (std::int64_t t = 0; t < r.samples; ++t) {
                const double d = r.at(c, t) - mean;
                var += d * d;
            }
        var /= static_cast<double>(n);
        st.mean[static_cast<std::size_t>(c)] = mean;
        st.stdev[static_cast<std::size_t>(c)] = std::sqrt(var);
        require(st.stdev[static_cast<std::size_t>(c)] > 0.0,
                "dataio: zero standard deviation on channel " + std::to_string(c));
    }
    return st;
}

Recording zscore_normalize(const Recording& r, const DatasetStats& stats) {
    require(static_cast<std::int64_t>(stats.mean.size()) == r.channels,
            "dataio: stats channel count mismatch");
    Recording out = r;
    for (std::int64_t c = 0; c < r.channels; ++c) {
        const double m = stats.mean[static_cast<std::size_t>(c)];
        const double s = stats.stdev[static_cast<std::size_t>(c)];
        require(s != 0.0, "dataio: zero std on channel " + std::to_string(c));
        for (std::int64_t t = 0; t < r.samples; ++t) out.at(c, t) = (r.at(c, t) - m) / s;
    }
    return out;
}

double histogram_mode(const std::vector<double>& values, int bins) {
    require(!values.empty(), "dataio: histogram_mode on empty data");
    const auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    const double mn = *mn_it, mx = *mx_it;
    require(mx > mn, "dataio: degenerate segment (constant signal)");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    const double w = (mx - mn) / bins;
    for (double v : values) {
        int b = static_cast<int>((v - mn) / w);
        if (b >= bins) b = bins - 1;
        counts[static_cast<std::size_t>(b)]++;
    }
    int best = 0;
    for (int b = 1; b < bins; ++b)
        if (counts[static_cast<std::size_t>(b)] > counts[static_cast<std::size_t>(best)]) best = b;
    return mn + (best + 0.5) * w;
}

Segment mode_center_normalize(const Segment& s) {
    const double m = histogram_mode(s.data); // throws on constant segment
    double ss = 0.0;
    for (double v : s.data) {
        const double d = v - m;
        ss += d * d;
    }
    const double rms = std::sqrt(ss / static_cast<double>(s.data.size()));
    require(rms > 0.0, "dataio: degenerate segment (zero spread about mode)");
    Segment out = s;
    for (auto& v : out.data) v = (v - m) / rms;
    return out;
}

Segment extract_window(const Recording& r, std::int64_t start, std::int64_t length) {
    require(start >= 0 && length >= 1 && start + length <= r.samples,
            "dataio: window [" + std::to_string(start) + "," + std::to_string(start + length) +
                ") out of range for recording of " + std::to_string(r.samples) + " samples");
    Segment s;
    s.channels = r.channels;
    s.samples = length;
    s.subject_id = r.subject_id;
    s.source_id = r.id;
    s.source_start = start;
    s.data.resize(static_cast<std::size_t>(r.channels * length));
    for (std::int64_t c = 0; c < r.channels; ++c)
        std::memcpy(s.data.data() + c * length, r.data.data() + c * r.samples + start,
                    static_cast<std::size_t>(length) * sizeof(double));
    return s;
}

Segment materialize(const std::vector<Recording>& recs, const WindowRef& w, std::int64_t length) {
    Segment s = extract_window(recs.at(static_cast<std::size_t>(w.recording)), w.start, length);
    if (w.label >= 0) s.label = w.label;
    return s;
}

std::vector<WindowRef> enumerate_task_windows(const std::vector<Recording>& recs,
                                              std::int64_t window, double cue_offset_sec) {
    std::vector<WindowRef> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const Recording& r = recs[i];
        const std::int64_t offset = std::llround(cue_offset_sec * r.sample_rate_hz);
        for (const auto& a : r.annotations) {
            if (a.kind != "task") continue;
            const std::int64_t start = a.sample_index + offset;
            if (start < 0 || start + window > r.samples) continue;
            out.push_back({static_cast<int>(i), start, r.subject_id, static_cast<int>(a.value)});
        }
    }
    return out;
}

std::vector<WindowRef> enumerate_tiled_windows(const std::vector<Recording>& recs,
                                               std::int64_t window, std::int64_t stride) {
    require(stride >= 1, "dataio: stride must be >= 1");
    std::vector<WindowRef> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const Recording& r = recs[i];
        for (std::int64_t start = 0; start + window <= r.samples; start += stride)
            out.push_back({static_cast<int>(i), start, r.subject_id, -1});
    }
    return out;
}

std::vector<WindowRef> enumerate_beat_windows(const std::vector<Recording>& recs, std::int64_t window) {
    std::vector<WindowRef> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const Recording& r = recs[i];
        for (const auto& a : r.annotations) {
            if (a.kind != "beat") continue;
            const std::int64_t start = a.sample_index - window / 2;
            if (start < 0 || start + window > r.samples) continue;
            out.push_back({static_cast<int>(i), start, r.subject_id, static_cast<int>(a.value)});
        }
    }
    return out;
}

std::vector<WindowRef> enumerate_rhythm_windows(const std::vector<Recording>& recs,
                                                std::int64_t window, std::int64_t stride) {
    require(stride >= 1, "dataio: stride must be >= 1");
    std::vector<WindowRef> out;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const Recording& r = recs[i];
        // rhythm annotation at s applies from s until the next rhythm mark
        std::vector<Annotation> marks;
        for (const auto& a : r.annotations)
            if (a.kind == "rhythm") marks.push_back(a);
        std::sort(marks.begin(), marks.end(),
                  [](const Annotation& a, const Annotation& b) { return a.sample_index < b.sample_index; });
        for (std::size_t k = 0; k < marks.size(); ++k) {
            const std::int64_t span_start = marks[k].sample_index;
            const std::int64_t span_end = (k + 1 < marks.size()) ? marks[k + 1].sample_index : r.samples;
            for (std::int64_t start = span_start; start + window <= span_end; start += stride)
                out.push_back({static_cast<int>(i), start, r.subject_id, static_cast<int>(marks[k].value)});
        }
    }
    return out;
}

SplitResult make_splits(const std::vector<Recording>& recs, const std::vector<WindowRef>& windows,
                        std::int64_t window_len, const SplitSpec& spec) {
    std::set<int> present;
    for (const auto& r : recs) present.insert(r.subject_id);
    for (int s : spec.train_subjects)
        require(present.count(s), "dataio: split references absent subject " + std::to_string(s));
    for (int s : spec.test_subjects)
        require(present.count(s), "dataio: split references absent subject " + std::to_string(s));

    SplitResult out;
    if (spec.mode == SplitMode::intersubject) {
        std::set<int> train(spec.train_subjects.begin(), spec.train_subjects.end());
        std::set<int> test(spec.test_subjects.begin(), spec.test_subjects.end());
        for (int s : train)
            require(!test.count(s),
                    "dataio: intersubject split has subject " + std::to_string(s) + " on both sides");
        for (const auto& w : windows) {
            if (train.count(w.subject_id)) out.train.push_back(w);
            else if (test.count(w.subject_id)) out.test.push_back(w);
        }
    } else {
        require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0,
                "dataio: intrasubject train fraction must lie in (0,1)");
        std::set<int> wanted(spec.train_subjects.begin(), spec.train_subjects.end());
        for (int s : spec.test_subjects) wanted.insert(s);
        for (const auto& w : windows) {
            if (!wanted.empty() && !wanted.count(w.subject_id)) continue;
            const Recording& r = recs[static_cast<std::size_t>(w.recording)];
            const auto boundary = static_cast<std::int64_t>(spec.train_fraction * static_cast<double>(r.samples));
            if (w.start + window_len <= boundary) out.train.push_back(w);
            else if (w.start >= boundary) out.test.push_back(w);
            // windows straddling the boundary are dropped
        }
    }
    return out;
}

std::vector<Recording> generate_synthetic(const SyntheticCfg& cfg) {
    require(cfg.n_subjects >= 1 && cfg.n_classes >= 1 && cfg.recs_per_subject >= 1 &&
                cfg.rec_len >= 1 && cfg.channels >= 1 && cfg.fs > 0,
            "dataio: synthetic counts must be >= 1");
    const std::int64_t trial_len = cfg.trial_len > 0 ? cfg.trial_len : static_cast<std::int64_t>(4 * cfg.fs);
    std::vector<Recording> recs;
    for (int s = 0; s < cfg.n_subjects; ++s) {
        const double g_s = 2.0 + 0.7 * s; // subject fingerprint frequency
        for (int k = 0; k < cfg.recs_per_subject; ++k) {
            Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(k));
            Recording r;
            r.id = "synthetic_s" + std::to_string(s) + "_r" + std::to_string(k);
            r.subject_id = s;
            r.sample_rate_hz = cfg.fs;
            r.channels = cfg.channels;
            r.samples = cfg.rec_len;
            for (std::int64_t c = 0; c < cfg.channels; ++c) r.channel_names.push_back("ch" + std::to_string(c));
            r.data.assign(static_cast<std::size_t>(cfg.channels * cfg.rec_len), 0.0);

            // subject fingerprint + noise everywhere
            for (std::int64_t c = 0; c < cfg.channels; ++c)
                for (std::int64_t t = 0; t < cfg.rec_len; ++t) {
                    const double tt = static_cast<double>(t) / cfg.fs;
                    r.at(c, t) = cfg.subject_amp * std::sin(2.0 * M_PI * g_s * tt) + cfg.noise_std * rng.normal();
                }

            // class oscillation per trial on the class's channel mask
            for (std::int64_t start = 0; start + trial_len <= cfg.rec_len; start += trial_len) {
                const int cls = static_cast<int>(rng.uniform_int(0, cfg.n_classes - 1));
                const double f_c = 10.0 + 4.0 * cls;
                const double phase = rng.uniform(0.0, 2.0 * M_PI);
                for (std::int64_t c = 0; c < cfg.channels; ++c) {
                    if (static_cast<int>(c % cfg.n_classes) != cls) continue; // w_c mask
                    for (std::int64_t t = start; t < start + trial_len; ++t) {
                        const double tt = static_cast<double>(t) / cfg.fs;
                        r.at(c, t) += cfg.class_amp * std::sin(2.0 * M_PI * f_c * tt + phase);
                    }
                }
                r.annotations.push_back({start, "task", cls});
            }

            // snap to f32 so in-memory data equals the on-disk container exactly
            for (auto& v : r.data) v = static_cast<double>(static_cast<float>(v));
            recs.push_back(std::move(r));
        }
    }
    return recs;
}

Montage grid_montage(std::int64_t channels) {
    Montage m;
    const auto side = static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(channels))));
    for (std::int64_t c = 0; c < channels; ++c) {
        const std::int64_t row = c / side, col = c % side;
        const double u = side > 1 ? static_cast<double>(col) / static_cast<double>(side - 1) : 0.5;
        const double v = side > 1 ? static_cast<double>(row) / static_cast<double>(side - 1) : 0.5;
        m.names.push_back("ch" + std::to_string(c));
        m.coords.push_back({u, v});
    }
    return m;
}

} // namespace sacl::dataio
