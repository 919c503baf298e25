#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "sacl/dataio.hpp"

using namespace sacl;
using namespace sacl::dataio;
namespace fs = std::filesystem;

namespace {

Recording small_recording(int subject = 0, std::int64_t C = 2, std::int64_t T = 1000) {
    Recording r;
    r.id = "rec";
    r.subject_id = subject;
    r.sample_rate_hz = 160.0;
    r.channels = C;
    r.samples = T;
    for (std::int64_t c = 0; c < C; ++c) r.channel_names.push_back("ch" + std::to_string(c));
    r.data.assign(static_cast<std::size_t>(C * T), 0.0);
    Rng rng(99);
    for (auto& v : r.data) v = static_cast<double>(static_cast<float>(rng.uniform(-1.0, 1.0)));
    return r;
}

std::vector<char> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_SUITE("dataio") {

TEST_CASE("container round-trip reproduces payload bytes exactly") {
    const auto dir = testutil::scratch_dir("dataio_rt");
    auto r = small_recording();
    r.annotations.push_back({10, "task", 1});
    r.annotations.push_back({500, "beat", 0});
    write_dataset({r}, dir);

    auto loaded = load_dataset(dir + "/manifest.json");
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].channels == 2);
    CHECK(loaded[0].samples == 1000);
    CHECK(loaded[0].subject_id == 0);
    CHECK(loaded[0].annotations.size() == 2);
    CHECK(loaded[0].data == r.data);

    const auto dir2 = testutil::scratch_dir("dataio_rt2");
    write_dataset(loaded, dir2);
    CHECK(read_bytes(fs::path(dir) / "rec0.f32") == read_bytes(fs::path(dir2) / "rec0.f32"));
}

TEST_CASE("load errors are structured and name the entry") {
    const auto dir = testutil::scratch_dir("dataio_err");
    write_dataset({small_recording()}, dir);

    SUBCASE("truncated payload") {
        fs::resize_file(fs::path(dir) / "rec0.f32", 2 * 1000 * 4 - 4);
        CHECK_THROWS_WITH_AS(load_dataset(dir + "/manifest.json"),
                             doctest::Contains("length mismatch"), Error);
    }
    SUBCASE("missing data file") {
        fs::remove(fs::path(dir) / "rec0.f32");
        CHECK_THROWS_WITH_AS(load_dataset(dir + "/manifest.json"),
                             doctest::Contains("missing data file"), Error);
    }
    SUBCASE("NaN in payload") {
        std::fstream f(fs::path(dir) / "rec0.f32", std::ios::binary | std::ios::in | std::ios::out);
        const float nan = std::nanf("");
        f.seekp(64);
        f.write(reinterpret_cast<const char*>(&nan), 4);
        f.close();
        CHECK_THROWS_WITH_AS(load_dataset(dir + "/manifest.json"), doctest::Contains("NaN"), Error);
    }
    SUBCASE("recording shorter than the window is rejected at load") {
        CHECK_THROWS_WITH_AS(load_dataset(dir + "/manifest.json", 2000),
                             doctest::Contains("shorter than the configured window"), Error);
    }
}

TEST_CASE("rereference subtracts the per-sample channel mean") {
    SUBCASE("constant columns become zero") {
        auto r = small_recording(0, 3, 10);
        for (std::int64_t c = 0; c < 3; ++c)
            for (std::int64_t t = 0; t < 10; ++t) r.at(c, t) = 7.5;
        const auto out = rereference_channel_average(r);
        for (double v : out.data) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("two-channel column [1,3] -> [-1,1]") {
        auto r = small_recording(0, 2, 1);
        r.at(0, 0) = 1.0;
        r.at(1, 0) = 3.0;
        const auto out = rereference_channel_average(r);
        CHECK(out.at(0, 0) == doctest::Approx(-1.0));
        CHECK(out.at(1, 0) == doctest::Approx(1.0));
    }
    SUBCASE("random 4x64: per-sample means vanish and the op is idempotent") {
        auto r = small_recording(0, 4, 64);
        const auto out = rereference_channel_average(r);
        for (std::int64_t t = 0; t < 64; ++t) {
            double m = 0;
            for (std::int64_t c = 0; c < 4; ++c) m += out.at(c, t);
            CHECK(std::abs(m / 4.0) < 1e-6);
        }
        const auto out2 = rereference_channel_average(out);
        for (std::size_t i = 0; i < out.data.size(); ++i)
            CHECK(out2.data[i] == doctest::Approx(out.data[i]).epsilon(1e-12));
    }
    SUBCASE("single channel rejected") {
        CHECK_THROWS_AS(rereference_channel_average(small_recording(0, 1, 8)), Error);
    }
}

TEST_CASE("zscore normalization") {
    auto r = small_recording(0, 2, 500);
    SUBCASE("identity stats") {
        DatasetStats st{{0.0, 0.0}, {1.0, 1.0}};
        const auto out = zscore_normalize(r, st);
        CHECK(out.data == r.data);
    }
    SUBCASE("x=5, mean=5, std=2 -> 0") {
        r.at(0, 0) = 5.0;
        DatasetStats st{{5.0, 0.0}, {2.0, 1.0}};
        CHECK(zscore_normalize(r, st).at(0, 0) == doctest::Approx(0.0));
    }
    SUBCASE("dataset normalized by its own stats has mean 0 / std 1 per channel") {
        const auto st = compute_stats({r});
        const auto out = zscore_normalize(r, st);
        const auto st2 = compute_stats({out});
        for (std::int64_t c = 0; c < 2; ++c) {
            CHECK(std::abs(st2.mean[static_cast<std::size_t>(c)]) < 1e-5);
            CHECK(std::abs(st2.stdev[static_cast<std::size_t>(c)] - 1.0) < 1e-5);
        }
    }
    SUBCASE("zero std rejected") {
        DatasetStats st{{0.0, 0.0}, {0.0, 1.0}};
        CHECK_THROWS_AS(zscore_normalize(r, st), Error);
    }
}

TEST_CASE("mode-center normalization uses the 101-bin histogram mode") {
    SUBCASE("sparse spikes on a zero baseline: mode 0, output x / rms") {
        Segment s;
        s.channels = 1;
        s.samples = 200;
        s.data.assign(200, 0.0);
        s.data[10] = 4.0;
        s.data[50] = -3.0;
        s.data[120] = 5.0;
        // histogram mode bin contains 0; center of that bin is the estimate
        const double m = histogram_mode(s.data);
        const double binw = (5.0 - (-3.0)) / 101.0;
        CHECK(std::abs(m) <= binw); // zero sits inside the modal bin
        double ss = 0;
        for (double v : s.data) ss += (v - m) * (v - m);
        const double rms = std::sqrt(ss / 200.0);
        const auto out = mode_center_normalize(s);
        CHECK(out.at(0, 10) == doctest::Approx((4.0 - m) / rms));
        // RMS about the mode equals 1 after normalization
        double ss2 = 0;
        for (double v : out.data) ss2 += v * v;
        CHECK(std::sqrt(ss2 / 200.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("constant segment rejected") {
        Segment s;
        s.channels = 1;
        s.samples = 8;
        s.data.assign(8, 2.0);
        CHECK_THROWS_WITH_AS(mode_center_normalize(s), doctest::Contains("degenerate"), Error);
    }
    SUBCASE("symmetric data about 2.0: recentered mode bin lands at 0") {
        Segment s;
        s.channels = 1;
        s.samples = 401;
        Rng rng(5);
        for (int i = 0; i < 401; ++i) s.data.push_back(2.0 + std::sin(i * 0.7) * rng.uniform());
        for (int i = 0; i < 200; ++i) s.data[static_cast<std::size_t>(i)] = 2.0; // heavy mode at 2.0
        s.data.resize(401);
        const double m = histogram_mode(s.data);
        const auto out = mode_center_normalize(s);
        const double m2 = histogram_mode(out.data);
        const double binw = [&] {
            const auto [mn, mx] = std::minmax_element(out.data.begin(), out.data.end());
            return (*mx - *mn) / 101.0;
        }();
        CHECK(std::abs(m - 2.0) < 0.1);
        CHECK(std::abs(m2) <= binw);
    }
}

TEST_CASE("extract_window slices exactly and validates bounds") {
    auto r = small_recording(3, 2, 100);
    SUBCASE("whole recording") {
        const auto s = extract_window(r, 0, 100);
        CHECK(s.data == r.data);
        CHECK(s.subject_id == 3);
    }
    SUBCASE("interior slice matches per element") {
        const auto s = extract_window(r, 17, 20);
        for (std::int64_t c = 0; c < 2; ++c)
            for (std::int64_t t = 0; t < 20; ++t) CHECK(s.at(c, t) == r.at(c, t + 17));
    }
    SUBCASE("out of bounds") {
        CHECK_THROWS_AS(extract_window(r, 100 - 20 + 1, 20), Error);
        CHECK_THROWS_AS(extract_window(r, -1, 20), Error);
    }
}

TEST_CASE("task windows start at cue plus 0.25 s") {
    auto r = small_recording(0, 2, 1000); // fs = 160
    r.annotations.push_back({100, "task", 1});
    const auto ws = enumerate_task_windows({r}, 320, 0.25);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].start == 100 + 40); // round(0.25 * 160)
    CHECK(ws[0].label == 1);
}

TEST_CASE("splits") {
    std::vector<Recording> recs;
    for (int s = 0; s < 10; ++s) recs.push_back(small_recording(s, 2, 1000));

    SUBCASE("intersubject 8/2 keeps subject sets disjoint") {
        SplitSpec spec;
        spec.mode = SplitMode::intersubject;
        for (int s = 0; s < 8; ++s) spec.train_subjects.push_back(s);
        spec.test_subjects = {8, 9};
        const auto windows = enumerate_tiled_windows(recs, 100, 100);
        const auto split = make_splits(recs, windows, 100, spec);
        for (const auto& w : split.train) CHECK(w.subject_id < 8);
        for (const auto& w : split.test) CHECK(w.subject_id >= 8);
        CHECK(split.train.size() == 8 * 10);
        CHECK(split.test.size() == 2 * 10);
    }
    SUBCASE("intrasubject split: train ends by 750, test starts at 750, straddlers dropped") {
        SplitSpec spec;
        spec.mode = SplitMode::intrasubject;
        const auto windows = enumerate_tiled_windows(recs, 100, 37); // offsets straddle the boundary
        const auto split = make_splits(recs, windows, 100, spec);
        CHECK(!split.train.empty());
        CHECK(!split.test.empty());
        for (const auto& w : split.train) CHECK(w.start + 100 <= 750);
        for (const auto& w : split.test) CHECK(w.start >= 750);
        // no (recording, start) pair on both sides
        std::set<std::pair<int, std::int64_t>> seen;
        for (const auto& w : split.train) seen.insert({w.recording, w.start});
        for (const auto& w : split.test) CHECK(!seen.count({w.recording, w.start}));
    }
    SUBCASE("absent subject rejected") {
        SplitSpec spec;
        spec.mode = SplitMode::intersubject;
        spec.train_subjects = {0, 99};
        spec.test_subjects = {1};
        CHECK_THROWS_WITH_AS(make_splits(recs, {}, 100, spec), doctest::Contains("absent subject"), Error);
    }
    SUBCASE("overlapping intersubject sets rejected") {
        SplitSpec spec;
        spec.mode = SplitMode::intersubject;
        spec.train_subjects = {0, 1};
        spec.test_subjects = {1, 2};
        CHECK_THROWS_WITH_AS(make_splits(recs, {}, 100, spec), doctest::Contains("both sides"), Error);
    }
}

TEST_CASE("synthetic generator") {
    SyntheticCfg cfg;
    cfg.n_subjects = 2;
    cfg.n_classes = 2;
    cfg.recs_per_subject = 1;
    cfg.rec_len = 4000;
    cfg.channels = 4;
    cfg.fs = 160.0;
    cfg.seed = 11;

    SUBCASE("deterministic in seed") {
        const auto a = generate_synthetic(cfg);
        const auto b = generate_synthetic(cfg);
        REQUIRE(a.size() == b.size());
        CHECK(dataset_hash(a) == dataset_hash(b));
        cfg.seed = 12;
        CHECK(dataset_hash(a) != dataset_hash(generate_synthetic(cfg)));
    }
    SUBCASE("single class labels all equal") {
        cfg.n_classes = 1;
        for (const auto& r : generate_synthetic(cfg))
            for (const auto& a : r.annotations) CHECK(a.value == 0);
    }
    SUBCASE("class trials carry a spectral peak at f_c within 0.5 Hz") {
        const auto recs = generate_synthetic(cfg);
        int checked = 0;
        for (const auto& r : recs) {
            for (const auto& a : r.annotations) {
                if (a.kind != "task") continue;
                const double f_c = 10.0 + 4.0 * static_cast<double>(a.value);
                // class mask puts class c on channels where ch % n_classes == c
                const auto ch = static_cast<std::int64_t>(a.value);
                const std::int64_t len = std::min<std::int64_t>(640, r.samples - a.sample_index);
                std::vector<double> x;
                for (std::int64_t t = a.sample_index; t < a.sample_index + len; ++t)
                    x.push_back(r.at(ch, t));
                // scan the spectrum for the strongest bin above 5 Hz
                double best_f = 0, best_p = -1;
                for (double f = 5.0; f <= 30.0; f += 0.25) {
                    const double p = testutil::power_at(x, f, cfg.fs);
                    if (p > best_p) {
                        best_p = p;
                        best_f = f;
                    }
                }
                CHECK(std::abs(best_f - f_c) <= 0.5);
                ++checked;
            }
            if (checked > 6) break;
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("grid montage stays inside the unit square") {
    const auto m = grid_montage(8);
    REQUIRE(m.size() == 8);
    for (const auto& c : m.coords) {
        CHECK(c[0] >= 0.0);
        CHECK(c[0] <= 1.0);
        CHECK(c[1] >= 0.0);
        CHECK(c[1] <= 1.0);
    }
}

} // TEST_SUITE
