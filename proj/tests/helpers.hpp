#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

// shared test utilities

namespace testutil {

// Goertzel power of a real series at frequency f (Hz)
inline double power_at(const std::vector<double>& x, double f, double fs) {
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double a = 2.0 * M_PI * f * static_cast<double>(t) / fs;
        re += x[t] * std::cos(a);
        im -= x[t] * std::sin(a);
    }
    return re * re + im * im;
}

inline double db(double p_out, double p_in) { return 10.0 * std::log10(p_out / p_in); }

// unique scratch directory under the build tree
inline std::string scratch_dir(const std::string& tag) {
    const auto p = std::filesystem::temp_directory_path() / ("sacl_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

} // namespace testutil
