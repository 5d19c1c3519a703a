#ifndef CRISP_TESTS_STAT_UTIL_HPP
#define CRISP_TESTS_STAT_UTIL_HPP

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

// Shared statistics helpers for the test and acceptance suites. Everything
// here is deliberately independent of the library implementation so the
// checks stay two-route.

namespace statutil {

// Regularized lower incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 1000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction (Lentz).
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

// Survival function of the chi-square distribution.
inline double chi2_survival(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

// Total-variation distance between two distributions over the same support
// order.
inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double tv = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
    return tv / 2.0;
}

// Unique scratch directory under the process temp dir, removed by the caller.
inline std::string fresh_dir(const std::string& stem) {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path() /
                      (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(base);
    return base.string();
}

struct ScratchDir {
    explicit ScratchDir(const std::string& stem) : path(fresh_dir(stem)) {}
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
    std::string path;
};

}  // namespace statutil

#endif  // CRISP_TESTS_STAT_UTIL_HPP
