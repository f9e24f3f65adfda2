#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace pfk {

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Bad arguments, malformed domains, violated preconditions.  CLI maps this
// family to exit code 2.
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterative solver failed hard (lost bracket, no descent direction).
// Plain non-convergence is reported through result flags, not this.
// CLI maps this family to exit code 3.
struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string& msg) : std::runtime_error(msg) {}
};

inline double sq(double x) { return x * x; }

// Fixed-width float formatting used by every serialized report.  %.17g
// round-trips doubles, so two runs of the same build produce identical bytes.
inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt_g(double x, int prec = 12) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    return buf;
}

}  // namespace pfk
