#ifndef RECYKLOS_ERRORS_HPP
#define RECYKLOS_ERRORS_HPP

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace recyklos {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};
struct UnsupportedFormat : Error {
    using Error::Error;
};
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line(line) {}
    std::size_t line;
};
struct IoError : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    using Error::Error;
};
struct IllConditionedPencil : Error {
    using Error::Error;
};
struct EmptyRecycleSpace : Error {
    using Error::Error;
};
struct NotSymmetric : Error {
    using Error::Error;
};
struct NotPositiveDefinite : Error {
    using Error::Error;
};
struct SingularMatrix : Error {
    using Error::Error;
};

/// Per-iteration invariant assertions, enabled by RECYKLOS_DEBUG_CHECKS=1
/// (or force()'d from code). Violations throw NumericalFailure.
namespace debug_checks {

inline bool& forced_flag() {
    static bool f = false;
    return f;
}
inline bool& forced_value() {
    static bool v = false;
    return v;
}
inline bool enabled() {
    if (forced_flag()) return forced_value();
    const char* e = std::getenv("RECYKLOS_DEBUG_CHECKS");
    return e != nullptr && std::string(e) == "1";
}
inline void force(bool on) {
    forced_flag() = true;
    forced_value() = on;
}

} // namespace debug_checks

} // namespace recyklos

#endif
