#pragma once

// Minimal test support: CHECK macros with a shared pass/fail count and a
// summary that the harness greps for.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace testsupport {

inline int checks_passed = 0;
inline int checks_failed = 0;

inline void record(bool ok, const char* expr, const char* file, int line) {
    if (ok) {
        ++checks_passed;
    } else {
        ++checks_failed;
        std::printf("[FAIL] %s (%s:%d)\n", expr, file, line);
    }
}

inline bool near(double a, double b, double tol) {
    return std::fabs(a - b) <= tol;
}

inline int summary(const char* suite) {
    if (checks_failed == 0) {
        std::printf("[PASS] %s: %d checks\n", suite, checks_passed);
        return 0;
    }
    std::printf("[FAIL] %s: %d of %d checks failed\n", suite, checks_failed,
                checks_passed + checks_failed);
    return 1;
}

}  // namespace testsupport

#define CHECK(...)                                                    \
    testsupport::record(static_cast<bool>(__VA_ARGS__), #__VA_ARGS__, \
                        __FILE__, __LINE__)

#define CHECK_EQ(a, b) \
    testsupport::record((a) == (b), #a " == " #b, __FILE__, __LINE__)

#define CHECK_NEAR(a, b, tol)                                         \
    testsupport::record(testsupport::near((a), (b), (tol)),           \
                        #a " ~= " #b, __FILE__, __LINE__)

#define CHECK_THROWS(...)                                             \
    do {                                                              \
        bool caught_ = false;                                         \
        try {                                                         \
            __VA_ARGS__;                                              \
        } catch (const std::exception&) {                             \
            caught_ = true;                                           \
        }                                                             \
        testsupport::record(caught_, "throws: " #__VA_ARGS__,         \
                            __FILE__, __LINE__);                      \
    } while (0)
