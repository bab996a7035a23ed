#pragma once

// Shared scalar types, errors and small helpers.

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace tilescope {

using Int = mpz_class;
using Rat = mpq_class;

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input text that fails to parse; line is 1-based, 0 when unknown.
struct parse_error : error {
    int line = 0;
    parse_error(const std::string& msg, int line_no)
        : error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// A requested computation would exceed a configured size budget.
struct budget_error : error {
    using error::error;
};

inline std::int64_t to_i64(const Int& v) {
    if (!v.fits_slong_p())
        throw error("integer out of 64-bit range: " + v.get_str());
    return static_cast<std::int64_t>(v.get_si());
}

inline Int from_i64(std::int64_t v) {
    Int r;
    if (v >= 0) {
        r = static_cast<unsigned long>(v);
    } else {
        r = static_cast<unsigned long>(-(v + 1));
        r += 1;
        r = -r;
    }
    return r;
}

inline std::string rat_str(const Rat& q) {
    return q.get_str();
}

// Maximum number of unit tiles a single patch may materialize.
inline std::int64_t tile_budget() {
    if (const char* env = std::getenv("TILESCOPE_TILE_BUDGET")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
    }
    return 20'000'000;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

using cdouble = std::complex<double>;

}  // namespace tilescope
