#pragma once

#include <cstdio>
#include <string>

namespace grn {

/// Deterministic shortest-ish decimal rendering for CSV output. %.10g keeps
/// runlog numbers readable while staying byte-stable for identical doubles.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline std::string fmt_double(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    return buf;
}

} // namespace grn
