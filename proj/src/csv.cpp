#include "memfir/csv.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace memfir::csv {

std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fmt(double x, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, x);
    return buf;
}

} // namespace memfir::csv
