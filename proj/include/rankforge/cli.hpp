#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rankforge/rational.hpp"

namespace rankforge::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 verification failure, 2 malformed input or
// violated precondition, 3 resource guard.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// {"num": n, "den": d}; integers outside int64 are written as decimal strings.
nlohmann::json rational_json(const Rational& q);

} // namespace rankforge::cli
