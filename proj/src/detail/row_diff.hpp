#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace esqkd::detail {

// One line per differing row position; rows are compared with ==.
template <typename Row>
std::vector<std::string> row_diff(const std::vector<Row>& expected, const std::vector<Row>& actual) {
  std::vector<std::string> diff;
  const std::size_t n = std::max(expected.size(), actual.size());
  for (std::size_t i = 0; i < n; ++i) {
    const bool have_e = i < expected.size();
    const bool have_a = i < actual.size();
    if (have_e && have_a && expected[i] == actual[i]) continue;
    diff.push_back(fmt::format("row {}: expected [{}], got [{}]", i + 1,
                               have_e ? format_row(expected[i]) : std::string("missing"),
                               have_a ? format_row(actual[i]) : std::string("missing")));
  }
  return diff;
}

}  // namespace esqkd::detail
