#pragma once

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "pathlin/pathlin.hpp"
#include "pathlin/suite.hpp"

namespace testutil {

inline pathlin::Vec v2(double x, double y) { return pathlin::detail::vec2(x, y); }

inline pathlin::Point pt(int chart, double x, double y) { return pathlin::Point{chart, v2(x, y)}; }

// Every suite row for one module must pass; failures are listed by name.
inline void expect_rows_pass(const std::vector<pathlin::suite::Row>& rows) {
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.model << " " << r.module << " " << r.name << " = " << r.value << " (tol "
                        << r.tolerance << ") " << r.note;
  }
}

inline std::string fixture(const std::string& name) { return std::string(PATHLIN_FIXTURES) + "/" + name; }

}  // namespace testutil
