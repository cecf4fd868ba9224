/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "gen.h"
#include "xtable/error.h"
#include "xtable/values.h"

namespace xtable {
namespace {

using testing::Gen;

constexpr FieldType kTypes[] = {FieldType::kBool,   FieldType::kInt32, FieldType::kInt64,
                                FieldType::kFloat64, FieldType::kString, FieldType::kDate,
                                FieldType::kTimestampMicros};

// Digits of the mantissa without leading or trailing zeros.
int SignificantDigits(const std::string& text) {
  std::string digits;
  for (char c : text.substr(0, text.find_first_of("eE"))) {
    if (c >= '0' && c <= '9') digits += c;
  }
  const size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return 0;
  const size_t last = digits.find_last_not_of('0');
  return static_cast<int>(last - first + 1);
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

TEST(CanonicalValues, RenderedForms) {
  EXPECT_EQ(RenderValue(true), "true");
  EXPECT_EQ(RenderValue(false), "false");
  EXPECT_EQ(RenderValue(int32_t{-42}), "-42");
  EXPECT_EQ(RenderValue(int64_t{0}), "0");
  EXPECT_EQ(RenderValue(0.1), "0.1");
  EXPECT_EQ(RenderValue(std::nan("")), "NaN");
  EXPECT_EQ(RenderValue(-INFINITY), "-Infinity");
  EXPECT_EQ(RenderValue(Date{0}), "1970-01-01");
  EXPECT_EQ(RenderValue(Date{-1}), "1969-12-31");
  EXPECT_EQ(RenderValue(TimestampMicros{1704110400000000}), "2024-01-01T12:00:00.000000Z");
  EXPECT_EQ(RenderValue(TimestampMicros{-1}), "1969-12-31T23:59:59.999999Z");
  EXPECT_EQ(RenderValue(Null{}), "__null__");
}

TEST(CanonicalValues, NonCanonicalSpellingsRejected) {
  for (auto [type, text] : std::vector<std::pair<FieldType, std::string>>{
           {FieldType::kBool, "TRUE"},
           {FieldType::kInt32, "007"},
           {FieldType::kInt32, "+1"},
           {FieldType::kInt32, "2147483648"},
           {FieldType::kInt64, "-0"},
           {FieldType::kFloat64, "nan"},
           {FieldType::kDate, "2024-1-01"},
           {FieldType::kDate, "2024-02-30"},
           {FieldType::kTimestampMicros, "2024-01-01T12:00:00Z"},
       }) {
    EXPECT_EQ(CodeOf([&] { ParseValue(type, text); }), ErrorCode::kInvalidArgument)
        << FieldTypeName(type) << " '" << text << "'";
  }
}

TEST(CanonicalValues, NullTokenParsesForEveryType) {
  for (FieldType t : kTypes) EXPECT_TRUE(IsNull(ParseValue(t, kNullToken))) << FieldTypeName(t);
}

// parse(render(v)) = v over 1000 seeded values of every type.
TEST(CanonicalValuesProperty, RoundTrip) {
  Gen gen(20240101);
  for (FieldType t : kTypes) {
    for (int i = 0; i < 1000; ++i) {
      const Value v = gen.ValueOf(t);
      const std::string text = RenderValue(v);
      const Value back = ParseValue(t, text);
      ASSERT_TRUE(SameValue(v, back)) << FieldTypeName(t) << " '" << text << "'";
      ASSERT_EQ(RenderValue(back), text);
    }
  }
}

// Independent oracles: printf for numbers, std::chrono's civil calendar for dates.
TEST(CanonicalValuesProperty, AgreesWithIndependentFormatters) {
  Gen gen(7);
  for (int i = 0; i < 1000; ++i) {
    const double d = gen.Double();
    if (std::isfinite(d)) {
      const std::string text = RenderValue(d);
      EXPECT_EQ(std::strtod(text.c_str(), nullptr), d) << text;
      int precision = 1;
      char shortest[64];
      for (; precision <= 17; ++precision) {
        std::snprintf(shortest, sizeof shortest, "%.*g", precision, d);
        if (std::strtod(shortest, nullptr) == d) break;
      }
      EXPECT_EQ(SignificantDigits(text), SignificantDigits(shortest))
          << text << " vs " << shortest;
    }
    const auto days = static_cast<int32_t>(gen.Range(-719162, 2932896));
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char expected[16];
    std::snprintf(expected, sizeof expected, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    EXPECT_EQ(FormatDate(Date{days}), expected);
  }
}

// CompareCanonical orders canonical strings by typed value, not by text.
TEST(CanonicalValuesProperty, CompareMatchesTypedOrder) {
  Gen gen(99);
  for (int i = 0; i < 1000; ++i) {
    const auto a = static_cast<int64_t>(gen.Bits()), b = static_cast<int64_t>(gen.Bits());
    const int expected = a < b ? -1 : (a > b ? 1 : 0);
    EXPECT_EQ(CompareCanonical(FieldType::kInt64, RenderValue(a), RenderValue(b)), expected);
    const double x = gen.Double(), y = gen.Double();
    if (!std::isnan(x) && !std::isnan(y) && x != y) {
      EXPECT_EQ(CompareCanonical(FieldType::kFloat64, RenderValue(x), RenderValue(y)) < 0, x < y);
    }
  }
  EXPECT_LT(CompareCanonical(FieldType::kFloat64, "Infinity", "NaN"), 0);
  EXPECT_LT(CompareCanonical(FieldType::kInt32, "9", "10"), 0);
  EXPECT_LT(CompareCanonical(FieldType::kBool, "false", "true"), 0);
}

}  // namespace
}  // namespace xtable
