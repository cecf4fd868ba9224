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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace xtable {

enum class FieldType { kBool, kInt32, kInt64, kFloat64, kString, kDate, kTimestampMicros };

std::string_view FieldTypeName(FieldType type);
std::optional<FieldType> FieldTypeFromName(std::string_view name);

/// Days since 1970-01-01.
struct Date {
  int32_t days = 0;
  auto operator<=>(const Date&) const = default;
};

/// Microseconds since 1970-01-01T00:00:00Z.
struct TimestampMicros {
  int64_t micros = 0;
  auto operator<=>(const TimestampMicros&) const = default;
};

struct Null {
  bool operator==(const Null&) const = default;
};

using Value = std::variant<Null, bool, int32_t, int64_t, double, std::string, Date,
                           TimestampMicros>;

/// Partition values and CSV cells use this token for null.
inline constexpr std::string_view kNullToken = "__null__";

bool IsNull(const Value& value);
FieldType TypeOf(const Value& value);

/// Canonical text form shared by every format writer. Null renders as
/// kNullToken.
std::string RenderValue(const Value& value);

/// Strict inverse of RenderValue: only canonical spellings are accepted.
/// kNullToken parses to Null for every type. Throws Error(kInvalidArgument).
Value ParseValue(FieldType type, std::string_view text);

/// Total order within one type: false < true, numeric order for numbers (NaN
/// sorts last), byte order for strings. Null sorts before everything.
int CompareValues(const Value& a, const Value& b);

/// Orders two canonical strings of the given type by their typed values.
int CompareCanonical(FieldType type, std::string_view a, std::string_view b);

std::string FormatDate(Date date);
std::string FormatTimestamp(TimestampMicros ts);

/// Equality that treats NaN as equal to NaN, used by round-trip checks.
bool SameValue(const Value& a, const Value& b);

}  // namespace xtable
