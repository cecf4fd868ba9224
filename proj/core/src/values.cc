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

#include "xtable/values.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "xtable/error.h"

namespace xtable {

namespace {

constexpr int64_t kMicrosPerSecond = 1'000'000;
constexpr int64_t kSecondsPerDay = 86'400;

// Proleptic Gregorian conversions (H. Hinnant's days_from_civil).
int64_t DaysFromCivil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void CivilFromDays(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

int64_t FloorDiv(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

[[noreturn]] void BadValue(FieldType type, std::string_view text) {
  Fail(ErrorCode::kInvalidArgument, "not a canonical " + std::string(FieldTypeName(type)) +
                                        " value: '" + std::string(text) + "'");
}

template <typename Int>
Int ParseInt(FieldType type, std::string_view text) {
  Int out{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) BadValue(type, text);
  return out;
}

bool ParseFixed(std::string_view text, size_t pos, size_t len, int64_t& out) {
  if (pos + len > text.size()) return false;
  int64_t v = 0;
  for (size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    v = v * 10 + (text[i] - '0');
  }
  out = v;
  return true;
}

bool ParseDateAt(std::string_view text, size_t pos, int64_t& days) {
  int64_t y = 0, m = 0, d = 0;
  if (!ParseFixed(text, pos, 4, y) || text.size() < pos + 10 || text[pos + 4] != '-' ||
      !ParseFixed(text, pos + 5, 2, m) || text[pos + 7] != '-' ||
      !ParseFixed(text, pos + 8, 2, d)) {
    return false;
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return false;
  days = DaysFromCivil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
  int64_t ry;
  unsigned rm, rd;
  CivilFromDays(days, ry, rm, rd);
  return ry == y && rm == m && rd == d;
}

int Sign(auto a, auto b) { return a < b ? -1 : (b < a ? 1 : 0); }

}  // namespace

std::string_view FieldTypeName(FieldType type) {
  switch (type) {
    case FieldType::kBool: return "BOOL";
    case FieldType::kInt32: return "INT32";
    case FieldType::kInt64: return "INT64";
    case FieldType::kFloat64: return "FLOAT64";
    case FieldType::kString: return "STRING";
    case FieldType::kDate: return "DATE";
    case FieldType::kTimestampMicros: return "TIMESTAMP_MICROS";
  }
  return "?";
}

std::optional<FieldType> FieldTypeFromName(std::string_view name) {
  for (FieldType t : {FieldType::kBool, FieldType::kInt32, FieldType::kInt64,
                      FieldType::kFloat64, FieldType::kString, FieldType::kDate,
                      FieldType::kTimestampMicros}) {
    if (FieldTypeName(t) == name) return t;
  }
  return std::nullopt;
}

bool IsNull(const Value& value) { return std::holds_alternative<Null>(value); }

FieldType TypeOf(const Value& value) {
  switch (value.index()) {
    case 1: return FieldType::kBool;
    case 2: return FieldType::kInt32;
    case 3: return FieldType::kInt64;
    case 4: return FieldType::kFloat64;
    case 5: return FieldType::kString;
    case 6: return FieldType::kDate;
    case 7: return FieldType::kTimestampMicros;
    default: Fail(ErrorCode::kInvalidArgument, "null has no type");
  }
}

std::string FormatDate(Date date) {
  int64_t y;
  unsigned m, d;
  CivilFromDays(date.days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
  return buf;
}

std::string FormatTimestamp(TimestampMicros ts) {
  const int64_t secs = FloorDiv(ts.micros, kMicrosPerSecond);
  const int64_t frac = ts.micros - secs * kMicrosPerSecond;
  const int64_t days = FloorDiv(secs, kSecondsPerDay);
  const int64_t sod = secs - days * kSecondsPerDay;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%sT%02lld:%02lld:%02lld.%06lldZ",
                FormatDate(Date{static_cast<int32_t>(days)}).c_str(),
                static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                static_cast<long long>(sod % 60), static_cast<long long>(frac));
  return buf;
}

namespace {

size_t SignificantDigits(const char* begin, const char* end) {
  std::string digits;
  for (const char* p = begin; p != end && *p != 'e'; ++p) {
    if (*p >= '0' && *p <= '9') digits += *p;
  }
  const size_t first = digits.find_first_not_of('0');
  if (first == std::string::npos) return 0;
  return digits.find_last_not_of('0') - first + 1;
}

}  // namespace

std::string RenderValue(const Value& value) {
  struct Visitor {
    std::string operator()(const Null&) const { return std::string(kNullToken); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(int32_t v) const { return std::to_string(v); }
    std::string operator()(int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      if (std::isnan(v)) return "NaN";
      if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
      char plain[64], sci[64];
      char* plain_end = std::to_chars(plain, plain + sizeof(plain), v).ptr;
      char* sci_end =
          std::to_chars(sci, sci + sizeof(sci), v, std::chars_format::scientific).ptr;
      // Fixed notation of large integral values spells out exact digits that
      // are not needed to round-trip.
      if (SignificantDigits(plain, plain_end) > SignificantDigits(sci, sci_end)) {
        return std::string(sci, sci_end);
      }
      return std::string(plain, plain_end);
    }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(Date v) const { return FormatDate(v); }
    std::string operator()(TimestampMicros v) const { return FormatTimestamp(v); }
  };
  return std::visit(Visitor{}, value);
}

Value ParseValue(FieldType type, std::string_view text) {
  if (text == kNullToken) return Null{};
  Value out;
  switch (type) {
    case FieldType::kBool:
      if (text == "true") return true;
      if (text == "false") return false;
      BadValue(type, text);
    case FieldType::kInt32:
      out = ParseInt<int32_t>(type, text);
      break;
    case FieldType::kInt64:
      out = ParseInt<int64_t>(type, text);
      break;
    case FieldType::kFloat64: {
      if (text == "NaN") return std::numeric_limits<double>::quiet_NaN();
      if (text == "Infinity") return std::numeric_limits<double>::infinity();
      if (text == "-Infinity") return -std::numeric_limits<double>::infinity();
      double v{};
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        BadValue(type, text);
      }
      out = v;
      break;
    }
    case FieldType::kString:
      return std::string(text);
    case FieldType::kDate: {
      int64_t days = 0;
      if (text.size() != 10 || !ParseDateAt(text, 0, days)) BadValue(type, text);
      out = Date{static_cast<int32_t>(days)};
      break;
    }
    case FieldType::kTimestampMicros: {
      // YYYY-MM-DDTHH:MM:SS.ffffffZ
      int64_t days = 0, hh = 0, mm = 0, ss = 0, frac = 0;
      if (text.size() != 27 || !ParseDateAt(text, 0, days) || text[10] != 'T' ||
          !ParseFixed(text, 11, 2, hh) || text[13] != ':' || !ParseFixed(text, 14, 2, mm) ||
          text[16] != ':' || !ParseFixed(text, 17, 2, ss) || text[19] != '.' ||
          !ParseFixed(text, 20, 6, frac) || text[26] != 'Z' || hh > 23 || mm > 59 ||
          ss > 59) {
        BadValue(type, text);
      }
      out = TimestampMicros{((days * kSecondsPerDay) + hh * 3600 + mm * 60 + ss) *
                                kMicrosPerSecond +
                            frac};
      break;
    }
  }
  // Reject non-canonical spellings such as leading zeros or "+1".
  if (RenderValue(out) != text) BadValue(type, text);
  return out;
}

int CompareValues(const Value& a, const Value& b) {
  if (IsNull(a) || IsNull(b)) return Sign(!IsNull(a), !IsNull(b));
  if (a.index() != b.index()) {
    Fail(ErrorCode::kInvalidArgument, "cannot compare values of different types");
  }
  switch (a.index()) {
    case 1: return Sign(std::get<bool>(a), std::get<bool>(b));
    case 2: return Sign(std::get<int32_t>(a), std::get<int32_t>(b));
    case 3: return Sign(std::get<int64_t>(a), std::get<int64_t>(b));
    case 4: {
      const double x = std::get<double>(a), y = std::get<double>(b);
      if (std::isnan(x) || std::isnan(y)) return Sign(std::isnan(x), std::isnan(y));
      return Sign(x, y);
    }
    case 5: return Sign(std::get<std::string>(a).compare(std::get<std::string>(b)), 0);
    case 6: return Sign(std::get<Date>(a), std::get<Date>(b));
    case 7: return Sign(std::get<TimestampMicros>(a), std::get<TimestampMicros>(b));
  }
  return 0;
}

int CompareCanonical(FieldType type, std::string_view a, std::string_view b) {
  return CompareValues(ParseValue(type, a), ParseValue(type, b));
}

bool SameValue(const Value& a, const Value& b) {
  if (a.index() == 4 && b.index() == 4 && std::isnan(std::get<double>(a)) &&
      std::isnan(std::get<double>(b))) {
    return true;
  }
  if (a.index() == 4 && b.index() == 4) {
    return std::signbit(std::get<double>(a)) == std::signbit(std::get<double>(b)) && a == b;
  }
  return a == b;
}

}  // namespace xtable
