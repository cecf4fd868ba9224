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

#include <stdexcept>
#include <string>
#include <string_view>

namespace xtable {

enum class ErrorCode {
  kRemovedNotLive,
  kDuplicateAdd,
  kMalformedUri,
  kUnsupportedScheme,
  kIoFailure,
  kNotFound,
  kNoTable,
  kTableExists,
  kGapInLog,
  kMalformedAction,
  kMalformedMetadata,
  kMalformedTimeline,
  kDanglingPointer,
  kVersionAhead,
  kSnapshotExpired,
  kInstantNotFound,
  kConcurrentCommit,
  kInvalidChange,
  kUnpairableRemove,
  kSourceUnreadable,
  kPublishConflict,
  kStateIoFailure,
  kConfigInvalid,
  kMissingDataFile,
  kDataReadViolation,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

/// Every failure surfaced by the library carries one of the codes above so
/// callers (the sync planner in particular) can branch on the kind of error.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

}  // namespace xtable
