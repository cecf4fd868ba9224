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

#include "xtable/error.h"

namespace xtable {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRemovedNotLive: return "REMOVED_NOT_LIVE";
    case ErrorCode::kDuplicateAdd: return "DUPLICATE_ADD";
    case ErrorCode::kMalformedUri: return "MALFORMED_URI";
    case ErrorCode::kUnsupportedScheme: return "UNSUPPORTED_SCHEME";
    case ErrorCode::kIoFailure: return "IO_FAILURE";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kNoTable: return "NO_TABLE";
    case ErrorCode::kTableExists: return "TABLE_EXISTS";
    case ErrorCode::kGapInLog: return "GAP_IN_LOG";
    case ErrorCode::kMalformedAction: return "MALFORMED_ACTION";
    case ErrorCode::kMalformedMetadata: return "MALFORMED_METADATA";
    case ErrorCode::kMalformedTimeline: return "MALFORMED_TIMELINE";
    case ErrorCode::kDanglingPointer: return "DANGLING_POINTER";
    case ErrorCode::kVersionAhead: return "VERSION_AHEAD";
    case ErrorCode::kSnapshotExpired: return "SNAPSHOT_EXPIRED";
    case ErrorCode::kInstantNotFound: return "INSTANT_NOT_FOUND";
    case ErrorCode::kConcurrentCommit: return "CONCURRENT_COMMIT";
    case ErrorCode::kInvalidChange: return "INVALID_CHANGE";
    case ErrorCode::kUnpairableRemove: return "UNPAIRABLE_REMOVE";
    case ErrorCode::kSourceUnreadable: return "SOURCE_UNREADABLE";
    case ErrorCode::kPublishConflict: return "PUBLISH_CONFLICT";
    case ErrorCode::kStateIoFailure: return "STATE_IO_FAILURE";
    case ErrorCode::kConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::kMissingDataFile: return "MISSING_DATA_FILE";
    case ErrorCode::kDataReadViolation: return "DATA_READ_VIOLATION";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code) {}

void Fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace xtable
