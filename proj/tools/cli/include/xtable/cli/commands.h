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

#include <atomic>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xtable/storage.h"
#include "xtable/sync.h"

namespace xtable::cli {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDifferent = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 3;

struct Io {
  std::ostream& out;
  std::ostream& err;
};

int CmdSync(Storage& storage, const std::string& config_path, std::optional<SyncMode> mode, Io io);

/// Runs sync every `interval_seconds` (at least 1) until `stop` is set. The
/// in-flight run always completes before the loop exits.
int CmdWatch(Storage& storage, const std::string& config_path, double interval_seconds,
             const std::atomic<bool>& stop, Io io);

/// `format` empty selects every detected format.
int CmdInspect(Storage& storage, const std::string& path, std::optional<Format> format,
               const std::optional<std::string>& as_of, bool json, Io io);

int CmdDiff(Storage& storage, const std::string& path, const std::vector<Format>& formats,
            bool latest_common, Io io);

/// Full command line entry point; `stop` interrupts watch.
int Main(int argc, const char* const* argv, const std::atomic<bool>& stop, Io io);

}  // namespace xtable::cli
