// Copyright 2026 The bpdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BPDM_LOG_HPP_
#define BPDM_LOG_HPP_

#include <string_view>

namespace bpdm {

enum class LogLevel { debug = 0, info = 1, warning = 2, error = 3, silent = 4 };

// Messages go to stderr; the threshold is process-wide.
void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);
inline void log_warning(std::string_view message) { log_message(LogLevel::warning, message); }
inline void log_info(std::string_view message) { log_message(LogLevel::info, message); }

}  // namespace bpdm

#endif  // BPDM_LOG_HPP_
