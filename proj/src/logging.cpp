// Copyright 2026 The Int2Plan Authors
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

#include "int2plan/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace int2plan {

std::shared_ptr<spdlog::logger> logger()
{
  static std::shared_ptr<spdlog::logger> instance = [] {
    auto log = spdlog::stderr_color_st("int2plan");
    auto level = spdlog::level::warn;
    if (const char * env = std::getenv("INT2PLAN_LOG")) {
      const std::string name(env);
      if (name == "error") level = spdlog::level::err;
      else if (name == "warn") level = spdlog::level::warn;
      else if (name == "info") level = spdlog::level::info;
      else if (name == "debug") level = spdlog::level::debug;
    }
    log->set_level(level);
    log->set_pattern("[%l] %v");
    return log;
  }();
  return instance;
}

}  // namespace int2plan
