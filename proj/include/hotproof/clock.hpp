// Copyright (c) The hotproof authors. All rights reserved.
// Licensed under the Apache 2.0 License.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>

namespace hotproof {

/// Unix seconds. Injected everywhere time matters so tests can skew it.
using Clock = std::function<std::uint64_t()>;

inline std::uint64_t system_now() {
  return static_cast<std::uint64_t>(
    std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
      .count());
}

} // namespace hotproof
