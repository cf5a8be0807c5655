#pragma once

#include <functional>
#include <optional>

#include "core/error.hpp"

// Error code thrown by fn, or nothing.
inline std::optional<beb::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const beb::Error& e) {
    return e.code();
  }
  return std::nullopt;
}
