#pragma once

#include <doctest.h>

#include <functional>
#include <optional>
#include <string>

#include "bemseval/error.hpp"

namespace testsupport {

// Kind of the bemseval::Error thrown by `fn`; nullopt when nothing (or something else) is thrown.
inline std::optional<bemseval::ErrorKind> error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const bemseval::Error& e) {
    return e.kind();
  } catch (...) {
    return std::nullopt;
  }
  return std::nullopt;
}

inline std::string error_message(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace testsupport
