/*
 * Copyright (c) 2026 The Venus Toolkit Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef VENUS_ERROR_HPP_
#define VENUS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace venus {

enum class ErrorCode {
  kIoFailure,
  kSchemaViolation,
  kConfigError,
  kIndexOutOfRange,
  kShapeMismatch,
  kOracleFailure,
  kNotInfoRetrieval,
  kNotFinished,
  kAlreadyHasCallUser,
  kUnknownSampleId,
  kDuplicatePrediction,
  kUnknownTrace,
  kInvalidFix,
  kInvalidDecision,
  kBindFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoFailure: return "io_failure";
    case ErrorCode::kSchemaViolation: return "schema_violation";
    case ErrorCode::kConfigError: return "config_error";
    case ErrorCode::kIndexOutOfRange: return "index_out_of_range";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kOracleFailure: return "oracle_failure";
    case ErrorCode::kNotInfoRetrieval: return "not_info_retrieval";
    case ErrorCode::kNotFinished: return "not_finished";
    case ErrorCode::kAlreadyHasCallUser: return "already_has_call_user";
    case ErrorCode::kUnknownSampleId: return "unknown_sample_id";
    case ErrorCode::kDuplicatePrediction: return "duplicate_prediction";
    case ErrorCode::kUnknownTrace: return "unknown_trace";
    case ErrorCode::kInvalidFix: return "invalid_fix";
    case ErrorCode::kInvalidDecision: return "invalid_decision";
    case ErrorCode::kBindFailure: return "bind_failure";
  }
  return "unknown";
}

// Exception type for every recoverable failure in the toolkit. The code is
// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Minimal value-or-error holder for operations whose failure is an expected
// outcome (parsing), not an exceptional one.
template <typename T, typename E>
class Expected {
 public:
  Expected(T value) : storage_(std::in_place_index<0>, std::move(value)) {}
  Expected(E error) : storage_(std::in_place_index<1>, std::move(error)) {}

  bool has_value() const noexcept { return storage_.index() == 0; }
  explicit operator bool() const noexcept { return has_value(); }

  const T& value() const& {
    if (!has_value()) throw std::logic_error("Expected: no value");
    return std::get<0>(storage_);
  }
  T&& value() && {
    if (!has_value()) throw std::logic_error("Expected: no value");
    return std::get<0>(std::move(storage_));
  }
  const E& error() const& {
    if (has_value()) throw std::logic_error("Expected: no error");
    return std::get<1>(storage_);
  }

  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  bool operator==(const Expected&) const = default;

 private:
  std::variant<T, E> storage_;
};

}  // namespace venus

#endif  // VENUS_ERROR_HPP_
