/// @file error.hpp
/// @brief Exception hierarchy shared by every shiftscope module.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shiftscope {

/// Stable error categories. The numeric values are mirrored by the C API
/// status codes in shiftscope.h and must not be renumbered.
enum class ErrorCode : int {
  kFormat = 1,
  kUnsupportedArray = 2,
  kParse = 3,
  kIo = 4,
  kSampleTooLarge = 5,
  kLabelsRequired = 6,
  kInvalidSplit = 7,
  kDimension = 8,
  kKTooLarge = 9,
  kIndexPairing = 10,
  kInfiniteBar = 11,
  kInsufficientSamples = 12,
  kConfig = 13,
  kInvalidArgument = 14,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Non-numeric CSV cell. Row and column are 1-based, counting the header
/// as row 1, so they match what a spreadsheet shows.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& message)
      : Error(ErrorCode::kParse, message), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

}  // namespace shiftscope
