#pragma once

// JSON documents that remember where each value came from, so that schema
// violations can name a line and column.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mcensus/errors.hpp"

namespace mcensus {

using Json = nlohmann::json;

struct SourcePosition {
  std::size_t line = 1;
  std::size_t column = 1;
};

class PositionedJson {
 public:
  /// Parses text; syntax errors raise ValidationError with line/column.
  static PositionedJson parse(std::string_view text, std::string source_name = "<input>");
  static PositionedJson load_file(std::string const& path);

  Json const& root() const noexcept { return root_; }
  std::string const& source_name() const noexcept { return source_; }

  /// Position of the value at a JSON pointer ("" is the root).
  SourcePosition position(std::string const& pointer) const;

  /// Throws ValidationError "<source>:<line>:<col>: <message> (at <pointer>)".
  [[noreturn]] void fail(std::string const& pointer, std::string const& message) const;

 private:
  Json root_;
  std::string source_;
  std::map<std::string, SourcePosition> positions_;
};

}  // namespace mcensus
