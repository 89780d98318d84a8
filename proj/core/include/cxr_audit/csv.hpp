#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cxr_audit::csv {

// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
// Returns nullopt on an unterminated quote or stray characters after a quote.
std::optional<std::vector<std::string>> split_record(std::string_view line);

// Quotes a field when it contains a comma, quote, or newline.
std::string escape_field(std::string_view field);

std::string join_record(const std::vector<std::string>& fields);

/// Line-oriented reader that tracks the 1-based line number and strips CR.
class line_reader {
 public:
  explicit line_reader(std::istream& in) : in_(in) {}

  // Next line, or nullopt at end of stream.
  std::optional<std::string> next();
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Strict numeric parses: the whole field must be consumed.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Empty, "nan", "NaN" and "NAN" mark a missing coordinate.
bool is_missing_number(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace cxr_audit::csv
