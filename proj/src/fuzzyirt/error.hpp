#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fzirt {

// Numeric values are part of the C ABI (see fuzzyirt.h) and double as CLI
// exit codes.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  duplicate_path = 2,
  empty_row = 3,
  bad_entry = 4,
  incomplete_tree = 5,
  out_of_range_category = 6,
  nonfinite_likelihood = 7,
  no_convergence = 8,
  domain_error = 9,
  negative_discriminant = 10,
  all_below_threshold = 11,
  degenerate_outcome = 12,
  schema = 13,
  io = 14,
  empty_input = 15,
  internal = 16,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fzirt
