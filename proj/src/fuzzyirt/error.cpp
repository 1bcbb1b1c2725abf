#include "fuzzyirt/error.hpp"

namespace fzirt {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok: return "OK";
    case ErrorCode::invalid_argument: return "E_INVALID_ARGUMENT";
    case ErrorCode::duplicate_path: return "E_DUPLICATE_PATH";
    case ErrorCode::empty_row: return "E_EMPTY_ROW";
    case ErrorCode::bad_entry: return "E_BAD_ENTRY";
    case ErrorCode::incomplete_tree: return "E_INCOMPLETE_TREE";
    case ErrorCode::out_of_range_category: return "E_OUT_OF_RANGE_CATEGORY";
    case ErrorCode::nonfinite_likelihood: return "E_NONFINITE_LIKELIHOOD";
    case ErrorCode::no_convergence: return "E_NO_CONVERGENCE";
    case ErrorCode::domain_error: return "E_DOMAIN";
    case ErrorCode::negative_discriminant: return "E_NEGATIVE_DISCRIMINANT";
    case ErrorCode::all_below_threshold: return "E_ALL_BELOW_THRESHOLD";
    case ErrorCode::degenerate_outcome: return "E_DEGENERATE_OUTCOME";
    case ErrorCode::schema: return "E_SCHEMA";
    case ErrorCode::io: return "E_IO";
    case ErrorCode::empty_input: return "E_EMPTY_INPUT";
    case ErrorCode::internal: return "E_INTERNAL";
  }
  return "E_UNKNOWN";
}

}  // namespace fzirt
