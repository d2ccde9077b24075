#ifndef SHIFTEQ_ERRORS_HPP
#define SHIFTEQ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace shifteq {

enum class errc {
  dimension_mismatch,
  not_square,
  label_collision,
  non_composable_factors,
  block_mismatch,
  spec_mismatch,
  non_composable,
  shape_mismatch,
  not_elementary,
  middle_mismatch,
  broken_chain,
  invalid_underlying_se,
  invalid_witness,
  not_alternating,
  odd_length,
  insufficient_depth,
  type_check_failure,
  path_space_too_large,
  invalid_input,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::not_square: return "NotSquare";
    case errc::label_collision: return "LabelCollision";
    case errc::non_composable_factors: return "NonComposableFactors";
    case errc::block_mismatch: return "BlockMismatch";
    case errc::spec_mismatch: return "SpecMismatch";
    case errc::non_composable: return "NonComposable";
    case errc::shape_mismatch: return "ShapeMismatch";
    case errc::not_elementary: return "NotElementary";
    case errc::middle_mismatch: return "MiddleMismatch";
    case errc::broken_chain: return "BrokenChain";
    case errc::invalid_underlying_se: return "InvalidUnderlyingSE";
    case errc::invalid_witness: return "InvalidWitness";
    case errc::not_alternating: return "NotAlternating";
    case errc::odd_length: return "OddLength";
    case errc::insufficient_depth: return "InsufficientDepth";
    case errc::type_check_failure: return "TypeCheckFailure";
    case errc::path_space_too_large: return "PathSpaceTooLarge";
    case errc::invalid_input: return "InvalidInput";
  }
  return "UnknownError";
}

/// All library failures surface as this exception; `code()` names the
/// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace shifteq

#endif
