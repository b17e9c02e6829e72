#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pireg {

enum class Errc {
  invalid_argument,
  invalid_operand,
  arity_mismatch,
  root_not_on_tape,
  unsupported_activation,
  empty_architecture,
  dimension_mismatch,
  probability_out_of_range,
  empty_batch,
  missing_derivative_entry,
  missing_gradient_entry,
  shape_mismatch,
  instability_detected,
  empty_training_rows,
  insufficient_points,
  io_error,
  format_error,
  version_mismatch,
  zero_denominator,
  diverged,
  all_trials_diverged,
  slice_outside_domain,
  config_error,
  missing_checkpoint,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace pireg
