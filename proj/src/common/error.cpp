#include "pireg/error.hpp"

namespace pireg {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invalid_operand: return "invalid_operand";
    case Errc::arity_mismatch: return "arity_mismatch";
    case Errc::root_not_on_tape: return "root_not_on_tape";
    case Errc::unsupported_activation: return "unsupported_activation";
    case Errc::empty_architecture: return "empty_architecture";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::probability_out_of_range: return "probability_out_of_range";
    case Errc::empty_batch: return "empty_batch";
    case Errc::missing_derivative_entry: return "missing_derivative_entry";
    case Errc::missing_gradient_entry: return "missing_gradient_entry";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::instability_detected: return "instability_detected";
    case Errc::empty_training_rows: return "empty_training_rows";
    case Errc::insufficient_points: return "insufficient_points";
    case Errc::io_error: return "io_error";
    case Errc::format_error: return "format_error";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::zero_denominator: return "zero_denominator";
    case Errc::diverged: return "diverged";
    case Errc::all_trials_diverged: return "all_trials_diverged";
    case Errc::slice_outside_domain: return "slice_outside_domain";
    case Errc::config_error: return "config_error";
    case Errc::missing_checkpoint: return "missing_checkpoint";
  }
  return "unknown";
}

}  // namespace pireg
