#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace wlssub {

enum class ErrorCode {
  invalid_argument,
  invalid_mesh,
  weight_domain,
  stencil_lacks_face,
  singular_system,
  ambiguous_window,
  patch_too_small,
  empty_neighborhood,
  collinear_neighborhood,
  degenerate_neighborhood,
  parse_error,
  io_error,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_mesh: return "invalid_mesh";
    case ErrorCode::weight_domain: return "weight_domain";
    case ErrorCode::stencil_lacks_face: return "stencil_lacks_face";
    case ErrorCode::singular_system: return "singular_system";
    case ErrorCode::ambiguous_window: return "ambiguous_window";
    case ErrorCode::patch_too_small: return "patch_too_small";
    case ErrorCode::empty_neighborhood: return "empty_neighborhood";
    case ErrorCode::collinear_neighborhood: return "collinear_neighborhood";
    case ErrorCode::degenerate_neighborhood: return "degenerate_neighborhood";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

/// Library error. Engine failures carry the offending vertex when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> vertex = std::nullopt)
      : std::runtime_error(format(code, message, vertex)),
        code_(code),
        message_(message),
        vertex_(vertex) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  std::optional<std::size_t> vertex() const noexcept { return vertex_; }

  /// Same error, tagged with a vertex index.
  Error at_vertex(std::size_t vertex) const { return Error(code_, message_, vertex); }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            std::optional<std::size_t> vertex) {
    std::string out(to_string(code));
    out += ": ";
    out += message;
    if (vertex) out += " (vertex " + std::to_string(*vertex) + ")";
    return out;
  }

  ErrorCode code_;
  std::string message_;
  std::optional<std::size_t> vertex_;
};

}  // namespace wlssub
