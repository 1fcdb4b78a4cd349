#include "core/error.hpp"

namespace webprf {

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what) {}

}  // namespace webprf
