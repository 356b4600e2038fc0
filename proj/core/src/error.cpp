#include "bagvote/error.hpp"

#include <utility>

namespace bagvote {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kSchema: return "schema error";
    case Errc::kParse: return "parse error";
    case Errc::kValidation: return "validation error";
    case Errc::kDegenerateColumn: return "degenerate-column error";
    case Errc::kSize: return "size error";
    case Errc::kDimension: return "dimension error";
    case Errc::kIllConditioned: return "ill-conditioned error";
    case Errc::kPartition: return "partition error";
    case Errc::kCoverage: return "coverage error";
    case Errc::kCapability: return "capability error";
    case Errc::kSampleSize: return "sample-size error";
    case Errc::kConsistency: return "consistency error";
    case Errc::kRange: return "range error";
    case Errc::kConfig: return "config error";
    case Errc::kIo: return "io error";
  }
  return "error";
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::kConfig:
    case Errc::kCapability:
    case Errc::kRange:
      return 2;
    case Errc::kIllConditioned:
      return 4;
    default:
      return 3;
  }
}

Error::Error(Errc code, std::string module, const std::string& message)
    : std::runtime_error(module + ": " + std::string(to_string(code)) + ": " + message),
      code_(code),
      module_(std::move(module)) {}

}  // namespace bagvote
