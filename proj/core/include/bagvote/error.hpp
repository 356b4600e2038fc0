#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bagvote {

enum class Errc {
  kSchema,            // missing or conflicting CSV columns
  kParse,             // malformed or non-finite cell
  kValidation,        // duplicate ids, bad shapes, bad matrix properties
  kDegenerateColumn,  // constant descriptor column
  kSize,              // counts outside the allowed range
  kDimension,         // vector length mismatch
  kIllConditioned,    // factorization failed
  kPartition,         // fold count vs. instance count
  kCoverage,          // instance with no prediction records
  kCapability,        // requested data that was not recorded
  kSampleSize,        // too few samples for a mixture
  kConsistency,       // inputs built from different datasets/plans
  kRange,             // argument outside its domain
  kConfig,            // bad run configuration
  kIo,                // file system failure
};

std::string_view to_string(Errc code);

// Process exit status for an error: 2 config, 3 data, 4 numeric failure.
int exit_code(Errc code);

// Every failure raised by the library. `module()` names the component that
// detected the problem so CLI messages can point at it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string module, const std::string& message);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  Errc code_;
  std::string module_;
};

}  // namespace bagvote
