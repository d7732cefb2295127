#pragma once

#include <stdexcept>

namespace mspp {

// File/format problems. The CLI maps this to exit code 3.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated numeric contracts (probabilities out of [0,1], length mismatches,
// empty inputs where the math needs data, ...). CLI exit code 4.
struct contract_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mspp
