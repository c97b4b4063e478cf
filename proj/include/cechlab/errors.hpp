#pragma once

#include <stdexcept>
#include <string>

namespace cechlab {

// Error taxonomy. CLI maps these onto stable exit codes:
// config/usage errors -> 2, resource caps -> 3, failed --check bands -> 4.

struct degenerate_chart_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct invalid_density_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct envelope_too_loose_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct insufficient_samples_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct insufficient_complex_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct unsupported_dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct resolution_warning_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a complex build would exceed the configured simplex cap.
struct resource_cap_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cechlab
