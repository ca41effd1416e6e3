#pragma once

#include <stdexcept>
#include <string>

namespace memfir {

// Argument outside an operation's domain (bad parameters, length mismatch).
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Value outside a physically allowed window (read range, tunable range).
class RangeError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

// Current sweep would need more than the compliance voltage.
class ComplianceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Probe or stimulus would clip the ADC.
class SaturationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A measurement cannot be formed (degenerate fit, no -3 dB crossing).
class MetricError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A model contract was broken at run time (drive bound, read disturb).
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

} // namespace memfir
