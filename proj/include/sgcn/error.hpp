#ifndef SGCN_ERROR_HPP
#define SGCN_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgcn {

/// Bad argument to a library call (out-of-range id, invalid fraction, ...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Matrix or vector dimensions do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation called in a configuration that does not support it.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed input line. `line()` is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A rating of exactly zero carries no sign.
class InvalidRatingError : public ParseError {
public:
    using ParseError::ParseError;
};

class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int epoch, const std::string& what)
        : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// Classifier input has a single class.
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Metric is undefined for the given labels (e.g. AUC with one class).
class UndefinedMetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sgcn

#endif // SGCN_ERROR_HPP
