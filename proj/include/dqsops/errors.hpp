#pragma once

#include <stdexcept>
#include <string>

namespace dqsops {

// Base of every error raised by the library. The CLI maps subclasses onto
// process exit codes (see tools/dqsops.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Data-side failures: anything wrong with the values being scored.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptySample : public DataError {
public:
    using DataError::DataError;
};

class InvalidDistribution : public DataError {
public:
    using DataError::DataError;
};

class LengthMismatch : public DataError {
public:
    using DataError::DataError;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class MissingMetaInformation : public DataError {
public:
    using DataError::DataError;
};

class InsufficientData : public DataError {
public:
    using DataError::DataError;
};

class DegenerateData : public DataError {
public:
    using DataError::DataError;
};

class TooFewRows : public DataError {
public:
    using DataError::DataError;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class PlanInfeasible : public Error {
public:
    using Error::Error;
};

class InsufficientTrainingData : public DataError {
public:
    using DataError::DataError;
};

class DegenerateTarget : public DataError {
public:
    using DataError::DataError;
};

class FeatureVersionMismatch : public Error {
public:
    using Error::Error;
};

class EmptyEvaluation : public DataError {
public:
    using DataError::DataError;
};

class InitializationBudgetExhausted : public Error {
public:
    InitializationBudgetExhausted(const std::string& what, double best_mae, double best_r2)
        : Error(what), best_mae_(best_mae), best_r2_(best_r2) {}
    double best_mae() const noexcept { return best_mae_; }
    double best_r2() const noexcept { return best_r2_; }

private:
    double best_mae_;
    double best_r2_;
};

}  // namespace dqsops
