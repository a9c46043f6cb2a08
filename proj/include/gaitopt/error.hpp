#pragma once

#include <stdexcept>
#include <string>

namespace gaitopt {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid numeric parameter (objective count, divisions, population size...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Mismatched lengths or shapes between inputs.
class StructuralError : public Error {
public:
    using Error::Error;
};

// A decision variable outside its declared range. `field` names the offending gene.
class BoundError : public Error {
public:
    BoundError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Invalid or inconsistent configuration. `path` is the dotted key path.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// The evaluation callback failed; carries generation/index context in the message.
class EvaluationError : public Error {
public:
    using Error::Error;
};

// Not enough data for a statistical analysis.
class AnalysisError : public Error {
public:
    using Error::Error;
};

} // namespace gaitopt
