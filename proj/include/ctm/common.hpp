#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ctm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; the message carries the file and line number.
class ParseError : public Error {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyCorpusError : public Error {
public:
    using Error::Error;
};

class NotPositiveDefiniteError : public Error {
public:
    NotPositiveDefiniteError(Eigen::Index pivot, double value)
        : Error("matrix is not positive definite: pivot " + std::to_string(pivot) +
                " has value " + std::to_string(value)),
          pivot_(pivot) {}
    Eigen::Index pivot() const noexcept { return pivot_; }

private:
    Eigen::Index pivot_;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

} // namespace ctm
