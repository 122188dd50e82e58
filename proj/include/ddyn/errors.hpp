#pragma once

#include <stdexcept>
#include <string>

namespace ddyn {

/// Invalid model data, malformed document, or violated operation
/// precondition. CLI maps this to exit code 2.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 2;
};

/// Singular transmission topology or kinematically singular pose.
/// CLI maps this to exit code 3.
class SingularError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 3;
};

/// Numeric breakdown: a linear solve lost accuracy or produced
/// non-finite values. CLI maps this to exit code 4.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    static constexpr int exit_code = 4;
};

}  // namespace ddyn
