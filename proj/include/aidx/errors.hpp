#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aidx {

/// Base error. `module_name` identifies the subsystem that raised it so the
/// CLI can print "module: cause" and map the class onto its exit code.
class Error : public std::runtime_error {
public:
    Error(std::string_view module_name, std::string_view cause)
        : std::runtime_error(std::string(module_name) + ": " + std::string(cause)),
          module_(module_name) {}

    const std::string& module_name() const { return module_; }

private:
    std::string module_;
};

/// Bad invocation: unknown flag, missing subcommand input. Exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data. Exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

/// Degenerate or infeasible computation (singular fit, empty index, ...).
/// Exit code 3.
class ComputationError : public Error {
public:
    using Error::Error;
};

}  // namespace aidx
