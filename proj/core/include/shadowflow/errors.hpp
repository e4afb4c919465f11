#pragma once

#include <stdexcept>
#include <string>

namespace shadowflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the region where a quantity is defined (chart, sign of K, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class UsageError : public Error {
public:
    using Error::Error;
};

class StiffnessError : public Error {
public:
    StiffnessError(const std::string& what, std::string state_dump)
        : Error(what), dump_(std::move(state_dump)) {}
    const std::string& state_dump() const noexcept { return dump_; }

private:
    std::string dump_;
};

class RhsError : public Error {
public:
    using Error::Error;
};

class PrecisionError : public Error {
public:
    using Error::Error;
};

class ConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace shadowflow
