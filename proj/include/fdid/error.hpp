#pragma once

#include <stdexcept>
#include <string>

namespace fdid {

enum class ErrorKind {
    Domain,
    Parse,
    NotFound,
    InvalidKernel,
    Index,
    Singular,
    NonConvergence,
    Numeric,
    Infeasible,
    Resource,
    Config,
    InvalidSupplyRate,
    InvalidWeight,
    UndefinedMetric,
};

const char* to_string(ErrorKind k) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace fdid
