#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spikekern {

#ifdef SPIKEKERN_REAL_FLOAT
using Real = float;
#else
using Real = double;
#endif

/// Row/column index type. Matches the u32 fields of the CSR file format.
using Index = std::uint32_t;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed parameters, configs or files.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An allocation guard (dense size, materialized nnz) would be exceeded.
class SizeGuardError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Two projections share a synapse state but disagree on its parameters.
class MergeContractError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf in a simulation or a singular/divergent solve.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A functional check inside a benchmark or CLI run failed.
class CheckFailure : public Error {
public:
    using Error::Error;
};

inline void require_same_size(std::size_t got, std::size_t want, const char* what)
{
    if (got != want) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(got) +
                             ", expected " + std::to_string(want));
    }
}

}  // namespace spikekern
