#ifndef FPVOLSEG_ERROR_HPP
#define FPVOLSEG_ERROR_HPP

#include <stdexcept>

namespace fpvolseg {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- file / external data problems; the CLI maps these to exit code 2 ----

class DataError : public Error {
public:
    using Error::Error;
};

// Unrecognized file magic or header.
class FormatError : public DataError {
public:
    using DataError::DataError;
};

// File recognized but internally inconsistent.
class CorruptFileError : public DataError {
public:
    using DataError::DataError;
};

// Underlying read/write failure.
class IoError : public DataError {
public:
    using DataError::DataError;
};

// ---- in-process contract violations; the CLI maps these to exit code 3 ----

class ContractError : public Error {
public:
    using Error::Error;
};

class DimensionError : public ContractError {
public:
    using ContractError::ContractError;
};

class KindError : public ContractError {
public:
    using ContractError::ContractError;
};

class ParameterError : public ContractError {
public:
    using ContractError::ContractError;
};

class ValueError : public ContractError {
public:
    using ContractError::ContractError;
};

class RangeError : public ContractError {
public:
    using ContractError::ContractError;
};

class BoundsError : public ContractError {
public:
    using ContractError::ContractError;
};

class CoverageError : public ContractError {
public:
    using ContractError::ContractError;
};

class NumericError : public ContractError {
public:
    using ContractError::ContractError;
};

class CapacityError : public ContractError {
public:
    using ContractError::ContractError;
};

class PlacementError : public ContractError {
public:
    using ContractError::ContractError;
};

} // namespace fpvolseg

#endif
