#pragma once

#include <stdexcept>
#include <string>

namespace r2m {

// Misuse of an API contract (bad argument, call out of order).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Shape/extent disagreement between tensors.
class DimensionError : public ContractError {
public:
    explicit DimensionError(const std::string& msg) : ContractError(msg) {}
};

// Non-finite values where finite ones are required.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data (files, configs).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Token or concept id outside the vocabulary.
class VocabError : public DataError {
public:
    explicit VocabError(const std::string& msg) : DataError(msg) {}
};

} // namespace r2m
