#pragma once

#include <stdexcept>
#include <string>

namespace slimnet {

/// Incompatible tensor/layer shapes. Messages name both offending shapes.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid experiment/regularizer configuration (bad field values, size
/// mismatches between a config and the network it describes).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed on-disk data (IDX files, checkpoints). Messages carry the byte
/// offset where parsing failed whenever one is known.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller broke an API contract, e.g. fed backward() activations recorded
/// for a different network.
class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structural surgery would sever the network (a layer left with no neurons).
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training diverged (non-finite or runaway loss).
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace slimnet
