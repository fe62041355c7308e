#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bdcutoff {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A family or operation parameter is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input data outside the mathematical domain (nonpositive mass, negative weight).
class DomainError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class InfeasibleStateError : public Error {
public:
    InfeasibleStateError(std::size_t index, const std::string& what)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// A transition needed by the computation has probability zero.
// The cut edge is (edge, edge + 1).
class NonErgodicError : public Error {
public:
    NonErgodicError(std::size_t edge, const std::string& what)
        : Error(what), edge_(edge) {}
    std::size_t edge() const noexcept { return edge_; }

private:
    std::size_t edge_;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NotMixedError : public Error {
public:
    NotMixedError(double last_tv, bool reducible, const std::string& what)
        : Error(what), last_tv_(last_tv), reducible_(reducible) {}
    double last_tv() const noexcept { return last_tv_; }
    // True when some super-diagonal entry is zero, so the horizon could never suffice.
    bool reducible() const noexcept { return reducible_; }

private:
    double last_tv_;
    bool reducible_;
};

class SamplerStallError : public Error {
public:
    SamplerStallError(std::size_t block, std::size_t tries, std::size_t accepted_before,
                      const std::string& what)
        : Error(what), block_(block), tries_(tries), accepted_before_(accepted_before) {}
    std::size_t block() const noexcept { return block_; }
    std::size_t tries() const noexcept { return tries_; }
    std::size_t accepted_before() const noexcept { return accepted_before_; }

private:
    std::size_t block_;
    std::size_t tries_;
    std::size_t accepted_before_;
};

class OracleInfeasibleError : public Error {
public:
    using Error::Error;
};

class EmptyReportError : public Error {
public:
    using Error::Error;
};

}  // namespace bdcutoff
