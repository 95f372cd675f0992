#pragma once

#include <stdexcept>
#include <string>

namespace idashaper {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mass matrix numerically singular at a queried configuration.
class SingularMassError : public Error {
public:
    using Error::Error;
};

/// Operation needs the unactuated-coordinate index k but the system was
/// built with a general annihilator.
class MissingIndexError : public Error {
public:
    using Error::Error;
};

/// Input-map normal matrix G^T G is ill-conditioned.
class SingularInputMapError : public Error {
public:
    using Error::Error;
};

/// Rank-deficient algebraic system whose least-squares residual exceeds
/// the consistency tolerance.
class InconsistentSystemError : public Error {
public:
    using Error::Error;
};

/// gamma^(k) vanishes somewhere on the requested solution domain.
class GammaZeroError : public Error {
public:
    using Error::Error;
};

/// Sign requirement on det M_d^{-1} = lambda*exp(phi1*F) violated.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// Requested domain contains a point where the construction degenerates
/// (for example a zero crossing of the leading ODE coefficient).
class DomainTruncationError : public Error {
public:
    using Error::Error;
};

/// Scenario file malformed or schema-incompatible.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Error from a named pipeline stage; message is prefixed with the stage tag.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace idashaper
