#ifndef DCOLOR_ERRORS_HPP
#define DCOLOR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dcolor {

// Base class for all engine errors. Every error carries a human-readable
// message; stage-level errors additionally carry the offending node/cluster
// ids in the message text.
struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

// --- instance / io ---
struct ParseError : EngineError {
    explicit ParseError(const std::string& m) : EngineError("ParseError: " + m) {}
};
struct PaletteTooSmall : EngineError {
    explicit PaletteTooSmall(const std::string& m) : EngineError("PaletteTooSmall: " + m) {}
};

// --- mpc runtime ---
struct SpaceExceeded : EngineError {
    explicit SpaceExceeded(const std::string& m) : EngineError("SpaceExceeded: " + m) {}
};
struct BallTooLarge : EngineError {
    explicit BallTooLarge(const std::string& m) : EngineError("BallTooLarge: " + m) {}
};
struct RoundCapExceeded : EngineError {
    explicit RoundCapExceeded(const std::string& m) : EngineError("RoundCapExceeded: " + m) {}
};

// --- derandomization toolkit ---
struct BadFieldWidth : EngineError {
    explicit BadFieldWidth(const std::string& m) : EngineError("BadFieldWidth: " + m) {}
};
struct TooLargeToEnumerate : EngineError {
    explicit TooLargeToEnumerate(const std::string& m)
        : EngineError("TooLargeToEnumerate: " + m) {}
};
struct ExpectationNotBelowOne : EngineError {
    explicit ExpectationNotBelowOne(const std::string& m)
        : EngineError("ExpectationNotBelowOne: " + m) {}
};
struct NoTableFound : EngineError {
    explicit NoTableFound(const std::string& m) : EngineError("NoTableFound: " + m) {}
};

// --- stages / pipeline ---
struct StageFailed : EngineError {
    explicit StageFailed(const std::string& m) : EngineError("StageFailed: " + m) {}
};
struct ContentionHypothesisViolated : EngineError {
    explicit ContentionHypothesisViolated(const std::string& m)
        : EngineError("ContentionHypothesisViolated: " + m) {}
};
struct InvariantViolated : EngineError {
    explicit InvariantViolated(const std::string& m)
        : EngineError("InvariantViolated: " + m) {}
};

}  // namespace dcolor

#endif
