#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mwsumm {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- I/O and transport ------------------------------------------------------

struct IoError : Error {
    using Error::Error;
};

struct TransportError : Error {
    using Error::Error;
};

struct NotFoundError : Error {
    using Error::Error;
};

struct RateLimitedError : Error {
    using Error::Error;
};

struct MalformedXmlError : Error {
    MalformedXmlError(const std::string& what, std::uint64_t offset)
        : Error(what + " (byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
    std::uint64_t byte_offset;
};

// -- diffing and serialization ----------------------------------------------

struct EmptyDiffError : Error {
    EmptyDiffError() : Error("diff has no removed and no added sentences") {}
};

struct MarkerCollisionError : Error {
    explicit MarkerCollisionError(const std::string& sentence)
        : Error("sentence contains a reserved marker string: " + sentence) {}
};

struct UnknownTokenizerError : Error {
    explicit UnknownTokenizerError(const std::string& name)
        : Error("unknown tokenizer: " + name) {}
};

// -- dataset assembly --------------------------------------------------------

struct InsufficientPoolError : Error {
    InsufficientPoolError(const std::string& pool, std::size_t needed,
                          std::size_t available)
        : Error("pool '" + pool + "' has " + std::to_string(available) +
                " samples, " + std::to_string(needed) + " needed"),
          pool_name(pool), needed(needed), available(available) {}
    std::string pool_name;
    std::size_t needed;
    std::size_t available;
};

// -- generation --------------------------------------------------------------

struct BadBundleError : Error {
    using Error::Error;
};

struct EmptyCompletionError : Error {
    EmptyCompletionError() : Error("endpoint returned an empty completion") {}
};

struct ContextOverflowError : Error {
    using Error::Error;
};

// -- metrics and statistics ---------------------------------------------------

struct EmptyInputError : Error {
    EmptyInputError() : Error("at least one sample is required") {}
};

struct ScorerUnavailableError : Error {
    using Error::Error;
};

struct ScoreOutOfRangeError : Error {
    ScoreOutOfRangeError(std::size_t index, double score)
        : Error("scorer returned " + std::to_string(score) + " at index " +
                std::to_string(index) + ", expected [0,1]"),
          index(index), score(score) {}
    std::size_t index;
    double score;
};

struct InvalidBallotError : Error {
    using Error::Error;
};

struct MethodMismatchError : Error {
    MethodMismatchError() : Error("rankings cover different method sets") {}
};

struct DegenerateRankingError : Error {
    DegenerateRankingError() : Error("ranking has no untied pairs") {}
};

struct KappaUndefinedError : Error {
    KappaUndefinedError() : Error("chance agreement is 1, kappa undefined") {}
};

struct NonConvergenceError : Error {
    explicit NonConvergenceError(std::size_t iterations)
        : Error("optimizer did not converge in " + std::to_string(iterations) +
                " iterations") {}
};

struct UnknownCategoryError : Error {
    explicit UnknownCategoryError(const std::string& category)
        : Error("unknown category: " + category) {}
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace mwsumm
