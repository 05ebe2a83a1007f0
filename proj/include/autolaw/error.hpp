#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autolaw {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// backend
class EndpointUnreachable : public Error { public: using Error::Error; };
class AuthFailure : public Error { public: using Error::Error; };
class RateLimited : public Error { public: using Error::Error; };
class EmptyResponse : public Error { public: using Error::Error; };
/// Replay-only cache was asked for a request it has never seen.
class ReplayMiss : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

// corpus
class SchemaMismatch : public Error { public: using Error::Error; };

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& what)
        : Error("malformed record at line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class StoreLocked : public Error { public: using Error::Error; };

// casegen
class UnparseableExtraction : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };

/// Wraps a backend failure raised inside a refinement round.
class RoundError : public Error {
public:
    RoundError(int round, const std::string& what)
        : Error("refinement round " + std::to_string(round) + ": " + what), round_(round) {}
    int round() const noexcept { return round_; }

private:
    int round_;
};

// prompts
class MissingBinding : public Error {
public:
    explicit MissingBinding(std::string name)
        : Error("missing binding for placeholder {" + name + "}"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class UnknownPlaceholder : public Error {
public:
    explicit UnknownPlaceholder(std::string name)
        : Error("binding names unknown placeholder {" + name + "}"), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// juryrank
class KTooLarge : public Error {
public:
    KTooLarge(std::size_t k, std::size_t pool)
        : Error("k=" + std::to_string(k) + " exceeds pool size " + std::to_string(pool)) {}
};

// deliberation
class EmptyCorpus : public Error { public: using Error::Error; };
class EmptyVotes : public Error { public: using Error::Error; };
class EmbeddingBackendUnavailable : public Error { public: using Error::Error; };

// metrics
class NoViolationRows : public Error { public: using Error::Error; };
class SingleClass : public Error { public: using Error::Error; };
class TooFewPools : public Error { public: using Error::Error; };

}  // namespace autolaw
