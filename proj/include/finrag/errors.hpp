#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace finrag {

// Base of everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent input data. CLI maps these to exit code 2.
struct DataError : Error {
    using Error::Error;
};

// A remote dependency (LLM endpoint, embedding service, cross-encoder) failed.
// CLI maps these to exit code 3.
struct BackendError : Error {
    using Error::Error;
};

// corpus
struct MissingField final : DataError { using DataError::DataError; };
struct NonRectangularTable final : DataError { using DataError::DataError; };
struct DuplicateReportKey final : DataError { using DataError::DataError; };
struct UnparseableId final : DataError { using DataError::DataError; };
struct MissingQuestion final : DataError { using DataError::DataError; };
struct EmptyPage final : DataError { using DataError::DataError; };

// sparse_index
struct DuplicateDocId final : DataError { using DataError::DataError; };

// primary retrieval
struct AmbiguousQuery final : DataError { using DataError::DataError; };
struct NoSuchReport final : DataError { using DataError::DataError; };
struct EmptyReport final : DataError { using DataError::DataError; };

// negative mining
struct NoNegativeCandidates final : DataError { using DataError::DataError; };
struct DuplicatePair final : DataError { using DataError::DataError; };

// program DSL
struct ParseError final : DataError { using DataError::DataError; };
struct UnknownOperator final : DataError { using DataError::DataError; };
struct BadBackReference final : DataError { using DataError::DataError; };
struct DivideByZero final : DataError { using DataError::DataError; };

// reader
struct ChainParseFailure final : DataError { using DataError::DataError; };

// eval
struct EmptyGold final : DataError { using DataError::DataError; };
struct MissingGoldPage final : DataError { using DataError::DataError; };

// io
struct IoError final : DataError { using DataError::DataError; };

// gateway / remote scorers
struct LlmUnavailable final : BackendError {
    explicit LlmUnavailable(const std::string& msg, std::string digest = "")
        : BackendError(msg), request_digest(std::move(digest)) {}
    std::string request_digest;
};

struct HttpError final : BackendError {
    HttpError(int status_code, const std::string& msg)
        : BackendError(msg), status(status_code) {}
    int status;
};

struct RateLimited final : BackendError { using BackendError::BackendError; };
struct EmbedderUnavailable final : BackendError { using BackendError::BackendError; };
struct DimensionMismatch final : BackendError { using BackendError::BackendError; };

// A relevance scorer failed mid-batch. `partial` holds the (unit_id, score)
// pairs completed before the failure so a caller can resume.
struct ScorerUnavailable final : BackendError {
    ScorerUnavailable(const std::string& msg, std::string failing_unit_id = "",
                      std::vector<std::pair<std::string, double>> partial_scores = {})
        : BackendError(msg),
          unit_id(std::move(failing_unit_id)),
          partial(std::move(partial_scores)) {}
    std::string unit_id;
    std::vector<std::pair<std::string, double>> partial;
};

}  // namespace finrag
