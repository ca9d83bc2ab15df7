// errors.hpp -- exception types shared across the pipeline.

#ifndef NORQ_ERRORS_HPP_
#define NORQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace norq {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// corpus
struct MalformedDocument : Error { using Error::Error; };

// lexicon
struct EmptyText : Error { using Error::Error; };
struct BadWordList : Error { using Error::Error; };

// elicitor
struct BackendUnavailable : Error { using Error::Error; };

// measures
struct AllErrored : Error { using Error::Error; };
struct EmptyQuarter : Error { using Error::Error; };

// panel
struct MissingPrice : Error { using Error::Error; };
struct TooFewForecasts : Error { using Error::Error; };
struct InsufficientWindow : Error { using Error::Error; };
struct BadInputFile : Error { using Error::Error; };

// econostats
struct SingularDesign : Error { using Error::Error; };
struct TooFewClusters : Error { using Error::Error; };
struct Separation : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct DegenerateGroup : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct CoverageGap : Error { using Error::Error; };

// cli
struct ConfigError : Error { using Error::Error; };

}  // namespace norq

#endif  // NORQ_ERRORS_HPP_
