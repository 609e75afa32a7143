#pragma once

#include <stdexcept>
#include <string>

namespace guirise {

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& what, int line = -1)
        : std::runtime_error(line >= 0 ? "config line " + std::to_string(line) + ": " + what
                                       : "config: " + what),
          line_number(line) {}
    int line_number;
};

struct EpisodeFinished : std::logic_error {
    EpisodeFinished() : std::logic_error("episode is already finished") {}
};

struct InvalidAction : std::invalid_argument {
    explicit InvalidAction(const std::string& what) : std::invalid_argument(what) {}
};

struct UnknownToken : std::out_of_range {
    explicit UnknownToken(const std::string& what) : std::out_of_range(what) {}
};

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct PolicyUnavailable : std::runtime_error {
    explicit PolicyUnavailable(const std::string& what) : std::runtime_error(what) {}
};

struct RemoteUnreachable : std::runtime_error {
    explicit RemoteUnreachable(const std::string& what) : std::runtime_error(what) {}
};

struct MalformedResponse : std::runtime_error {
    explicit MalformedResponse(const std::string& what) : std::runtime_error(what) {}
};

struct LabelParseFailure : std::runtime_error {
    explicit LabelParseFailure(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyReport : std::runtime_error {
    EmptyReport() : std::runtime_error("metric report has no rows") {}
};

} // namespace guirise
