#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "guirise/dataset_io.hpp"
#include "guirise/types.hpp"

namespace guirise {

// Prompt template for step-wise retrospective labeling of web-style
// trajectories. Placeholders: {_TASK}, {_ACTION}, {_THOUGHT}, {_MEMO};
// doubled braces are literal.
extern const char* const kWebLabelPromptTemplate;

// Fills the four placeholders and unescapes doubled braces.
std::string render_label_prompt(const std::string& task, const std::string& action,
                                const std::string& thought, const std::string& memo);

// Python-dict style action rendering used inside labeling prompts.
std::string render_prompt_action(const GuiAction& action);

// Transport to the labeling model.
class LabelClient {
public:
    virtual ~LabelClient() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Deterministic stand-in for the remote labeler: produces templated
// reasoning texts from the episode's hidden program, chaining each summary
// from the previous one carried inside the prompt.
class MockLabelClient : public LabelClient {
public:
    explicit MockLabelClient(const Episode& episode) : episode_(episode) {}
    std::string complete(const std::string& prompt) override;

private:
    const Episode& episode_;
    int calls_ = 0;
};

// HTTP client for the POST /v1/label protocol ({"prompt": ...} in,
// {"text": ...} out). Requests and responses are appended to the audit log
// when a path is configured.
class HttpLabelClient : public LabelClient {
public:
    explicit HttpLabelClient(std::string base_url, std::filesystem::path audit_log = {},
                             int timeout_ms = 10000);
    std::string complete(const std::string& prompt) override;

private:
    std::string base_url_;
    std::filesystem::path audit_log_;
    int timeout_ms_;
};

struct LabelerOptions {
    std::string thought; // source of the prompt's Thought line; empty by default
    int max_retries = 2; // per step, before the trajectory is rejected
};

// Labels one trajectory step by step: the step-0 prompt carries no prior
// summary, later prompts embed the previous step's summary verbatim, and
// summaries chain forward. Throws LabelParseFailure when a response misses a
// required block after the retry budget.
std::vector<PseudoLabel> label_trajectory(const Episode& episode, LabelClient& client,
                                          const LabelerOptions& options = {});

} // namespace guirise
