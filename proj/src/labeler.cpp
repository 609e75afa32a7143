#include "guirise/labeler.hpp"

#include <fstream>
#include <httplib.h>
#include <json.hpp>

#include "guirise/errors.hpp"
#include "guirise/grammar.hpp"
#include "guirise/sim.hpp"
#include "guirise/util.hpp"

namespace guirise {

const char* const kWebLabelPromptTemplate =
    R"(You are an AI assistant designed to simulate the model's reasoning process before executing a given action in a gui navigation task.  Given the task instruction, current screenshot, the previous history summary, the current action to be executed and thought, generate a rigorous chain of thought. You must strictly follow these reasoning steps:
(1) Progress Estimation: Interface Comprehension and Progress Estimation
(2) Decision Reasoning: Strategy Formulation
(3) History Summary: Update the history summary according the action you executed

### Output format:
<Progress Estimation>
... (one or two sentence)
</Progress Estimation>
<Decision Reasoning>
... (one or two sentence)
</Decision Reasoning>
<History Summary>
... (one or two sentence)
</History Summary>

###Example Input & Output
Input:
Task Instruction: Find all events taking place in New York City during the month of September.
Current Action: {{'action': CLICK, 'value': 'Apply', 'position':[0.3, 0.66]}}
Previous History Summary: The user first changed the location to New York, then set the start date to September 1, and set the end data to September 30.
Output:
<Progress Estimation>
The user has successfully set the location to New York and selected the date range for September 1-30, but the events displayed are still for March, indicating the need to apply the date filter.
</Progress Estimation>
<Decision Reasoning>
Clicking the 'Apply' button will confirm the selected date range (September 1-30) and refresh the event listings to show only those occurring in New York City during September.
</Decision Reasoning>
<History Summary>
The user changed the location to New York, set the date range to September 1-30, and applied the filters to update the event listings.
</History Summary>

###Input
Task Instruction: {_TASK}
Current Action: {_ACTION}
Thought: {_THOUGHT}
Previous History Summary: {_MEMO}
)";

std::string render_label_prompt(const std::string& task, const std::string& action,
                                const std::string& thought, const std::string& memo) {
    const std::string_view tpl = kWebLabelPromptTemplate;
    std::string out;
    out.reserve(tpl.size() + task.size() + action.size() + thought.size() + memo.size());
    for (size_t i = 0; i < tpl.size();) {
        char c = tpl[i];
        if (c == '{' && i + 1 < tpl.size() && tpl[i + 1] == '{') {
            out += '{';
            i += 2;
        } else if (c == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
            out += '}';
            i += 2;
        } else if (c == '{') {
            size_t e = tpl.find('}', i);
            std::string_view key = tpl.substr(i + 1, e - i - 1);
            if (key == "_TASK") out += task;
            else if (key == "_ACTION") out += action;
            else if (key == "_THOUGHT") out += thought;
            else if (key == "_MEMO") out += memo;
            i = e + 1;
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

std::string render_prompt_action(const GuiAction& action) {
    std::string out = "{'action': " + action.action_type + ", 'value': '" + action.value + "'";
    if (action.position)
        out += ", 'position':[" + format_coord(action.position->x) + ", " +
               format_coord(action.position->y) + "]";
    else
        out += ", 'position':None";
    out += "}";
    return out;
}

std::string MockLabelClient::complete(const std::string& prompt) {
    int t = calls_++;
    // Chain from the summary carried inside the prompt, as a real labeler would.
    std::string memo;
    const std::string marker = "Previous History Summary: ";
    size_t pos = prompt.rfind(marker);
    if (pos != std::string::npos) {
        size_t b = pos + marker.size();
        size_t e = prompt.find('\n', b);
        memo = prompt.substr(b, e == std::string::npos ? std::string::npos : e - b);
    }
    TurnTexts texts = sim_turn_texts(episode_, t, memo);
    std::string out;
    out += "<Progress Estimation>\n" + texts.progress + "\n</Progress Estimation>\n";
    out += "<Decision Reasoning>\n" + texts.decision + "\n</Decision Reasoning>\n";
    out += "<History Summary>\n" + texts.summary + "\n</History Summary>\n";
    return out;
}

HttpLabelClient::HttpLabelClient(std::string base_url, std::filesystem::path audit_log,
                                 int timeout_ms)
    : base_url_(std::move(base_url)), audit_log_(std::move(audit_log)), timeout_ms_(timeout_ms) {}

std::string HttpLabelClient::complete(const std::string& prompt) {
    httplib::Client cli(base_url_);
    cli.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
    nlohmann::ordered_json req;
    req["prompt"] = prompt;
    auto res = cli.Post("/v1/label", req.dump(), "application/json");
    if (!res) throw RemoteUnreachable("POST " + base_url_ + "/v1/label failed");
    if (res->status != 200)
        throw RemoteUnreachable("label endpoint returned status " + std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("text") || !j["text"].is_string())
        throw MalformedResponse("label response is not {\"text\": ...}");
    std::string text = j["text"].get<std::string>();
    if (!audit_log_.empty()) {
        std::ofstream log(audit_log_, std::ios::app);
        nlohmann::ordered_json row;
        row["prompt"] = prompt;
        row["text"] = text;
        log << row.dump() << "\n";
    }
    return text;
}

std::vector<PseudoLabel> label_trajectory(const Episode& episode, LabelClient& client,
                                          const LabelerOptions& options) {
    std::vector<PseudoLabel> out;
    std::string prev_summary;
    for (size_t t = 0; t < episode.steps.size(); ++t) {
        const Step& step = episode.steps[t];
        // The initial step carries no prior summary.
        std::string memo = t == 0 ? "" : prev_summary;
        std::string prompt = render_label_prompt(
            episode.instruction, render_prompt_action(step.gt_action), options.thought, memo);

        std::optional<std::string> progress, decision, summary;
        for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
            std::string text = client.complete(prompt);
            progress = find_tag_block(text, kTagNames[0]);
            decision = find_tag_block(text, kTagNames[1]);
            summary = find_tag_block(text, kLabelerSummaryTag);
            if (progress && decision && summary) break;
            progress.reset();
            decision.reset();
            summary.reset();
        }
        if (!progress || !decision || !summary)
            throw LabelParseFailure("episode " + episode.episode_id + " step " + std::to_string(t) +
                                    ": labeler response missing a required block");

        PseudoLabel label;
        label.episode_id = episode.episode_id;
        label.t = static_cast<int>(t);
        label.progress = *progress;
        label.decision = *decision;
        label.summary = *summary;
        label.gt_action = step.gt_action;
        out.push_back(label);
        prev_summary = *summary;
    }
    return out;
}

} // namespace guirise
