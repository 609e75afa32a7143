#include "guirise/metrics.hpp"

#include <cctype>
#include <map>

#include "guirise/errors.hpp"

namespace guirise {

std::vector<std::string> op_tokens(const GuiAction& action) {
    std::string text = action.action_type + " " + action.value;
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

namespace {

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gt) {
    if (pred.empty() || gt.empty()) return pred.empty() && gt.empty() ? 1.0 : 0.0;
    std::map<std::string, int> counts;
    for (const auto& t : gt) ++counts[t];
    int common = 0;
    for (const auto& t : pred) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / pred.size();
    double recall = static_cast<double>(common) / gt.size();
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

StepMetrics step_metrics(const std::optional<GuiAction>& pred, const GuiAction& gt,
                         const std::optional<BBox>& gt_bbox) {
    StepMetrics m;
    if (!pred) return m;
    if (gt_bbox)
        m.ele_acc = pred->position && gt_bbox->contains(*pred->position) ? 1.0 : 0.0;
    else
        m.ele_acc = pred->action_type == gt.action_type ? 1.0 : 0.0;
    m.op_f1 = token_f1(op_tokens(*pred), op_tokens(gt));
    m.step_sr = m.ele_acc == 1.0 && m.op_f1 == 1.0 ? 1.0 : 0.0;
    return m;
}

double action_accuracy(const std::optional<GuiAction>& pred, const GuiAction& gt,
                       const std::optional<BBox>& gt_bbox) {
    if (!pred) return 0.0;
    if (pred->action_type != gt.action_type) return 0.0;
    if (gt_bbox) return pred->position && gt_bbox->contains(*pred->position) ? 1.0 : 0.0;
    return 1.0;
}

Report aggregate(const std::vector<ReportRow>& rows) {
    if (rows.empty()) throw EmptyReport();
    std::vector<std::string> order;
    std::map<std::string, SplitSummary> by_split;
    for (const auto& row : rows) {
        auto it = by_split.find(row.split);
        if (it == by_split.end()) {
            order.push_back(row.split);
            it = by_split.emplace(row.split, SplitSummary{row.split}).first;
        }
        SplitSummary& s = it->second;
        ++s.steps;
        s.ele_acc += row.metrics.ele_acc;
        s.op_f1 += row.metrics.op_f1;
        s.step_sr += row.metrics.step_sr;
        s.action_acc += row.action_acc;
    }
    Report report;
    for (const auto& name : order) {
        SplitSummary s = by_split[name];
        s.ele_acc /= s.steps;
        s.op_f1 /= s.steps;
        s.step_sr /= s.steps;
        s.action_acc /= s.steps;
        report.splits.push_back(s);
    }
    SplitSummary& o = report.overall;
    o.split = "Overall";
    for (const auto& s : report.splits) {
        o.steps += s.steps;
        o.ele_acc += s.ele_acc;
        o.op_f1 += s.op_f1;
        o.step_sr += s.step_sr;
        o.action_acc += s.action_acc;
    }
    const double n = static_cast<double>(report.splits.size());
    o.ele_acc /= n;
    o.op_f1 /= n;
    o.step_sr /= n;
    o.action_acc /= n;
    return report;
}

} // namespace guirise
