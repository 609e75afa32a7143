#include "guirise/dataset_io.hpp"

#include <fstream>
#include <json.hpp>

#include "guirise/errors.hpp"

namespace guirise {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchemaHeader = "#schema=1";

ordered_json action_to_json(const GuiAction& a) {
    ordered_json j;
    j["action_type"] = a.action_type;
    j["value"] = a.value;
    if (a.position) j["position"] = {a.position->x, a.position->y};
    return j;
}

GuiAction action_from_json(const ordered_json& j) {
    GuiAction a;
    a.action_type = j.at("action_type").get<std::string>();
    a.value = j.at("value").get<std::string>();
    if (j.contains("position") && !j["position"].is_null())
        a.position = Vec2{j["position"][0].get<double>(), j["position"][1].get<double>()};
    return a;
}

std::ifstream open_with_header(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string header;
    std::getline(in, header);
    if (header != kSchemaHeader)
        throw std::runtime_error(path.string() + ": expected '" + kSchemaHeader + "' header, got '" +
                                 header + "'");
    return in;
}

} // namespace

std::string episode_to_json(const Episode& episode) {
    ordered_json j;
    j["episode_id"] = episode.episode_id;
    j["instruction"] = episode.instruction;
    j["steps"] = ordered_json::array();
    for (const Step& s : episode.steps) {
        ordered_json js;
        js["index"] = s.index;
        ordered_json jo;
        jo["width"] = s.observation.width;
        jo["height"] = s.observation.height;
        jo["elements"] = ordered_json::array();
        for (const UiElement& el : s.observation.elements) {
            ordered_json je;
            je["element_id"] = el.element_id;
            je["bbox"] = {el.bbox.x1, el.bbox.y1, el.bbox.x2, el.bbox.y2};
            je["label"] = el.label;
            je["kind"] = to_string(el.kind);
            jo["elements"].push_back(std::move(je));
        }
        if (s.observation.screen_ref) jo["screen_ref"] = *s.observation.screen_ref;
        js["observation"] = std::move(jo);
        js["gt_action"] = action_to_json(s.gt_action);
        if (s.gt_bbox)
            js["gt_bbox"] = {s.gt_bbox->x1, s.gt_bbox->y1, s.gt_bbox->x2, s.gt_bbox->y2};
        j["steps"].push_back(std::move(js));
    }
    return j.dump();
}

Episode episode_from_json(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    Episode e;
    e.episode_id = j.at("episode_id").get<std::string>();
    e.instruction = j.at("instruction").get<std::string>();
    for (const auto& js : j.at("steps")) {
        Step s;
        s.index = js.at("index").get<int>();
        const auto& jo = js.at("observation");
        s.observation.width = jo.at("width").get<int>();
        s.observation.height = jo.at("height").get<int>();
        for (const auto& je : jo.at("elements")) {
            UiElement el;
            el.element_id = je.at("element_id").get<std::string>();
            el.bbox = {je.at("bbox")[0].get<double>(), je.at("bbox")[1].get<double>(),
                       je.at("bbox")[2].get<double>(), je.at("bbox")[3].get<double>()};
            el.label = je.at("label").get<std::string>();
            auto kind = element_kind_from_string(je.at("kind").get<std::string>());
            if (!kind) throw std::runtime_error("unknown element kind in dataset");
            el.kind = *kind;
            s.observation.elements.push_back(std::move(el));
        }
        if (jo.contains("screen_ref")) s.observation.screen_ref = jo["screen_ref"].get<std::string>();
        s.gt_action = action_from_json(js.at("gt_action"));
        if (js.contains("gt_bbox"))
            s.gt_bbox = BBox{js["gt_bbox"][0].get<double>(), js["gt_bbox"][1].get<double>(),
                             js["gt_bbox"][2].get<double>(), js["gt_bbox"][3].get<double>()};
        e.steps.push_back(std::move(s));
    }
    return e;
}

void save_episodes(const std::filesystem::path& path, const std::vector<Episode>& episodes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kSchemaHeader << "\n";
    for (const Episode& e : episodes) out << episode_to_json(e) << "\n";
}

std::vector<Episode> load_episodes(const std::filesystem::path& path) {
    std::ifstream in = open_with_header(path);
    std::vector<Episode> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(episode_from_json(line));
    }
    return out;
}

std::string label_to_json(const PseudoLabel& label) {
    ordered_json j;
    j["episode_id"] = label.episode_id;
    j["t"] = label.t;
    j["progress"] = label.progress;
    j["decision"] = label.decision;
    j["summary"] = label.summary;
    j["gt_action"] = action_to_json(label.gt_action);
    return j.dump();
}

PseudoLabel label_from_json(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    PseudoLabel l;
    l.episode_id = j.at("episode_id").get<std::string>();
    l.t = j.at("t").get<int>();
    l.progress = j.at("progress").get<std::string>();
    l.decision = j.at("decision").get<std::string>();
    l.summary = j.at("summary").get<std::string>();
    l.gt_action = action_from_json(j.at("gt_action"));
    return l;
}

void save_labels(const std::filesystem::path& path, const std::vector<PseudoLabel>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kSchemaHeader << "\n";
    for (const PseudoLabel& l : labels) out << label_to_json(l) << "\n";
}

std::vector<PseudoLabel> load_labels(const std::filesystem::path& path) {
    std::ifstream in = open_with_header(path);
    std::vector<PseudoLabel> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(label_from_json(line));
    }
    return out;
}

} // namespace guirise
