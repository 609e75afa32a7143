#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "guirise/grammar.hpp"
#include "guirise/grpo.hpp"
#include "guirise/metrics.hpp"
#include "guirise/rewards.hpp"
#include "guirise/sim.hpp"
#include "guirise/tokenizer.hpp"

namespace py = pybind11;
using namespace guirise;

namespace {

ActionVocab vocab_from_name(const std::string& name) {
    auto v = ActionVocab::preset(name);
    if (!v) throw py::value_error("unknown action vocabulary '" + name + "'");
    return *v;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Reasoning-enhanced GUI navigation training engine";

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y);

    py::class_<BBox>(m, "BBox")
        .def(py::init<double, double, double, double>(), py::arg("x1"), py::arg("y1"),
             py::arg("x2"), py::arg("y2"))
        .def_readwrite("x1", &BBox::x1)
        .def_readwrite("y1", &BBox::y1)
        .def_readwrite("x2", &BBox::x2)
        .def_readwrite("y2", &BBox::y2)
        .def("contains", &BBox::contains)
        .def("center", &BBox::center);

    py::class_<GuiAction>(m, "GuiAction")
        .def(py::init([](const std::string& type, const std::string& value,
                         std::optional<Vec2> position) {
                 return GuiAction{type, value, position};
             }),
             py::arg("action_type"), py::arg("value"), py::arg("position") = std::nullopt)
        .def_readwrite("action_type", &GuiAction::action_type)
        .def_readwrite("value", &GuiAction::value)
        .def_readwrite("position", &GuiAction::position);

    py::class_<UiElement>(m, "UiElement")
        .def_readonly("element_id", &UiElement::element_id)
        .def_readonly("bbox", &UiElement::bbox)
        .def_readonly("label", &UiElement::label)
        .def_property_readonly("kind",
                               [](const UiElement& e) { return std::string(to_string(e.kind)); });

    py::class_<Observation>(m, "Observation")
        .def_readonly("width", &Observation::width)
        .def_readonly("height", &Observation::height)
        .def_readonly("elements", &Observation::elements);

    py::class_<Step>(m, "Step")
        .def_readonly("index", &Step::index)
        .def_readonly("observation", &Step::observation)
        .def_readonly("gt_action", &Step::gt_action)
        .def_readonly("gt_bbox", &Step::gt_bbox);

    py::class_<Episode>(m, "Episode")
        .def_readonly("episode_id", &Episode::episode_id)
        .def_readonly("instruction", &Episode::instruction)
        .def_readonly("steps", &Episode::steps);

    py::class_<AgentTurn>(m, "AgentTurn")
        .def_readonly("raw_text", &AgentTurn::raw_text)
        .def_readonly("progress_estimation", &AgentTurn::progress_estimation)
        .def_readonly("decision_reasoning", &AgentTurn::decision_reasoning)
        .def_readonly("action_text", &AgentTurn::action_text)
        .def_readonly("parsed_action", &AgentTurn::parsed_action)
        .def_readonly("history_summary", &AgentTurn::history_summary)
        .def_readonly("tags_ok", &AgentTurn::tags_ok);

    py::class_<RewardConfig>(m, "RewardConfig")
        .def(py::init<>())
        .def_readwrite("lambda_a", &RewardConfig::lambda_a)
        .def_readwrite("lambda_h", &RewardConfig::lambda_h)
        .def_readwrite("lambda_type", &RewardConfig::lambda_type)
        .def_readwrite("lambda_pos", &RewardConfig::lambda_pos)
        .def_readwrite("k_rollouts", &RewardConfig::k_rollouts)
        .def_readwrite("advantage_epsilon", &RewardConfig::advantage_epsilon);

    m.def("check_tags", [](const std::string& text) { return check_tags(text); },
          "True iff the text is exactly the four tagged blocks in the fixed order");

    m.def(
        "parse_action",
        [](const std::string& text, const std::string& vocab) {
            auto result = parse_action(text, vocab_from_name(vocab));
            return py::make_tuple(result.action, std::string(to_string(result.error)),
                                  result.detail);
        },
        py::arg("text"), py::arg("vocab") = "sim",
        "Parse an action record; returns (action or None, error name, detail)");

    m.def(
        "parse_turn",
        [](const std::string& text, const std::string& vocab) {
            return parse_turn(text, vocab_from_name(vocab));
        },
        py::arg("text"), py::arg("vocab") = "sim");

    m.def(
        "serialize_turn",
        [](const std::string& progress, const std::string& decision, const GuiAction& action,
           const std::string& summary, const std::string& vocab) {
            return serialize_turn(progress, decision, action, summary, vocab_from_name(vocab));
        },
        py::arg("progress"), py::arg("decision"), py::arg("action"), py::arg("summary"),
        py::arg("vocab") = "sim");

    m.def("serialize_action", &serialize_action);

    m.def("format_reward", &format_reward);
    m.def(
        "action_component_rewards",
        [](const AgentTurn& turn, const GuiAction& gt, std::optional<BBox> gt_bbox) {
            auto c = action_component_rewards(turn, gt, gt_bbox);
            return py::make_tuple(c.r_af, c.r_type, c.r_pos);
        },
        py::arg("turn"), py::arg("gt"), py::arg("gt_bbox") = std::nullopt);
    m.def(
        "action_reward",
        [](double r_af, double r_type, double r_pos, const RewardConfig& cfg) {
            return action_reward({r_af, r_type, r_pos}, cfg);
        },
        py::arg("r_af"), py::arg("r_type"), py::arg("r_pos"), py::arg("cfg") = RewardConfig{});
    m.def("total_reward", &total_reward, py::arg("r_f"), py::arg("r_a"), py::arg("r_h"),
          py::arg("cfg") = RewardConfig{});

    m.def("compute_advantages", &compute_advantages, py::arg("rewards"),
          py::arg("epsilon") = 1e-8);

    m.def(
        "generate_dataset",
        [](const std::string& family, int rows, int cols, int length, int value_vocab,
           uint64_t seed, int episodes) {
            SimConfig cfg;
            auto fam = task_family_from_string(family);
            if (!fam) throw py::value_error("unknown task family '" + family + "'");
            cfg.task_family = *fam;
            cfg.rows = rows;
            cfg.cols = cols;
            cfg.episode_length_min = length;
            cfg.episode_length_max = length;
            cfg.value_vocab_size = value_vocab;
            cfg.rng_seed = seed;
            return generate_dataset(cfg, episodes);
        },
        py::arg("family") = "click-sequence", py::arg("rows") = 4, py::arg("cols") = 4,
        py::arg("length") = 3, py::arg("value_vocab") = 16, py::arg("seed") = 0,
        py::arg("episodes") = 1);

    m.def("validate_episode",
          [](const Episode& ep) { return validate_episode(ep, sim_action_vocab()); });

    m.def(
        "step_metrics",
        [](std::optional<GuiAction> pred, const GuiAction& gt, std::optional<BBox> gt_bbox) {
            auto sm = step_metrics(pred, gt, gt_bbox);
            return py::make_tuple(sm.ele_acc, sm.op_f1, sm.step_sr);
        },
        py::arg("pred"), py::arg("gt"), py::arg("gt_bbox") = std::nullopt);
    m.def("action_accuracy", &action_accuracy, py::arg("pred"), py::arg("gt"),
          py::arg("gt_bbox") = std::nullopt);
}
