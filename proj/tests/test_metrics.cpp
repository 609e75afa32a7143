#include <doctest.h>

#include "guirise/errors.hpp"
#include "guirise/metrics.hpp"

using namespace guirise;

TEST_CASE("identical prediction scores perfectly") {
    GuiAction gt{"CLICK", "alpha", Vec2{0.5, 0.5}};
    BBox box{0.4, 0.4, 0.6, 0.6};
    auto m = step_metrics(gt, gt, box);
    CHECK(m.ele_acc == 1.0);
    CHECK(m.op_f1 == doctest::Approx(1.0));
    CHECK(m.step_sr == 1.0);
}

TEST_CASE("token-level operation F1") {
    GuiAction gt{"TYPE", "hello", Vec2{0.5, 0.5}};
    GuiAction pred{"TYPE", "hello world", Vec2{0.5, 0.5}};
    BBox box{0.4, 0.4, 0.6, 0.6};
    auto m = step_metrics(pred, gt, box);
    CHECK(m.ele_acc == 1.0);
    CHECK(m.op_f1 == doctest::Approx(0.8)); // precision 2/3, recall 1
    CHECK(m.step_sr == 0.0);

    // Case folding.
    GuiAction upper{"TYPE", "HELLO", Vec2{0.5, 0.5}};
    CHECK(step_metrics(upper, gt, box).op_f1 == doctest::Approx(1.0));
}

TEST_CASE("correct type outside the box fails grounding but not op f1") {
    GuiAction gt{"CLICK", "alpha", Vec2{0.5, 0.5}};
    GuiAction pred{"CLICK", "alpha", Vec2{0.1, 0.1}};
    BBox box{0.4, 0.4, 0.6, 0.6};
    auto m = step_metrics(pred, gt, box);
    CHECK(m.ele_acc == 0.0);
    CHECK(m.op_f1 == doctest::Approx(1.0));
    CHECK(m.step_sr == 0.0);
}

TEST_CASE("absent predictions score zero") {
    GuiAction gt{"CLICK", "alpha", Vec2{0.5, 0.5}};
    auto m = step_metrics(std::nullopt, gt, BBox{0.4, 0.4, 0.6, 0.6});
    CHECK(m.ele_acc == 0.0);
    CHECK(m.op_f1 == 0.0);
    CHECK(m.step_sr == 0.0);
    CHECK(action_accuracy(std::nullopt, gt, BBox{0.4, 0.4, 0.6, 0.6}) == 0.0);
}

TEST_CASE("non-spatial ground truth grounds on the type") {
    GuiAction gt{"PRESS_HOME", "", std::nullopt};
    auto m = step_metrics(GuiAction{"PRESS_HOME", "", std::nullopt}, gt, std::nullopt);
    CHECK(m.ele_acc == 1.0);
    CHECK(m.step_sr == 1.0);
}

TEST_CASE("action accuracy protocol") {
    SUBCASE("non-spatial type match") {
        GuiAction gt{"PRESS_HOME", "", std::nullopt};
        CHECK(action_accuracy(GuiAction{"PRESS_HOME", "", std::nullopt}, gt, std::nullopt) == 1.0);
    }
    SUBCASE("value text is not scored") {
        GuiAction gt{"CLICK", "submit", Vec2{0.5, 0.5}};
        GuiAction pred{"CLICK", "totally wrong", Vec2{0.51, 0.49}};
        CHECK(action_accuracy(pred, gt, BBox{0.4, 0.4, 0.6, 0.6}) == 1.0);
    }
    SUBCASE("scroll direction is part of the type") {
        GuiAction gt{"SCROLL_DOWN", "", std::nullopt};
        CHECK(action_accuracy(GuiAction{"SCROLL_UP", "", std::nullopt}, gt, std::nullopt) == 0.0);
    }
    SUBCASE("spatial miss") {
        GuiAction gt{"CLICK", "x", Vec2{0.5, 0.5}};
        CHECK(action_accuracy(GuiAction{"CLICK", "x", Vec2{0.9, 0.9}}, gt,
                              BBox{0.4, 0.4, 0.6, 0.6}) == 0.0);
    }
}

TEST_CASE("step success never exceeds its factors") {
    // Exhaustive over the interesting combinations.
    GuiAction gt{"CLICK", "alpha beta", Vec2{0.5, 0.5}};
    BBox box{0.4, 0.4, 0.6, 0.6};
    std::vector<std::optional<GuiAction>> preds = {
        std::nullopt,
        GuiAction{"CLICK", "alpha beta", Vec2{0.5, 0.5}},
        GuiAction{"CLICK", "alpha", Vec2{0.5, 0.5}},
        GuiAction{"INPUT", "alpha beta", Vec2{0.5, 0.5}},
        GuiAction{"CLICK", "alpha beta", Vec2{0.1, 0.1}},
        GuiAction{"CLICK", "gamma", Vec2{0.1, 0.1}},
    };
    for (const auto& pred : preds) {
        auto m = step_metrics(pred, gt, box);
        CHECK(m.step_sr <= m.ele_acc);
        CHECK(m.step_sr <= std::ceil(m.op_f1));
    }
}

TEST_CASE("aggregation averages steps within splits and splits within overall") {
    std::vector<ReportRow> rows;
    auto add = [&](const std::string& split, double sr) {
        ReportRow r;
        r.split = split;
        r.metrics.step_sr = sr;
        r.metrics.ele_acc = sr;
        r.metrics.op_f1 = sr;
        r.action_acc = sr;
        rows.push_back(r);
    };
    add("a", 1);
    add("a", 0);
    add("a", 1);
    add("a", 1);
    auto report = aggregate(rows);
    CHECK(report.splits.size() == 1);
    CHECK(report.splits[0].step_sr == doctest::Approx(0.75));

    add("b", 1);
    add("b", 1);
    report = aggregate(rows);
    REQUIRE(report.splits.size() == 2);
    CHECK(report.splits[0].step_sr == doctest::Approx(0.75));
    CHECK(report.splits[1].step_sr == doctest::Approx(1.0));
    CHECK(report.overall.step_sr == doctest::Approx(0.875)); // mean of split means

    CHECK_THROWS_AS(aggregate({}), EmptyReport);
}
