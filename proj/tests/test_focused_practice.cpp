#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "fpvolseg/focused_practice.hpp"
#include "oracles.hpp"

using namespace fpvolseg;

TEST_CASE("record_loss keeps the latest value and rejects bad input") {
    LossRegistry reg;
    reg.record_loss(3, 0.5);
    reg.record_loss(3, 0.2);
    CHECK(reg.entries().at(3) == 0.2);

    reg.record_loss(7, 0.9);
    CHECK(reg.size() == 2);
    CHECK(reg.entries().at(7) == 0.9);

    CHECK_THROWS_AS(reg.record_loss(1, std::numeric_limits<double>::quiet_NaN()), ValueError);
    CHECK_THROWS_AS(reg.record_loss(1, -0.1), ValueError);
    CHECK_THROWS_AS(reg.record_loss(1, std::numeric_limits<double>::infinity()), ValueError);
}

TEST_CASE("otsu_threshold splits the bimodal example") {
    const OtsuSplit split = otsu_threshold({0.10, 0.12, 0.11, 0.90, 0.95});
    CHECK(split.split_index == 3);
    CHECK(split.threshold == doctest::Approx(0.51).epsilon(1e-12));
}

TEST_CASE("otsu_threshold degenerate inputs") {
    const OtsuSplit equal = otsu_threshold({0.3, 0.3, 0.3});
    CHECK(equal.split_index == 3);
    CHECK(equal.threshold == 0.3);

    const OtsuSplit pair = otsu_threshold({0.1, 0.9});
    CHECK(pair.split_index == 1);
    CHECK(pair.threshold == doctest::Approx(0.5).epsilon(1e-12));

    const OtsuSplit single = otsu_threshold({0.4});
    CHECK(single.split_index == 1);

    CHECK_THROWS_AS(otsu_threshold({}), ParameterError);
}

TEST_CASE("otsu_threshold agrees with the brute-force oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform_int(99));
        std::vector<double> losses(n);
        const bool bimodal = rng.coin();
        for (auto& v : losses) {
            if (bimodal)
                v = std::max(0.0, rng.coin() ? rng.normal(0.2, 0.05) : rng.normal(0.8, 0.05));
            else
                v = rng.uniform01();
        }
        const OtsuSplit got = otsu_threshold(losses);
        const oracles::OtsuResult expected = oracles::brute_force_otsu(losses);
        CHECK(got.split_index == expected.split_index);
        CHECK(got.threshold == doctest::Approx(expected.threshold).epsilon(1e-12));
    }
}

TEST_CASE("classify orders easy by id and hard by loss") {
    LossRegistry reg;
    reg.record_loss(1, 0.1);
    reg.record_loss(2, 0.12);
    reg.record_loss(3, 0.11);
    reg.record_loss(4, 0.9);
    reg.record_loss(5, 0.95);

    const Classification cls = classify(reg);
    CHECK(cls.easy == std::vector<PatchId>{1, 2, 3});
    CHECK(cls.hard == std::vector<PatchId>{5, 4});
    CHECK(cls.threshold == doctest::Approx(0.51).epsilon(1e-12));
}

TEST_CASE("classify degenerate registries") {
    LossRegistry equal;
    for (PatchId id = 0; id < 5; ++id) equal.record_loss(id, 0.3);
    const Classification all_easy = classify(equal);
    CHECK(all_easy.hard.empty());
    CHECK(all_easy.easy.size() == 5);

    LossRegistry single;
    single.record_loss(42, 0.7);
    const Classification one = classify(single);
    CHECK(one.hard.empty());
    CHECK(one.easy == std::vector<PatchId>{42});

    LossRegistry empty;
    CHECK_THROWS_AS(classify(empty), ParameterError);
}

TEST_CASE("classification tracks registry updates") {
    LossRegistry reg;
    reg.record_loss(1, 0.1);
    reg.record_loss(2, 0.1);
    reg.record_loss(3, 0.1);
    reg.record_loss(4, 0.9);
    reg.record_loss(5, 0.95);

    Classification before = classify(reg);
    REQUIRE(std::find(before.hard.begin(), before.hard.end(), 4) != before.hard.end());

    // patch 4 got easy; reclassification must pick that up
    reg.record_loss(4, 0.1);
    const Classification after = classify(reg);
    CHECK(std::find(after.hard.begin(), after.hard.end(), 4) == after.hard.end());
    CHECK(std::find(after.easy.begin(), after.easy.end(), 4) != after.easy.end());
}

TEST_CASE("build_epoch_plan oversamples retained hard patches") {
    LossRegistry reg;
    for (PatchId id = 0; id < 5; ++id) reg.record_loss(id, 0.05 + 0.01 * static_cast<double>(id));
    for (PatchId id = 5; id < 10; ++id) reg.record_loss(id, 0.9 + 0.01 * static_cast<double>(id));

    Rng rng(5);
    const EpochPlan plan = build_epoch_plan(reg, 2, 0.2, rng);
    // floor(0.2 * 5) = 1 excluded, 5 easy once, 4 hard twice
    CHECK(plan.entries.size() == 13);
    CHECK(plan.excluded == std::set<PatchId>{9});
    CHECK(plan.hard_count == 5);
    for (PatchId id = 0; id < 5; ++id) CHECK(plan.counts.at(id) == 1);
    for (PatchId id = 5; id < 9; ++id) CHECK(plan.counts.at(id) == 2);
    CHECK(plan.counts.find(9) == plan.counts.end());
}

TEST_CASE("build_epoch_plan edge rules") {
    SUBCASE("disabled curriculum reduces to uniform sampling") {
        LossRegistry reg;
        for (PatchId id = 0; id < 7; ++id)
            reg.record_loss(id, 0.1 * static_cast<double>(id + 1));
        Rng rng(6);
        const EpochPlan plan = build_epoch_plan(reg, 1, 0.0, rng);
        CHECK(plan.entries.size() == 7);
        CHECK(plan.excluded.empty());
        for (PatchId id = 0; id < 7; ++id) CHECK(plan.counts.at(id) == 1);
    }

    SUBCASE("small hard sets are never emptied") {
        LossRegistry reg;
        reg.record_loss(0, 0.1);
        reg.record_loss(1, 0.1);
        reg.record_loss(2, 0.1);
        reg.record_loss(10, 0.9);
        reg.record_loss(11, 0.9);
        reg.record_loss(12, 0.9);
        Rng rng(7);
        const EpochPlan plan = build_epoch_plan(reg, 2, 0.2, rng);
        // floor(0.2 * 3) = 0 excluded
        CHECK(plan.excluded.empty());
        CHECK(plan.entries.size() == 3 + 3 * 2);
    }

    SUBCASE("ties exclude the higher id first") {
        LossRegistry reg;
        reg.record_loss(0, 0.05);
        reg.record_loss(1, 0.05);
        for (PatchId id = 3; id <= 7; ++id) reg.record_loss(id, 0.9);
        Rng rng(8);
        const EpochPlan plan = build_epoch_plan(reg, 2, 0.2, rng);
        CHECK(plan.hard_count == 5);
        CHECK(plan.excluded == std::set<PatchId>{7});
    }

    SUBCASE("parameter validation") {
        LossRegistry reg;
        reg.record_loss(0, 0.5);
        Rng rng(9);
        CHECK_THROWS_AS(build_epoch_plan(reg, 0, 0.2, rng), ParameterError);
        CHECK_THROWS_AS(build_epoch_plan(reg, 2, 1.0, rng), ParameterError);
        CHECK_THROWS_AS(build_epoch_plan(reg, 2, -0.1, rng), ParameterError);
        LossRegistry empty;
        CHECK_THROWS_AS(build_epoch_plan(empty, 2, 0.2, rng), ParameterError);
    }
}

TEST_CASE("plan multiset bookkeeping holds for random registries") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        LossRegistry reg;
        const std::size_t n = 1 + rng.uniform_int(40);
        for (std::size_t i = 0; i < n; ++i)
            reg.record_loss(static_cast<PatchId>(rng.uniform_int(1000)), rng.uniform01());
        const int factor = 1 + static_cast<int>(rng.uniform_int(4));
        const double exclude = rng.uniform(0.0, 0.8);
        Rng plan_rng(trial);
        const EpochPlan plan = build_epoch_plan(reg, factor, exclude, plan_rng);

        std::map<PatchId, int> recount;
        for (PatchId id : plan.entries) ++recount[id];
        CHECK(recount == plan.counts);
        for (PatchId id : plan.excluded) CHECK(recount.find(id) == recount.end());
        for (const auto& [id, loss] : reg.entries()) {
            const bool planned = plan.counts.find(id) != plan.counts.end();
            const bool excluded = plan.excluded.count(id) > 0;
            CHECK(planned != excluded);
        }
    }
}

TEST_CASE("plans are deterministic per seed") {
    LossRegistry reg;
    for (PatchId id = 0; id < 20; ++id)
        reg.record_loss(id, (id % 3 == 0) ? 0.9 : 0.1);
    Rng a(99), b(99), c(100);
    const EpochPlan plan_a = build_epoch_plan(reg, 2, 0.2, a);
    const EpochPlan plan_b = build_epoch_plan(reg, 2, 0.2, b);
    const EpochPlan plan_c = build_epoch_plan(reg, 2, 0.2, c);
    CHECK(plan_a.entries == plan_b.entries);
    CHECK(plan_a.entries.size() == plan_c.entries.size()); // same multiset, other order
}

TEST_CASE("uniform_plan visits every id exactly once") {
    Rng rng(43);
    const EpochPlan plan = uniform_plan({5, 1, 9, 4}, rng);
    CHECK(plan.entries.size() == 4);
    for (PatchId id : {5, 1, 9, 4}) CHECK(plan.counts.at(id) == 1);
    CHECK(plan.excluded.empty());
    CHECK(plan.hard_count == 0);
}

TEST_CASE("registry checkpoints round-trip through JSON") {
    LossRegistry reg;
    reg.record_loss(3, 0.25);
    reg.record_loss(11, 0.5);
    reg.set_epoch_tag(4);

    const auto path = std::filesystem::temp_directory_path() / "fpvolseg_registry.json";
    save_checkpoint(reg, 0.4, path);
    const RegistryCheckpoint cp = load_checkpoint(path);
    CHECK(cp.registry.epoch_tag() == 4);
    CHECK(cp.registry.entries() == reg.entries());
    CHECK(cp.threshold == 0.4);

    CHECK_THROWS_AS(load_checkpoint("/nonexistent-dir-fpvolseg/registry.json"), IoError);
}
