#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fpvolseg/metrics.hpp"
#include "oracles.hpp"

using namespace fpvolseg;

namespace {

Volume3D mask_from_voxels(Shape3 shape, const std::vector<Shape3>& voxels,
                          Spacing3 spacing = kDefaultSpacing) {
    std::vector<float> data(static_cast<std::size_t>(shape.voxels()), 0.0f);
    for (const auto& v : voxels)
        data[static_cast<std::size_t>(shape.index(v.z, v.y, v.x))] = 1.0f;
    return Volume3D(shape, spacing, VolumeKind::Mask, std::move(data));
}

Volume3D random_mask(Shape3 shape, double density, Rng& rng) {
    std::vector<float> data(static_cast<std::size_t>(shape.voxels()));
    for (auto& v : data) v = rng.uniform01() < density ? 1.0f : 0.0f;
    return Volume3D(shape, kDefaultSpacing, VolumeKind::Mask, std::move(data));
}

Volume3D solid_box(Shape3 shape, Shape3 lo, Shape3 hi) {
    std::vector<float> data(static_cast<std::size_t>(shape.voxels()), 0.0f);
    for (std::int64_t z = lo.z; z < hi.z; ++z)
        for (std::int64_t y = lo.y; y < hi.y; ++y)
            for (std::int64_t x = lo.x; x < hi.x; ++x)
                data[static_cast<std::size_t>(shape.index(z, y, x))] = 1.0f;
    return Volume3D(shape, kDefaultSpacing, VolumeKind::Mask, std::move(data));
}

} // namespace

TEST_CASE("dice_coefficient basics") {
    const Shape3 shape{4, 4, 4};
    const Volume3D a = mask_from_voxels(shape, {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}});
    CHECK(dice_coefficient(a, a) == 1.0);

    const Volume3D b = mask_from_voxels(shape, {{3, 3, 3}});
    CHECK(dice_coefficient(a, b) == 0.0);

    // |P ^ G| = 2, |P| = 3, |G| = 3
    const Volume3D p = mask_from_voxels(shape, {{0, 0, 0}, {1, 1, 1}, {0, 1, 0}});
    const Volume3D g = mask_from_voxels(shape, {{0, 0, 0}, {1, 1, 1}, {2, 0, 0}});
    CHECK(dice_coefficient(p, g) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    const Volume3D empty = Volume3D::zeros(shape, VolumeKind::Mask);
    CHECK(dice_coefficient(empty, empty) == 1.0);

    CHECK_THROWS_AS(dice_coefficient(a, Volume3D::zeros({4, 4, 5}, VolumeKind::Mask)),
                    DimensionError);
    CHECK_THROWS_AS(dice_coefficient(a, Volume3D::zeros(shape, VolumeKind::Image)), KindError);
}

TEST_CASE("dice is symmetric on random masks") {
    Rng rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        const Volume3D p = random_mask({8, 8, 8}, 0.3, rng);
        const Volume3D g = random_mask({8, 8, 8}, 0.3, rng);
        CHECK(dice_coefficient(p, g) == dice_coefficient(g, p));
    }
}

TEST_CASE("connected_components separates and merges as the connectivity says") {
    const Shape3 shape{3, 3, 4};

    SUBCASE("an axis gap always separates") {
        const Volume3D m = mask_from_voxels(shape, {{0, 0, 0}, {0, 0, 2}});
        for (const Connectivity conn :
             {Connectivity::Faces6, Connectivity::FacesEdges18, Connectivity::Full26})
            CHECK(connected_components(m, conn).num_components == 2);
    }

    SUBCASE("corner contact joins only at 26") {
        const Volume3D m = mask_from_voxels(shape, {{0, 0, 0}, {1, 1, 1}});
        CHECK(connected_components(m, Connectivity::Faces6).num_components == 2);
        CHECK(connected_components(m, Connectivity::FacesEdges18).num_components == 2);
        CHECK(connected_components(m, Connectivity::Full26).num_components == 1);
    }

    SUBCASE("edge contact joins at 18 and 26") {
        const Volume3D m = mask_from_voxels(shape, {{0, 0, 0}, {0, 1, 1}});
        CHECK(connected_components(m, Connectivity::Faces6).num_components == 2);
        CHECK(connected_components(m, Connectivity::FacesEdges18).num_components == 1);
        CHECK(connected_components(m, Connectivity::Full26).num_components == 1);
    }

    SUBCASE("empty mask has no components") {
        const Volume3D m = Volume3D::zeros(shape, VolumeKind::Mask);
        CHECK(connected_components(m, Connectivity::FacesEdges18).num_components == 0);
    }

    SUBCASE("labels follow first-encounter scan order") {
        const Volume3D m = mask_from_voxels(shape, {{0, 0, 3}, {1, 0, 0}, {2, 2, 2}});
        const ComponentLabeling labeling =
            connected_components(m, Connectivity::Faces6);
        REQUIRE(labeling.num_components == 3);
        CHECK(labeling.labels[static_cast<std::size_t>(shape.index(0, 0, 3))] == 1);
        CHECK(labeling.labels[static_cast<std::size_t>(shape.index(1, 0, 0))] == 2);
        CHECK(labeling.labels[static_cast<std::size_t>(shape.index(2, 2, 2))] == 3);
    }

    SUBCASE("non-mask input is rejected") {
        CHECK_THROWS_AS(
            connected_components(Volume3D::zeros(shape, VolumeKind::Probability),
                                 Connectivity::Faces6),
            KindError);
    }

    CHECK_THROWS_AS(connectivity_from_int(7), ParameterError);
    CHECK(connectivity_from_int(18) == Connectivity::FacesEdges18);
}

TEST_CASE("labeling matches the flood-fill oracle on random masks") {
    Rng rng(72);
    for (int trial = 0; trial < 40; ++trial) {
        const double density = trial % 3 == 0 ? 0.05 : trial % 3 == 1 ? 0.2 : 0.5;
        const Volume3D m = random_mask({16, 16, 16}, density, rng);
        for (const int conn : {6, 18, 26}) {
            const ComponentLabeling got =
                connected_components(m, connectivity_from_int(conn));
            const auto expected = oracles::flood_fill_labels(m, conn);
            CHECK(oracles::same_partition(got.labels, expected));
            const std::int32_t oracle_count =
                *std::max_element(expected.begin(), expected.end());
            CHECK(got.num_components == oracle_count);
        }
    }
}

TEST_CASE("fpv counts only components with zero ground-truth overlap") {
    const Shape3 shape{8, 8, 8};

    SUBCASE("predictions inside the ground truth are free") {
        const Volume3D gt = solid_box(shape, {1, 1, 1}, {5, 5, 5});
        const Volume3D pred = solid_box(shape, {2, 2, 2}, {4, 4, 4});
        CHECK(fpv(pred, gt, Connectivity::FacesEdges18) == 0.0);
    }

    SUBCASE("an isolated 8-voxel component at 1.5 mm is 0.027 ml") {
        const Volume3D gt = mask_from_voxels(shape, {{0, 0, 0}});
        const Volume3D pred = solid_box(shape, {5, 5, 5}, {7, 7, 7});
        CHECK(fpv(pred, gt, Connectivity::FacesEdges18) ==
              doctest::Approx(0.027).epsilon(1e-12));
    }

    SUBCASE("one shared voxel disqualifies the whole component") {
        const Volume3D gt = mask_from_voxels(shape, {{5, 5, 5}});
        const Volume3D pred = solid_box(shape, {5, 5, 5}, {7, 7, 7});
        CHECK(fpv(pred, gt, Connectivity::FacesEdges18) == 0.0);
    }

    SUBCASE("spacing mismatch is rejected") {
        const Volume3D gt = mask_from_voxels(shape, {{0, 0, 0}});
        const Volume3D pred = mask_from_voxels(shape, {{1, 1, 1}}, Spacing3{1.0, 1.0, 1.0});
        CHECK_THROWS_AS(fpv(pred, gt, Connectivity::FacesEdges18), DimensionError);
    }
}

TEST_CASE("fnv mirrors fpv on the ground-truth side") {
    const Shape3 shape{8, 8, 8};

    SUBCASE("perfect prediction has no misses") {
        const Volume3D gt = solid_box(shape, {1, 1, 1}, {4, 4, 4});
        CHECK(fnv(gt, gt, Connectivity::FacesEdges18) == 0.0);
    }

    SUBCASE("an empty prediction misses a 100-voxel lesion: 0.3375 ml") {
        const Volume3D gt = solid_box(shape, {0, 0, 0}, {4, 5, 5});
        const Volume3D pred = Volume3D::zeros(shape, VolumeKind::Mask);
        CHECK(fnv(pred, gt, Connectivity::FacesEdges18) ==
              doctest::Approx(0.3375).epsilon(1e-12));
    }

    SUBCASE("one predicted voxel rescues the component") {
        const Volume3D gt = solid_box(shape, {0, 0, 0}, {4, 5, 5});
        const Volume3D pred = mask_from_voxels(shape, {{3, 4, 4}});
        CHECK(fnv(pred, gt, Connectivity::FacesEdges18) == 0.0);
    }
}

TEST_CASE("fpv and fnv are exact duals on random masks") {
    Rng rng(73);
    for (int trial = 0; trial < 30; ++trial) {
        const Volume3D p = random_mask({12, 12, 12}, 0.1, rng);
        const Volume3D g = random_mask({12, 12, 12}, 0.1, rng);
        for (const int conn : {6, 18, 26}) {
            const Connectivity c = connectivity_from_int(conn);
            CHECK(fpv(p, g, c) == fnv(g, p, c));
        }
    }
}

TEST_CASE("aggregate_score applies the 0.1 volume penalties") {
    CHECK(aggregate_score(1.0, 0.0, 0.0) == 1.0);
    CHECK(aggregate_score(0.8, 1.2, 0.3) == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(aggregate_score(0.0, 5.0, 5.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK_THROWS_AS(aggregate_score(1.5, 0.0, 0.0), RangeError);
    CHECK_THROWS_AS(aggregate_score(0.5, -1.0, 0.0), RangeError);
    CHECK_THROWS_AS(aggregate_score(0.5, 0.0, -1.0), RangeError);
}

TEST_CASE("evaluate_case composes the report") {
    const Shape3 shape{10, 10, 10};

    SUBCASE("pred == gt") {
        const Volume3D gt = solid_box(shape, {2, 2, 2}, {5, 5, 5});
        const MetricsReport r = evaluate_case(gt, gt, Connectivity::FacesEdges18);
        CHECK(r.dice == 1.0);
        CHECK(r.fpv_ml == 0.0);
        CHECK(r.fnv_ml == 0.0);
        CHECK(r.score == 1.0);
    }

    SUBCASE("both empty") {
        const Volume3D empty = Volume3D::zeros(shape, VolumeKind::Mask);
        const MetricsReport r = evaluate_case(empty, empty, Connectivity::FacesEdges18);
        CHECK(r.dice == 1.0);
        CHECK(r.score == 1.0);
    }

    SUBCASE("one detected and one missed lesion match hand-computed values") {
        // gt: 27-voxel cube + 8-voxel cube; pred finds only the first
        std::vector<float> gt_data(static_cast<std::size_t>(shape.voxels()), 0.0f);
        const Volume3D big = solid_box(shape, {1, 1, 1}, {4, 4, 4});   // 27 voxels
        const Volume3D small = solid_box(shape, {6, 6, 6}, {8, 8, 8}); // 8 voxels
        for (std::size_t i = 0; i < gt_data.size(); ++i)
            gt_data[i] = std::max(big.data()[i], small.data()[i]);
        const Volume3D gt(shape, kDefaultSpacing, VolumeKind::Mask, std::move(gt_data));
        const Volume3D pred = big;

        const MetricsReport r = evaluate_case(pred, gt, Connectivity::FacesEdges18);
        CHECK(r.dice == doctest::Approx(2.0 * 27 / (27 + 35)).epsilon(1e-12));
        CHECK(r.fpv_ml == 0.0);
        CHECK(r.fnv_ml == doctest::Approx(8 * 3.375 / 1000.0).epsilon(1e-12));
        CHECK(r.score == aggregate_score(r.dice, r.fpv_ml, r.fnv_ml));
    }
}
