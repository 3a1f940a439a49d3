#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "uol/processes.hpp"
#include "uol/rng.hpp"

using namespace uol;

TEST_CASE("geometric process") {
    ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
    CHECK(gen.next_input(1) == -1.0L / 3.0L);
    CHECK(std::fabs(static_cast<double>(gen.next_input(2)) - 1.0 / 9.0) < 1e-18);
    CHECK(gen.next_input(3) < 0.0L);
    // stays representable far beyond double underflow
    CHECK(gen.next_input(1000) != 0.0L);
    CHECK(std::fabs(static_cast<double>(gen.next_input(7) * 3.0L * 3.0L - gen.next_input(5))) <
          1e-18);
}

TEST_CASE("fixed sequence exhaustion") {
    ProcessGen gen = ProcessGen::fixed_sequence({0.1L, 0.2L});
    CHECK(gen.next_input(2) == 0.2L);
    CHECK_THROWS_AS(gen.next_input(3), end_of_trace);
    CHECK_THROWS_AS(gen.next_input(0), std::invalid_argument);
}

TEST_CASE("iid kinds are seed-reproducible and pure in t") {
    ProcessGen a = ProcessGen::iid_uniform(0.0, 1.0, 99);
    ProcessGen b = ProcessGen::iid_uniform(0.0, 1.0, 99);
    ProcessGen c = ProcessGen::iid_uniform(0.0, 1.0, 100);
    CHECK(a.next_input(1) == b.next_input(1));
    CHECK(a.next_input(17) == b.next_input(17));
    CHECK(a.next_input(1) == a.next_input(1));
    CHECK(a.next_input(1) != c.next_input(1));

    ProcessGen d = ProcessGen::iid_discrete({0.5L, 1.5L, 2.5L}, {1.0, 1.0, 2.0}, 7);
    int counts[3] = {0, 0, 0};
    for (std::uint64_t t = 1; t <= 4000; ++t) {
        Point x = d.next_input(t);
        counts[static_cast<int>(x)]++;
        REQUIRE((x == 0.5L || x == 1.5L || x == 2.5L));
    }
    CHECK(counts[2] > counts[0]); // weight 2 point dominates
}

TEST_CASE("dyadic cells") {
    CHECK(dyadic_cell(0.0L, 0.0L) == DyadicCell{0, 0});
    CHECK(dyadic_cell(0.0L, 1.5L) == DyadicCell{1, 0});    // [1, 2)
    CHECK(dyadic_cell(0.0L, -0.3L) == DyadicCell{-1, -2}); // (-0.5, -0.25]
    // boundary points: [a+2^i, a+2^{i+1}) right, (a-2^{i+1}, a-2^i] left
    CHECK(dyadic_cell(0.0L, 0.25L) == DyadicCell{1, -2});
    CHECK(dyadic_cell(0.0L, -0.25L) == DyadicCell{-1, -2});
    CHECK(dyadic_cell(0.5L, 0.75L) == DyadicCell{1, -2});
    // distinct ids for distinct cells
    CHECK(dyadic_cell_id({0, 0}) == 0);
    CHECK(dyadic_cell_id({1, -2}) != dyadic_cell_id({-1, -2}));
    CHECK(dyadic_cell_id({1, 3}) != dyadic_cell_id({1, -3}));
}

TEST_CASE("targets") {
    TargetFn th = TargetFn::threshold(0.5, false);
    CHECK(th(0.4L) == Label::bit(1));
    CHECK(th(0.5L) == Label::bit(0));
    CHECK(TargetFn::threshold(0.5, true)(0.5L) == Label::bit(1));

    TargetFn iu = TargetFn::interval_union({{0.6, 0.8}, {0.1, 0.2}});
    CHECK(iu(0.15L) == Label::bit(1));
    CHECK(iu(0.3L) == Label::bit(0));
    CHECK(iu(0.8L) == Label::bit(1));
    CHECK_THROWS_AS(TargetFn::interval_union({{0.1, 0.5}, {0.4, 0.9}}), std::invalid_argument);
    CHECK_THROWS_AS(TargetFn::interval_union({}), std::invalid_argument);

    TargetFn qs = TargetFn::quantized_step({0.25, 0.75}, {Label::nat(3), Label::nat(1), Label::nat(9)});
    CHECK(qs(0.1L) == Label::nat(3));
    CHECK(qs(0.25L) == Label::nat(1));
    CHECK(qs(0.9L) == Label::nat(9));
    CHECK_THROWS_AS(TargetFn::quantized_step({0.5}, {Label::nat(1)}), std::invalid_argument);

    TargetFn dc = TargetFn::dyadic_cell_label(0.5);
    CHECK(dc(0.5L) == Label::nat(0));
    CHECK(dc(0.75L) == dc(0.8L));  // same cell [0.75, 1.0)
    CHECK(dc(0.75L) != dc(0.25L)); // opposite sides
}

TEST_CASE("smv audit") {
    std::vector<Point> constant(100, 0.5L);
    auto rows = smv_audit(constant, PartitionSpec::uniform_grid(0.1L), {100});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].distinct_cells == 1);
    CHECK(rows[0].ratio == 0.01);

    std::vector<Point> fresh;
    for (int t = 1; t <= 100; ++t) fresh.push_back(static_cast<Point>(t));
    rows = smv_audit(fresh, PartitionSpec::uniform_grid(1.0L), {100});
    CHECK(rows[0].distinct_cells == 100);
    CHECK(rows[0].ratio == 1.0);

    CHECK_THROWS_AS(smv_audit(fresh, PartitionSpec::uniform_grid(1.0L), {200}),
                    std::invalid_argument);
    CHECK_THROWS_AS(smv_audit(fresh, PartitionSpec::uniform_grid(1.0L), {50, 20}),
                    std::invalid_argument);
}

TEST_CASE("smv ratios decrease on a seeded uniform trace") {
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(42, "process"));
    std::vector<Point> xs;
    for (std::uint64_t t = 1; t <= 10000; ++t) xs.push_back(gen.next_input(t));
    auto rows = smv_audit(xs, PartitionSpec::dyadic_around(0.5L), {100, 1000, 10000});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].ratio > rows[1].ratio);
    CHECK(rows[1].ratio > rows[2].ratio);
    CHECK(rows[2].distinct_cells >= rows[1].distinct_cells);
}

TEST_CASE("mistakes never outrun new cells") {
    TargetFn tgt = TargetFn::threshold(0.0, false);
    {
        ProcessGen gen = ProcessGen::geometric(-1.0L / 3.0L);
        Trace tr = make_trace(gen, tgt, 20);
        MistakeCellReport rep = mistake_vs_newcell_check(tr, tgt);
        CHECK(rep.bound_holds);
        // every step visits a fresh dyadic cell and (from step 2) errs
        CHECK(rep.new_cells.back() == 20);
        CHECK(rep.mistakes.back() >= 19);
    }
    {
        TargetFn t5 = TargetFn::threshold(0.5, false);
        ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(11, "mnc"));
        Trace tr = make_trace(gen, t5, 10000);
        MistakeCellReport rep = mistake_vs_newcell_check(tr, t5);
        CHECK(rep.bound_holds);
    }
    {
        // all points in one cell after step 1: constant trace, constant prefix
        ProcessGen gen = ProcessGen::fixed_sequence(std::vector<Point>(50, 0.25L));
        TargetFn t0 = TargetFn::threshold(0.0, false);
        Trace tr = make_trace(gen, t0, 50);
        MistakeCellReport rep = mistake_vs_newcell_check(tr, t0);
        CHECK(rep.bound_holds);
        CHECK(rep.mistakes.back() <= 1);
    }
    CHECK_THROWS_AS(mistake_vs_newcell_check(Trace{}, TargetFn::interval_union({{0.0, 1.0}})),
                    std::invalid_argument);
}

TEST_CASE("closure identities") {
    std::vector<TargetFn> targets = {TargetFn::interval_union({{0.0, 0.3}}),
                                     TargetFn::interval_union({{0.6, 1.0}})};
    ProcessGen gen = ProcessGen::iid_uniform(0.0, 1.0, derive_seed(13, "closure"));
    Trace tr = make_trace(gen, targets[0], 1000);
    ClosureReport rep = closure_check(tr, targets);
    CHECK(rep.violations.empty());
    CHECK(rep.steps_checked == 999); // step 1 has no representant

    CHECK_THROWS_AS(closure_check(tr, {targets[0]}), std::invalid_argument);
}

TEST_CASE("file traces parse one point per line") {
    std::string path = "uol_test_trace.txt";
    {
        std::ofstream out(path);
        out << "# comment\n0.25\n-1.5\n\n0.75\n";
    }
    ProcessGen gen = ProcessGen::file_trace(path);
    CHECK(gen.next_input(1) == 0.25L);
    CHECK(gen.next_input(2) == -1.5L);
    CHECK(gen.next_input(3) == 0.75L);
    CHECK_THROWS_AS(gen.next_input(4), end_of_trace);
    std::remove(path.c_str());
    CHECK_THROWS_AS(ProcessGen::file_trace("definitely_missing.txt"), std::invalid_argument);
}
