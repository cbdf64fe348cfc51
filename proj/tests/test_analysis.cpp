#include <doctest.h>

#include <cmath>
#include <vector>

#include "nds/analysis.hpp"
#include "nds/core.hpp"
#include "nds/experiments.hpp"
#include "nds/rng.hpp"

using namespace nds;

namespace {

Trajectory trajectory_with_spikes(std::int64_t horizon, const std::vector<std::int64_t>& at) {
    Trajectory t;
    t.states.assign(static_cast<std::size_t>(horizon), NdsState{});
    t.spikes.assign(static_cast<std::size_t>(horizon), 0);
    for (std::int64_t s : at) t.spikes[static_cast<std::size_t>(s)] = 1;
    return t;
}

std::vector<std::int64_t> repeat_pattern(const std::vector<std::int64_t>& offsets,
                                         std::int64_t period, std::int64_t horizon) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 0; k * period < horizon; ++k)
        for (std::int64_t o : offsets)
            if (k * period + o < horizon) out.push_back(k * period + o);
    return out;
}

} // namespace

TEST_CASE("extract_spikes lists the 1-indices") {
    Trajectory t = trajectory_with_spikes(5, {1, 4});
    SpikeTrain train = extract_spikes(t);
    CHECK(train.times == std::vector<std::int64_t>{1, 4});
    CHECK(train.horizon == 5);

    SpikeTrain none = extract_spikes(trajectory_with_spikes(64, {}));
    CHECK(none.times.empty());

    Trajectory free3 = run_free(NdsParams{}, NdsState{0, 0, 0}, 3);
    CHECK(extract_spikes(free3).times == std::vector<std::int64_t>{1});
}

TEST_CASE("spike_periodicity finds the stabilized pattern anchor") {
    SUBCASE("period-100 pattern from the start") {
        auto times = repeat_pattern({3, 38, 62, 82}, 100, 1000);
        SpikeTrain train{times, 1000};
        auto t = spike_periodicity(train, 100, 200);
        REQUIRE(t.has_value());
        CHECK(*t == 3);
    }
    SUBCASE("empty train is never periodic") {
        CHECK_FALSE(spike_periodicity(SpikeTrain{{}, 1000}, 100, 200).has_value());
    }
    SUBCASE("paper 5-tau train locks at 500 but not at 100") {
        auto times = repeat_pattern({3, 84, 103, 194, 203, 286, 303, 384, 403, 494}, 500, 5000);
        SpikeTrain train{times, 5000};
        CHECK_FALSE(spike_periodicity(train, 100, 200).has_value());
        auto t = spike_periodicity(train, 500, 1000);
        REQUIRE(t.has_value());
        CHECK(*t == 3);
    }
    SUBCASE("chaotic prefix delays the anchor") {
        // aperiodic garbage before 400, exactly periodic tail afterwards
        std::vector<std::int64_t> times{7, 19, 23, 151, 290, 388};
        for (std::int64_t s : repeat_pattern({11, 47}, 100, 2000))
            if (s + 400 < 2000) times.push_back(s + 400);
        SpikeTrain train{times, 2000};
        auto t = spike_periodicity(train, 100, 200);
        REQUIRE(t.has_value());
        CHECK(*t >= 388);
        CHECK(*t <= 511);
    }
    SUBCASE("window precondition") {
        CHECK_THROWS_AS((void)spike_periodicity(SpikeTrain{{1}, 100}, 10, 19),
                        std::invalid_argument);
    }
    SUBCASE("genuinely periodic tails keep their verdict under extension") {
        for (std::int64_t horizon : {1500, 2500, 6000}) {
            auto times = repeat_pattern({3, 38, 62, 82}, 100, horizon);
            auto t = spike_periodicity(SpikeTrain{times, horizon}, 100, 200);
            REQUIRE(t.has_value());
            CHECK(*t == 3);
        }
    }
    SUBCASE("periodicity of a genuine tail holds from every later start") {
        auto times = repeat_pattern({3, 38, 62, 82}, 100, 2000);
        SpikeTrain train{times, 2000};
        auto t0 = spike_periodicity(train, 100, 200);
        REQUIRE(t0.has_value());
        for (std::int64_t from : {*t0, *t0 + 57, *t0 + 500, std::int64_t(2000 - 200 - 100)})
            CHECK(spike_periodicity(train, 100, 200, from).has_value());
    }
}

TEST_CASE("full_stabilization on synthetic trajectories") {
    SUBCASE("exactly periodic trajectory stabilizes at the first comparable index") {
        Trajectory t;
        for (int i = 0; i < 1000; ++i) {
            const double ph = 2.0 * 3.141592653589793 * (i % 50) / 50.0;
            t.states.push_back(NdsState{std::sin(ph), std::cos(ph), -0.5 + 0.1 * std::sin(ph)});
            t.spikes.push_back(0);
        }
        auto r = full_stabilization(t, 50, 1e-6, 100);
        REQUIRE(r.has_value());
        CHECK(*r == 50);
    }
    SUBCASE("chaotic free run never self-repeats at lag tau") {
        Trajectory t = run_free(NdsParams{}, sample_initial(2024), 5000);
        CHECK_FALSE(full_stabilization(t, 100, 1e-6, 200).has_value());
    }
}

TEST_CASE("difference_pattern selectors") {
    SUBCASE("constant trajectory gives all zeros") {
        Trajectory t;
        for (int i = 0; i < 300; ++i) {
            t.states.push_back(NdsState{1.0, 2.0, -0.5});
            t.spikes.push_back(0);
        }
        for (auto sel : {DiffVariable::x, DiffVariable::y, DiffVariable::u,
                         DiffVariable::xy_plane, DiffVariable::xyz_euclidean}) {
            DifferenceSeries s = difference_pattern(t, sel, 50);
            CHECK(s.values.size() == 250);
            for (double v : s.values) CHECK(v == 0.0);
        }
    }
    SUBCASE("linear ramp in x gives a constant difference") {
        Trajectory t;
        for (int i = 0; i < 100; ++i) {
            t.states.push_back(NdsState{static_cast<double>(i), 0.0, 0.0});
            t.spikes.push_back(0);
        }
        DifferenceSeries s = difference_pattern(t, DiffVariable::x, 10);
        for (double v : s.values) CHECK(v == 10.0);
    }
    SUBCASE("xy_plane carries the signed pair") {
        Trajectory t;
        for (int i = 0; i < 10; ++i) {
            t.states.push_back(NdsState{i * 1.0, i * -2.0, 0.0});
            t.spikes.push_back(0);
        }
        DifferenceSeries s = difference_pattern(t, DiffVariable::xy_plane, 3);
        REQUIRE(s.dx.size() == s.values.size());
        CHECK(s.dx[0] == 3.0);
        CHECK(s.dy[0] == -6.0);
        CHECK(s.values[0] == doctest::Approx(std::hypot(3.0, 6.0)));
    }
    SUBCASE("lag must be shorter than the trajectory") {
        Trajectory t = trajectory_with_spikes(10, {});
        CHECK_THROWS_AS((void)difference_pattern(t, DiffVariable::u, 10), std::invalid_argument);
    }
}

TEST_CASE("classify_run verdicts") {
    SUBCASE("divergence flag wins") {
        RunRecord rec;
        rec.diverged_at = 123;
        StabilizationVerdict v = classify_run(rec, 100);
        CHECK(v.kind == StabilizationVerdict::Kind::diverged);
        CHECK_FALSE(v.spike_stabilization_time.has_value());
        CHECK_FALSE(v.full_stabilization_time.has_value());
    }
    SUBCASE("feedback run stabilizes at period tau") {
        ControlledRunConfig cfg = feedback_config(100, 0.3, sample_initial(99), 10000);
        RunRecord rec = run_controlled(cfg);
        StabilizationVerdict v = classify_run(rec, 100);
        REQUIRE(v.stabilized());
        CHECK(*v.period == 100);
        REQUIRE(v.full_stabilization_time.has_value());
        CHECK(*v.spike_stabilization_time <= *v.full_stabilization_time);
        CHECK(*v.full_stabilization_time >= 100);
    }
    SUBCASE("synthetic period-500 record is not reported as period 100") {
        RunRecord rec;
        rec.trajectory = trajectory_with_spikes(
            6000, repeat_pattern({3, 84, 103, 194, 203, 286, 303, 384, 403, 494}, 500, 6000));
        StabilizationVerdict v = classify_run(rec, 100);
        REQUIRE(v.stabilized());
        CHECK(*v.period == 500);
    }
    SUBCASE("silence is unresolved, not stabilized") {
        RunRecord rec;
        rec.trajectory = trajectory_with_spikes(4000, {});
        StabilizationVerdict v = classify_run(rec, 100);
        CHECK(v.kind == StabilizationVerdict::Kind::unresolved);
    }
}

TEST_CASE("stabilized difference series stay below tolerance past full stabilization") {
    ControlledRunConfig cfg = feedback_config(100, 0.3, sample_initial(7), 10000);
    RunRecord rec = run_controlled(cfg);
    StabilizationVerdict v = classify_run(rec, 100);
    REQUIRE(v.stabilized());
    REQUIRE(v.full_stabilization_time.has_value());
    const std::int64_t t2 = *v.full_stabilization_time;
    for (auto sel : {DiffVariable::x, DiffVariable::y, DiffVariable::u,
                     DiffVariable::xyz_euclidean}) {
        DifferenceSeries s = difference_pattern(rec.trajectory, sel, 100);
        // the euclidean norm crosses the tolerance a little after the
        // per-component detector; check from its own drop point onwards
        std::size_t from = static_cast<std::size_t>(t2 - s.lag);
        while (from < s.values.size() && s.values[from] >= 1e-6) ++from;
        REQUIRE(from < s.values.size());
        CHECK(from <= static_cast<std::size_t>(t2 - s.lag + 100));
        bool stays = true;
        for (std::size_t i = from; i < s.values.size(); ++i) stays = stays && s.values[i] < 1e-6;
        CHECK(stays);
    }
}
