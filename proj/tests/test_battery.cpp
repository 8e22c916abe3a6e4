#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gridcharge/battery.hpp"
#include "gridcharge/errors.hpp"

using namespace gridcharge;
using battery::BatteryModel;
using battery::BatteryState;
using battery::Mode;

namespace {
double round4(double v) { return std::round(v * 1e4) / 1e4; }
} // namespace

TEST_CASE("table constants") {
    const auto l1 = battery::laptop1();
    const auto l2 = battery::laptop2();
    CHECK(round4(battery::charge_ratio(l1)) == doctest::Approx(1.8522).epsilon(1e-12));
    CHECK(round4(battery::charge_ratio(l2)) == doctest::Approx(2.2857).epsilon(1e-12));
    CHECK(battery::battery_life_s(l1) == doctest::Approx(100.0 / 0.0115));
    CHECK(battery::battery_life_s(l2) == doctest::Approx(100.0 / 0.0056));
    CHECK(battery::battery_life_s(l1) > 8600.0);
    CHECK(battery::battery_life_s(l1) < 8800.0);
    CHECK(battery::battery_life_s(l2) > 17700.0);
    CHECK(battery::battery_life_s(l2) < 18000.0);
    CHECK(battery::battery_life_s({100.0, 100.0, "unit"}) == doctest::Approx(1.0));
    CHECK(battery::charge_ratio({0.02, 0.02, "equal"}) == doctest::Approx(1.0));
}

TEST_CASE("charging step arithmetic") {
    // oracle: 0.5 + 100 * 0.0213 / 100 = 0.5213
    const auto next = battery::step({0.5, Mode::Discharging}, battery::laptop1(), true, 100.0);
    CHECK(next.charge == doctest::Approx(0.5213).epsilon(1e-12));
    CHECK(next.mode == Mode::Charging);
}

TEST_CASE("saturation and trickle") {
    const auto full = battery::step({1.0, Mode::Charging}, battery::laptop1(), true, 10.0);
    CHECK(full.charge == 1.0);
    CHECK(full.mode == Mode::Trickle);

    const auto empty = battery::step({0.0, Mode::Discharging}, battery::laptop1(), false, 10.0);
    CHECK(empty.charge == 0.0);
    CHECK(empty.mode == Mode::Discharging);
}

TEST_CASE("full battery goes flat in about 2.5 hours") {
    const auto model = battery::laptop1();
    BatteryState s{1.0, Mode::Trickle};
    std::size_t steps = 0;
    while (s.charge > 0.0) {
        s = battery::step(s, model, false, 1.0);
        ++steps;
    }
    // 100 / 0.0115 = 8695.7 s
    CHECK(steps == 8696);
    CHECK(s.mode == Mode::Discharging);
}

TEST_CASE("clamping holds for arbitrary sequences") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> dt_dist(0.1, 5000.0);
    BatteryState s{0.5, Mode::Charging};
    const auto model = battery::laptop1();
    for (int i = 0; i < 2000; ++i) {
        s = battery::step(s, model, gen() % 2 == 0, dt_dist(gen));
        CHECK(s.charge >= 0.0);
        CHECK(s.charge <= 1.0);
        if (s.mode == Mode::Trickle) CHECK(s.charge == 1.0);
    }
}

TEST_CASE("time additivity away from the clamp") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> c_dist(0.3, 0.7);
    std::uniform_real_distribution<double> dt_dist(0.1, 100.0);
    const auto model = battery::laptop1();
    for (int i = 0; i < 500; ++i) {
        const BatteryState s{c_dist(gen), Mode::Charging};
        const double dt1 = dt_dist(gen), dt2 = dt_dist(gen);
        const bool en = gen() % 2 == 0;
        const auto split = battery::step(battery::step(s, model, en, dt1), model, en, dt2);
        const auto whole = battery::step(s, model, en, dt1 + dt2);
        if (split.charge > 0.0 && split.charge < 1.0)
            CHECK(split.charge == doctest::Approx(whole.charge).epsilon(1e-12));
    }
}

TEST_CASE("faster charge rate never yields lower charge") {
    std::mt19937_64 gen(9);
    const BatteryModel slow{0.01, 0.0115, "slow"};
    const BatteryModel fast{0.03, 0.0115, "fast"};
    BatteryState a{0.5, Mode::Charging}, b{0.5, Mode::Charging};
    for (int i = 0; i < 3000; ++i) {
        const bool en = gen() % 3 != 0;
        a = battery::step(a, slow, en, 7.0);
        b = battery::step(b, fast, en, 7.0);
        CHECK(b.charge >= a.charge);
    }
}

TEST_CASE("model loading and validation") {
    std::istringstream good("rate_charge=0.02\nrate_discharge=0.01\nname=bench\n");
    const auto m = battery::load_model(good);
    CHECK(m.rate_charge_pp_s == doctest::Approx(0.02));
    CHECK(m.rate_discharge_pp_s == doctest::Approx(0.01));
    CHECK(m.name == "bench");

    std::istringstream missing("rate_charge=0.02\n");
    CHECK_THROWS_AS(battery::load_model(missing), InputError);
    std::istringstream negative("rate_charge=-1\nrate_discharge=0.01\n");
    CHECK_THROWS_AS(battery::load_model(negative), ConfigError);
    std::istringstream junk("rate_charge=abc\nrate_discharge=0.01\n");
    CHECK_THROWS_AS(battery::load_model(junk), InputError);

    CHECK(battery::preset("laptop1").has_value());
    CHECK(battery::preset("laptop2").has_value());
    CHECK(!battery::preset("laptop3").has_value());
}
