#include <cmath>

#include "doctest.h"
#include "metagrad/toy.hpp"

using namespace metagrad;
using namespace metagrad::toy;

namespace {

double sinusoid_form(const std::vector<double>& p, double x) {
    return p[0] * std::sin(x + p[1]);
}

double harmonic_form(const std::vector<double>& p, double x) {
    return p[0] * std::sin(p[4] * x + p[1]) + p[2] * std::sin(2.0 * p[4] * x + p[3]);
}

double sinline_form(const std::vector<double>& p, double x) {
    return p[0] == 1.0 ? p[1] * std::sin(x + p[2]) : p[1] * x + p[2];
}

}  // namespace

TEST_CASE("sinusoid dataset matches its closed form") {
    ToyConfig cfg;
    cfg.num_samples_per_task = 10;
    cfg.num_tasks = 1'000'000;
    cfg.seed = 3;
    SinusoidDataset ds(cfg);
    CHECK(ds.num_tasks() == 1'000'000);

    for (std::size_t t = 0; t < 100; ++t) {
        const std::size_t index = t * 9973 % cfg.num_tasks;
        tasks::TaskDataset task = ds.get_task(index);
        REQUIRE(task.examples.size() == 10);
        for (const auto& ex : task.examples) {
            const double x = ex.input.at(0);
            CHECK(std::abs(ex.target.at(0) - sinusoid_form(task.descriptor.params, x)) < 1e-12);
        }
    }
}

TEST_CASE("sinusoid identities at pinned parameters") {
    ToyConfig cfg;
    cfg.amplitude_lo = cfg.amplitude_hi = 1.0;  // force a = 1
    cfg.phase_lo = cfg.phase_hi = 0.0;          // force b = 0
    cfg.num_samples_per_task = 32;
    cfg.num_tasks = 10;
    SinusoidDataset ds(cfg);
    tasks::TaskDataset task = ds.get_task(4);
    CHECK(task.descriptor.params == std::vector<double>{1.0, 0.0});
    for (const auto& ex : task.examples) {
        CHECK(ex.target.at(0) == doctest::Approx(std::sin(ex.input.at(0))).epsilon(1e-15));
    }
    CHECK(sinusoid_form({1.0, 0.0}, 0.0) == 0.0);
    CHECK(sinusoid_form({1.0, 0.0}, 1.5707963267948966) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("task derivation is pure in (seed, index)") {
    ToyConfig cfg;
    cfg.seed = 77;
    cfg.num_tasks = 1000;
    SinusoidDataset ds(cfg);
    SinusoidDataset ds_again(cfg);

    tasks::TaskDataset first = ds.get_task(42);
    ds.get_task(7);  // access order must not matter
    tasks::TaskDataset second = ds.get_task(42);
    tasks::TaskDataset fresh = ds_again.get_task(42);

    CHECK(first.descriptor.params == second.descriptor.params);
    CHECK(first.descriptor.params == fresh.descriptor.params);
    for (std::size_t i = 0; i < first.examples.size(); ++i) {
        CHECK(first.examples[i].input.values() == second.examples[i].input.values());
        CHECK(first.examples[i].input.values() == fresh.examples[i].input.values());
        CHECK(first.examples[i].target.values() == fresh.examples[i].target.values());
    }

    ToyConfig other = cfg;
    other.seed = 78;
    SinusoidDataset ds_other(other);
    CHECK(ds_other.get_task(42).descriptor.params != first.descriptor.params);
}

TEST_CASE("harmonic dataset") {
    SUBCASE("closed form at 100 random points within 1e-12") {
        ToyConfig cfg;
        cfg.seed = 5;
        cfg.num_samples_per_task = 10;
        cfg.num_tasks = 10000;
        HarmonicDataset ds(cfg);
        std::size_t points = 0;
        for (std::size_t t = 0; points < 100; ++t) {
            tasks::TaskDataset task = ds.get_task(t * 131);
            for (const auto& ex : task.examples) {
                CHECK(std::abs(ex.target.at(0) -
                               harmonic_form(task.descriptor.params, ex.input.at(0))) < 1e-12);
                ++points;
            }
        }
    }

    SUBCASE("zero second amplitude degenerates to a single sinusoid") {
        const std::vector<double> p{1.3, 0.4, 0.0, 2.2, 1.7};
        for (double x : {-4.0, -1.0, 0.0, 0.5, 3.0}) {
            CHECK(harmonic_form(p, x) == doctest::Approx(1.3 * std::sin(1.7 * x + 0.4)));
        }
        CHECK(harmonic_form({1, 0, 1, 0, 1}, 0.0) == 0.0);
    }
}

TEST_CASE("sinusoid-and-line dataset") {
    ToyConfig cfg;
    cfg.seed = 13;
    cfg.num_tasks = 10000;
    cfg.num_samples_per_task = 5;
    SinusoidAndLineDataset ds(cfg);

    SUBCASE("line tasks follow m*x + c; flat lines are constant") {
        bool found_line = false;
        for (std::size_t t = 0; t < 50 && !found_line; ++t) {
            tasks::TaskDataset task = ds.get_task(t);
            if (task.descriptor.params[0] == 0.0) {
                found_line = true;
                for (const auto& ex : task.examples) {
                    CHECK(std::abs(ex.target.at(0) -
                                   sinline_form(task.descriptor.params, ex.input.at(0))) < 1e-12);
                }
            }
        }
        CHECK(found_line);
        CHECK(sinline_form({0.0, 0.0, 3.0}, -4.2) == 3.0);
        CHECK(sinline_form({0.0, 0.0, 3.0}, 1.9) == 3.0);
    }

    SUBCASE("kind frequencies within 3 sigma of one half over 10^4 tasks") {
        std::size_t lines = 0;
        for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
            lines += ds.get_task(t).descriptor.params[0] == 0.0 ? 1 : 0;
        }
        const double freq = double(lines) / double(cfg.num_tasks);
        const double bound = 3.0 * std::sqrt(0.25 / double(cfg.num_tasks));
        CHECK(std::abs(freq - 0.5) <= bound);
    }

    SUBCASE("same index, different seeds differ") {
        ToyConfig other = cfg;
        other.seed = 14;
        SinusoidAndLineDataset ds_other(other);
        bool any_differ = false;
        for (std::size_t t = 0; t < 5; ++t) {
            if (ds.get_task(t).descriptor.params != ds_other.get_task(t).descriptor.params) {
                any_differ = true;
            }
        }
        CHECK(any_differ);
    }
}

TEST_CASE("sampled parameters respect configured ranges") {
    ToyConfig cfg;
    cfg.seed = 21;
    cfg.num_tasks = 10000;
    cfg.num_samples_per_task = 1;
    cfg.amplitude_lo = 0.5;
    cfg.amplitude_hi = 2.0;
    cfg.phase_lo = 0.1;
    cfg.phase_hi = 1.0;
    SinusoidDataset ds(cfg);
    for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
        const auto& p = ds.get_task(t).descriptor.params;
        CHECK(p[0] >= 0.5);
        CHECK(p[0] <= 2.0);
        CHECK(p[1] >= 0.1);
        CHECK(p[1] <= 1.0);
    }
}

TEST_CASE("noise has the configured standard deviation") {
    ToyConfig cfg;
    cfg.seed = 31;
    cfg.noise_std = 0.5;
    cfg.num_samples_per_task = 10;
    cfg.num_tasks = 10000;
    SinusoidDataset ds(cfg);

    double sum = 0, sum_sq = 0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
        tasks::TaskDataset task = ds.get_task(t);
        for (const auto& ex : task.examples) {
            const double residual =
                ex.target.at(0) - sinusoid_form(task.descriptor.params, ex.input.at(0));
            sum += residual;
            sum_sq += residual * residual;
            ++count;
        }
    }
    REQUIRE(count == 100000);
    const double mean = sum / double(count);
    const double stddev = std::sqrt(sum_sq / double(count) - mean * mean);
    CHECK(std::abs(stddev - 0.5) / 0.5 < 0.05);
}

TEST_CASE("config validation") {
    ToyConfig cfg;
    cfg.input_lo = 1.0;
    cfg.input_hi = -1.0;
    CHECK_THROWS_AS((SinusoidDataset{cfg}), ConfigError);

    ToyConfig neg_noise;
    neg_noise.noise_std = -0.1;
    CHECK_THROWS_AS((SinusoidDataset{neg_noise}), ConfigError);

    ToyConfig cfg2;
    SinusoidDataset ds(cfg2);
    CHECK_THROWS_AS(ds.get_task(cfg2.num_tasks), ContractError);
}
