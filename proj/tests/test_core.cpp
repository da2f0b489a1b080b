#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "iic/core/io.hpp"
#include "iic/core/numeric.hpp"
#include "iic/core/ops.hpp"
#include "iic/core/types.hpp"
#include "iic/errors.hpp"

using namespace iic;
using core::Dataset;
using core::Modality;
using core::MultimodalWindow;
using core::Samples;
using core::Split;

namespace {

MultimodalWindow hr_only(const std::string& id, const Samples& samples) {
    MultimodalWindow w;
    w.window_id = id;
    w.subject_id = "s";
    w.sample_rate_hz = 1.0;
    w.channels[Modality::HR] = samples;
    return w;
}

} // namespace

TEST_SUITE("numeric") {
    TEST_CASE("pairwise_sum matches naive on small inputs") {
        std::vector<double> v = {1.0, 2.0, 3.0, 4.5};
        CHECK(core::pairwise_sum(v) == doctest::Approx(10.5).epsilon(1e-15));
        CHECK(core::pairwise_sum({}) == 0.0);
    }

    TEST_CASE("pairwise_sum matches long-double naive on random input") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::vector<double> v(10007);
        long double acc = 0.0L;
        for (auto& x : v) {
            x = u(rng);
            acc += static_cast<long double>(x);
        }
        CHECK(core::pairwise_sum(v) ==
              doctest::Approx(static_cast<double>(acc)).epsilon(1e-12));
    }

    TEST_CASE("population_std divides by n") {
        // var([1,3]) = mean([1,1]) = 1 under the population convention
        std::vector<double> v = {1.0, 3.0};
        CHECK(core::population_std(v) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(core::population_std(std::vector<double>{5.0}) == 0.0);
    }
}

TEST_SUITE("types") {
    TEST_CASE("modality names round-trip") {
        for (auto m : core::kAllModalities) {
            auto back = core::modality_from_name(core::modality_name(m));
            REQUIRE(back.has_value());
            CHECK(*back == m);
        }
        CHECK_FALSE(core::modality_from_name("PPG").has_value());
    }

    TEST_CASE("validate_window rejects invariant violations") {
        MultimodalWindow w = testing::random_window(1, 16);
        CHECK_NOTHROW(core::validate_window(w));

        SUBCASE("unequal channel lengths") {
            w.channels[Modality::HR].pop_back();
            CHECK_THROWS_AS(core::validate_window(w), Error);
        }
        SUBCASE("t below 2") {
            for (auto& [m, s] : w.channels) s.resize(1);
            CHECK_THROWS_AS(core::validate_window(w), InvalidWindow);
        }
        SUBCASE("non-finite sample") {
            w.channels[Modality::EDA][3] = std::nan("");
            CHECK_THROWS_AS(core::validate_window(w), InvalidWindow);
        }
        SUBCASE("non-positive heart rate") {
            w.channels[Modality::HR][0] = 0.0;
            CHECK_THROWS_AS(core::validate_window(w), NonPositiveHeartRate);
        }
    }

    TEST_CASE("validate_dataset enforces shared geometry and label range") {
        Dataset ds;
        ds.class_names = {"neg", "pos"};
        ds.windows.push_back(testing::random_window(1, 16));
        ds.windows.push_back(testing::random_window(2, 16));
        ds.windows[0].label = 0;
        ds.windows[1].label = 1;
        CHECK_NOTHROW(core::validate_dataset(ds));

        SUBCASE("label out of range") {
            ds.windows[1].label = 2;
            CHECK_THROWS_AS(core::validate_dataset(ds), Error);
        }
        SUBCASE("mismatched t") {
            ds.windows.push_back(testing::random_window(3, 8));
            CHECK_THROWS_AS(core::validate_dataset(ds), Error);
        }
    }
}

TEST_SUITE("baselines") {
    TEST_CASE("mean of two constant HR windows") {
        Dataset train;
        train.split = Split::Train;
        train.windows.push_back(hr_only("a", {60.0, 60.0, 60.0}));
        train.windows.push_back(hr_only("b", {80.0, 80.0, 80.0}));
        auto b = core::compute_baselines(train);
        CHECK(b.at(Modality::HR) == doctest::Approx(70.0).epsilon(1e-15));
    }

    TEST_CASE("single constant TEMP window is the identity") {
        Dataset train;
        MultimodalWindow w;
        w.window_id = "t";
        w.subject_id = "s";
        w.sample_rate_hz = 4.0;
        w.channels[Modality::TEMP] = Samples(32, 34.0);
        train.windows.push_back(w);
        auto b = core::compute_baselines(train);
        CHECK(b.at(Modality::TEMP) == doctest::Approx(34.0).epsilon(1e-15));
    }

    TEST_CASE("matches a naive two-pass mean on random data") {
        Dataset train;
        for (int i = 0; i < 7; ++i) train.windows.push_back(testing::random_window(100 + i, 64));
        auto b = core::compute_baselines(train);

        for (auto m : core::kAllModalities) {
            // oracle: flatten, then naive accumulate
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& w : train.windows) {
                for (double v : w.channels.at(m)) {
                    sum += v;
                    ++n;
                }
            }
            CHECK(b.at(m) == doctest::Approx(sum / static_cast<double>(n)).epsilon(1e-12));
        }
    }

    TEST_CASE("permutation-invariant over windows") {
        Dataset a;
        for (int i = 0; i < 5; ++i) a.windows.push_back(testing::random_window(200 + i, 32));
        Dataset b = a;
        std::reverse(b.windows.begin(), b.windows.end());
        auto ba = core::compute_baselines(a);
        auto bb = core::compute_baselines(b);
        for (auto m : core::kAllModalities) CHECK(ba.at(m) == bb.at(m));
    }

    TEST_CASE("rejects empty and eval-split input") {
        Dataset empty;
        CHECK_THROWS_AS(core::compute_baselines(empty), EmptyDataset);
        Dataset ev;
        ev.split = Split::Eval;
        ev.windows.push_back(testing::random_window(1, 8));
        CHECK_THROWS_AS(core::compute_baselines(ev), InvalidConfig);
    }
}

TEST_SUITE("resultant_acceleration") {
    TEST_CASE("pythagorean triple and zeros") {
        auto r = core::resultant_acceleration({3.0, 0.0}, {4.0, 0.0}, {0.0, 0.0});
        CHECK(r[0] == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(r[1] == 0.0);
    }

    TEST_CASE("matches scalar loop on random axes") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> n(0.0, 1.0);
        Samples x(100), y(100), z(100);
        for (std::size_t i = 0; i < 100; ++i) {
            x[i] = n(rng);
            y[i] = n(rng);
            z[i] = n(rng);
        }
        auto r = core::resultant_acceleration(x, y, z);
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(std::abs(r[i] - std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i])) <= 1e-12);
        }
    }

    TEST_CASE("length mismatch") {
        CHECK_THROWS_AS(core::resultant_acceleration({1.0}, {1.0, 2.0}, {1.0}), LengthMismatch);
    }
}

TEST_SUITE("io") {
    Dataset two_window_dataset() {
        Dataset ds;
        ds.class_names = {"baseline", "event"};
        ds.windows.push_back(testing::random_window(31, 24));
        ds.windows.push_back(testing::random_window(32, 24));
        ds.windows[0].label = 0;
        ds.windows[1].label = 1;
        return ds;
    }

    void check_equal(const Dataset& a, const Dataset& b) {
        REQUIRE(a.windows.size() == b.windows.size());
        for (std::size_t i = 0; i < a.windows.size(); ++i) {
            const auto& wa = a.windows[i];
            const auto& wb = b.windows[i];
            CHECK(wa.window_id == wb.window_id);
            CHECK(wa.subject_id == wb.subject_id);
            CHECK(wa.label == wb.label);
            CHECK(wa.sample_rate_hz == wb.sample_rate_hz);
            REQUIRE(wa.channels.size() == wb.channels.size());
            for (const auto& [m, s] : wa.channels) {
                const auto& sb = wb.channels.at(m);
                REQUIRE(s.size() == sb.size());
                for (std::size_t k = 0; k < s.size(); ++k) {
                    CHECK(s[k] == sb[k]); // bit-exact round trip
                }
            }
        }
    }

    TEST_CASE("csv round trip is bit-exact") {
        auto ds = two_window_dataset();
        auto text = core::dataset_to_csv(ds);
        auto back = core::dataset_from_csv(text, ds.class_names);
        check_equal(ds, back);
    }

    TEST_CASE("json round trip is bit-exact") {
        auto ds = two_window_dataset();
        auto text = core::dataset_to_json(ds);
        auto back = core::dataset_from_json(text, ds.class_names);
        check_equal(ds, back);
    }

    TEST_CASE("save-load-save is byte-identical") {
        namespace fs = std::filesystem;
        auto ds = two_window_dataset();
        auto dir = fs::temp_directory_path() / "iic_io_test";
        fs::create_directories(dir);

        for (auto fmt : {core::DataFormat::Csv, core::DataFormat::Json}) {
            auto ext = fmt == core::DataFormat::Csv ? ".csv" : ".json";
            auto p1 = dir / (std::string("d1") + ext);
            auto p2 = dir / (std::string("d2") + ext);
            core::save_dataset(ds, p1, fmt);
            auto loaded = core::load_dataset(p1, fmt, ds.class_names);
            core::save_dataset(loaded, p2, fmt);

            std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
            std::stringstream s1, s2;
            s1 << f1.rdbuf();
            s2 << f2.rdbuf();
            CHECK(s1.str() == s2.str());
            CHECK_FALSE(s1.str().empty());
        }
        fs::remove_all(dir);
    }

    TEST_CASE("csv parse error names line and column") {
        auto ds = two_window_dataset();
        auto text = core::dataset_to_csv(ds);
        // corrupt the first data row's value field
        auto pos = text.find('\n');
        auto next = text.find('\n', pos + 1);
        auto row = text.substr(pos + 1, next - pos - 1);
        auto last_comma = row.rfind(',');
        text = text.substr(0, pos + 1) + row.substr(0, last_comma + 1) + "bogus" +
               text.substr(next);
        try {
            core::dataset_from_csv(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            std::string msg = e.what();
            CHECK(msg.find("line 2") != std::string::npos);
            CHECK(msg.find("value") != std::string::npos);
        }
    }

    TEST_CASE("json missing sample_rate_hz is a schema mismatch") {
        std::string text = R"([{"window_id":"w","subject_id":"s","label":0,)"
                           R"("channels":{"HR":[60.0,61.0]}}])";
        CHECK_THROWS_AS(core::dataset_from_json(text), SchemaMismatch);
    }

    TEST_CASE("unlabeled windows serialize with empty label") {
        Dataset ds;
        ds.windows.push_back(testing::random_window(9, 8));
        ds.windows[0].label.reset();
        auto csv_back = core::dataset_from_csv(core::dataset_to_csv(ds));
        CHECK_FALSE(csv_back.windows[0].label.has_value());
        auto json_back = core::dataset_from_json(core::dataset_to_json(ds));
        CHECK_FALSE(json_back.windows[0].label.has_value());
    }

    TEST_CASE("format_double is shortest round-trippable") {
        for (double v : {0.1, 1.0 / 3.0, 6e22, -0.0, 34.05, 60000.0 / 70.0}) {
            CHECK(std::stod(core::format_double(v)) == v);
        }
        CHECK(core::format_double(5.0) == "5");
    }
}

TEST_SUITE("resample") {
    TEST_CASE("identity when rates match") {
        Samples x = {1.0, 2.0, 3.0};
        CHECK(core::resample_linear(x, 4.0, 4.0) == x);
    }

    TEST_CASE("linear signal is reproduced exactly") {
        // x(t) = 2t sampled at 1 Hz, resampled to 4 Hz: on the line between
        // knots, held at the final sample past the last knot
        Samples x = {0.0, 2.0, 4.0, 6.0};
        auto y = core::resample_linear(x, 1.0, 4.0);
        REQUIRE(y.size() == 16);
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double expected = std::min(0.5 * static_cast<double>(i), 6.0);
            CHECK(y[i] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}
