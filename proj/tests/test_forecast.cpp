#include <doctest.h>

#include <random>

#include "vf/forecast.hpp"
#include "vf/rng.hpp"

using namespace vf;

namespace {

TrackHistory make_history(ForecastSpace space, const std::vector<std::pair<long, BoxState>>& samples) {
    TrackHistory h(0, space);
    for (const auto& [step, box] : samples) h.push(step, box);
    return h;
}

}  // namespace

TEST_CASE("cvm_forecast linear extrapolation") {
    SUBCASE("unit velocity, consecutive steps") {
        const auto h = make_history(ForecastSpace::image,
                                    {{0, {0, 0, 2, 2}}, {1, {1, 0, 2, 2}}});
        const auto f = cvm_forecast(h, 2, 1);
        REQUIRE(f);
        CHECK(f->boxes[0].box.cx == doctest::Approx(2.0));
        CHECK(f->boxes[0].box.cy == doctest::Approx(0.0));
        CHECK(f->boxes[1].box.cx == doctest::Approx(3.0));
    }
    SUBCASE("stationary history repeats the last box") {
        const auto h = make_history(ForecastSpace::image,
                                    {{0, {4, 5, 2, 3}}, {1, {4, 5, 2, 3}}});
        const auto f = cvm_forecast(h, 5, 4);
        REQUIRE(f);
        for (const auto& e : f->boxes) {
            CHECK(e.box.cx == 4.0);
            CHECK(e.box.cy == 5.0);
            CHECK(e.box.w == 2.0);
            CHECK(e.box.h == 3.0);
        }
    }
    SUBCASE("matches the closed-form oracle at stride 4") {
        const Vec2 vel{0.3, -0.1};  // per step
        const BoxState last{10.0, 20.0, 2.0, 4.0};
        const auto h = make_history(
            ForecastSpace::image,
            {{6, {last.cx - vel.x, last.cy - vel.y, 2.0, 4.0}}, {7, last}});
        const auto f = cvm_forecast(h, 5, 4);
        REQUIRE(f);
        REQUIRE(f->boxes.size() == 5);
        for (int i = 1; i <= 5; ++i) {
            const auto& e = f->boxes[size_t(i - 1)];
            CHECK(e.offset == 4 * i);
            CHECK(e.box.cx == doctest::Approx(last.cx + 4.0 * i * vel.x).epsilon(1e-12));
            CHECK(e.box.cy == doctest::Approx(last.cy + 4.0 * i * vel.y).epsilon(1e-12));
        }
    }
    SUBCASE("fewer than two samples produces no forecast") {
        const auto h = make_history(ForecastSpace::image, {{0, {0, 0, 1, 1}}});
        CHECK_FALSE(cvm_forecast(h, 5, 4));
    }
    SUBCASE("world space keeps the extent constant") {
        const auto h = make_history(ForecastSpace::world,
                                    {{0, {0, 0, 0.6, 1.7}}, {1, {1, 0, 0.8, 1.9}}});
        const auto f = cvm_forecast(h, 3, 1);
        REQUIRE(f);
        for (const auto& e : f->boxes) {
            CHECK(e.box.w == 0.8);
            CHECK(e.box.h == 1.9);
        }
    }
}

TEST_CASE("cvm_forecast is translation-equivariant (property)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::pair<long, BoxState>> samples;
        double cx = uniform_double(rng, -10, 10), cy = uniform_double(rng, -10, 10);
        const double vx = uniform_double(rng, -1, 1), vy = uniform_double(rng, -1, 1);
        for (long s = 0; s < 5; ++s) {
            samples.push_back({s, {cx + vx * s, cy + vy * s, 2, 3}});
        }
        const Vec2 shift{uniform_double(rng, -20, 20), uniform_double(rng, -20, 20)};
        auto shifted = samples;
        for (auto& [step, box] : shifted) {
            box.cx += shift.x;
            box.cy += shift.y;
        }
        const auto f0 = cvm_forecast(make_history(ForecastSpace::image, samples), 5, 4);
        const auto f1 = cvm_forecast(make_history(ForecastSpace::image, shifted), 5, 4);
        REQUIRE(f0);
        REQUIRE(f1);
        for (size_t i = 0; i < f0->boxes.size(); ++i) {
            CHECK(f1->boxes[i].box.cx ==
                  doctest::Approx(f0->boxes[i].box.cx + shift.x).epsilon(1e-12).scale(1.0));
            CHECK(f1->boxes[i].box.cy ==
                  doctest::Approx(f0->boxes[i].box.cy + shift.y).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("kf_init") {
    const KalmanState s = kf_init({10, 10, 2, 4});
    CHECK(s.mean(0) == 10.0);
    CHECK(s.mean(1) == 10.0);
    CHECK(s.mean(2) == 2.0);
    CHECK(s.mean(3) == 4.0);
    for (int i = 4; i < 8; ++i) CHECK(s.mean(i) == 0.0);
    for (int i = 0; i < 8; ++i) CHECK(s.cov(i, i) > 0.0);
    // Uninformed velocity prior: velocity variance >= position variance.
    for (int i = 0; i < 4; ++i) CHECK(s.cov(i + 4, i + 4) >= s.cov(i, i));
}

TEST_CASE("kf_step properties") {
    SUBCASE("measurement equal to the prediction keeps the mean") {
        KalmanState s = kf_init({5, 5, 2, 2});
        s.mean(4) = 0.5;  // moving in x
        const KalmanState pred_probe = s;
        // Predicted mean after one step:
        const BoxState predicted{pred_probe.mean(0) + 0.5, pred_probe.mean(1),
                                 pred_probe.mean(2), pred_probe.mean(3)};
        const KalmanState next = kf_step(s, predicted);
        CHECK(next.mean(0) == doctest::Approx(predicted.cx).epsilon(1e-12));
        CHECK(next.mean(1) == doctest::Approx(predicted.cy).epsilon(1e-12));
        CHECK(next.mean(4) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("update never grows the position variance") {
        KalmanState s = kf_init({0, 0, 1, 1});
        std::mt19937_64 rng(77);
        KalmanConfig cfg;
        for (int i = 0; i < 50; ++i) {
            // Variance after predict, before update:
            Eigen::Matrix<double, 8, 8> F = Eigen::Matrix<double, 8, 8>::Identity();
            for (int k = 0; k < 4; ++k) F(k, k + 4) = 1.0;
            const double pred_var = (F * s.cov * F.transpose())(0, 0) + cfg.q_pos;
            s = kf_step(s, {uniform_double(rng, -1, 1), uniform_double(rng, -1, 1),
                            uniform_double(rng, 0.5, 2), uniform_double(rng, 0.5, 2)},
                        cfg);
            CHECK(s.cov(0, 0) <= pred_var + 1e-12);
        }
    }
    SUBCASE("covariance stays symmetric PSD over 1000 random updates") {
        KalmanState s = kf_init({0, 0, 1, 1});
        std::mt19937_64 rng(123);
        for (int i = 0; i < 1000; ++i) {
            s = kf_step(s, {uniform_double(rng, -50, 50), uniform_double(rng, -50, 50),
                            uniform_double(rng, 0, 10), uniform_double(rng, 0, 10)});
            REQUIRE(s.covariance_ok(1e-9));
        }
    }
}

TEST_CASE("KF on noiseless constant-velocity input converges to CVM") {
    std::mt19937_64 rng(17);
    const KalmanConfig cfg = KalmanConfig::noiseless();
    for (int trial = 0; trial < 50; ++trial) {
        const BoxState start{uniform_double(rng, -20, 20), uniform_double(rng, -20, 20),
                             uniform_double(rng, 1, 5), uniform_double(rng, 1, 5)};
        const double vx = uniform_double(rng, -1, 1);
        const double vy = uniform_double(rng, -1, 1);

        std::vector<std::pair<long, BoxState>> samples;
        for (long k = 0; k <= 5; ++k)
            samples.push_back({k, {start.cx + vx * k, start.cy + vy * k, start.w, start.h}});

        KalmanState s = kf_init(samples[0].second, cfg);
        for (size_t k = 1; k < samples.size(); ++k) s = kf_step(s, samples[k].second, cfg);

        const auto cvm = cvm_forecast(make_history(ForecastSpace::image, samples), 5, 4);
        const Forecast kf = kf_forecast(s, 5, 4);
        REQUIRE(cvm);
        for (size_t i = 0; i < kf.boxes.size(); ++i) {
            CHECK(std::abs(kf.boxes[i].box.cx - cvm->boxes[i].box.cx) < 1e-6);
            CHECK(std::abs(kf.boxes[i].box.cy - cvm->boxes[i].box.cy) < 1e-6);
        }
    }
}

TEST_CASE("kf_forecast") {
    SUBCASE("zero velocity repeats the current box") {
        const KalmanState s = kf_init({3, 4, 2, 2});
        const Forecast f = kf_forecast(s, 5, 4);
        for (const auto& e : f.boxes) {
            CHECK(e.box.cx == 3.0);
            CHECK(e.box.cy == 4.0);
        }
    }
    SUBCASE("unit x velocity advances 4, 8, ..., 20") {
        KalmanState s = kf_init({0, 0, 2, 2});
        s.mean(4) = 1.0;
        const Forecast f = kf_forecast(s, 5, 4);
        for (int i = 1; i <= 5; ++i)
            CHECK(f.boxes[size_t(i - 1)].box.cx == doctest::Approx(4.0 * i));
    }
    SUBCASE("negative sizes are floored at zero") {
        KalmanState s = kf_init({0, 0, 1, 1});
        s.mean(6) = -1.0;  // shrinking width
        const Forecast f = kf_forecast(s, 5, 4);
        for (const auto& e : f.boxes) CHECK(e.box.w >= 0.0);
    }
    SUBCASE("matches the matrix-power oracle on random states") {
        std::mt19937_64 rng(907);
        for (int trial = 0; trial < 30; ++trial) {
            KalmanState s = kf_init({uniform_double(rng, -10, 10), uniform_double(rng, -10, 10),
                                     uniform_double(rng, 10, 20), uniform_double(rng, 10, 20)});
            for (int i = 4; i < 8; ++i) s.mean(i) = uniform_double(rng, -0.5, 0.5);
            const int stride = 1 + int(rng() % 5);
            const int horizon = 1 + int(rng() % 6);
            const Forecast f = kf_forecast(s, horizon, stride);

            Eigen::Matrix<double, 8, 8> F = Eigen::Matrix<double, 8, 8>::Identity();
            for (int k = 0; k < 4; ++k) F(k, k + 4) = 1.0;
            for (int i = 1; i <= horizon; ++i) {
                Eigen::Matrix<double, 8, 8> Fo = Eigen::Matrix<double, 8, 8>::Identity();
                for (int p = 0; p < i * stride; ++p) Fo = F * Fo;
                const Eigen::Matrix<double, 8, 1> m = Fo * s.mean;
                const auto& e = f.boxes[size_t(i - 1)];
                CHECK(std::abs(e.box.cx - m(0)) < 1e-9);
                CHECK(std::abs(e.box.cy - m(1)) < 1e-9);
                CHECK(std::abs(e.box.w - std::max(0.0, m(2))) < 1e-9);
                CHECK(std::abs(e.box.h - std::max(0.0, m(3))) < 1e-9);
            }
        }
    }
}

TEST_CASE("gt_forecast is exact on deterministic motion") {
    ScenarioConfig c;
    c.name = "gt-test";
    c.road_polygons = {{{-100, -100}, {100, -100}, {100, 100}, {-100, 100}}};
    c.agent_start = Pose2D({0, 0}, 0.0);
    c.goal = {50, 0};
    PedestrianSpec spec;
    spec.waypoints = {{10, -5}, {10, 5}};
    spec.speed_min = spec.speed_max = 1.2;
    c.pedestrians = {spec};

    WorldState w = sample_scenario(c, 9);
    const auto f = gt_forecast(w, c, 0, ForecastSpace::world, c.forecast_horizon, c.forecast_stride);
    REQUIRE(f);

    // Realized future via actually stepping the world.
    std::vector<BoxState> actual;
    WorldState future = w;
    for (int frame = 1; frame <= c.forecast_horizon * c.forecast_stride; ++frame) {
        step(future, Action::noop(), c);
        if (frame % c.forecast_stride == 0)
            actual.push_back(box_state_from_cylinder(future.pedestrians[0].extent));
    }
    CHECK(ade(*f, actual) == 0.0);
    CHECK(fde(*f, actual) == 0.0);

    SUBCASE("stationary pedestrian: GT equals CVM equals current box") {
        ScenarioConfig cs = c;
        cs.pedestrians[0].speed_min = cs.pedestrians[0].speed_max = 0.0;
        WorldState ws = sample_scenario(cs, 9);
        const auto gt = gt_forecast(ws, cs, 0, ForecastSpace::world, 5, 4);
        TrackHistory h(0, ForecastSpace::world);
        h.push(0, box_state_from_cylinder(ws.pedestrians[0].extent));
        step(ws, Action::noop(), cs);
        h.push(1, box_state_from_cylinder(ws.pedestrians[0].extent));
        const auto cvm = cvm_forecast(h, 5, 4);
        REQUIRE(gt);
        REQUIRE(cvm);
        for (size_t i = 0; i < gt->boxes.size(); ++i) {
            CHECK(gt->boxes[i].box.cx == cvm->boxes[i].box.cx);
            CHECK(gt->boxes[i].box.cy == cvm->boxes[i].box.cy);
        }
    }
    SUBCASE("unknown object id throws") {
        CHECK_THROWS_AS(gt_forecast(w, c, 42, ForecastSpace::world, 5, 4), std::invalid_argument);
    }
}

TEST_CASE("ade and fde") {
    Forecast f;
    f.boxes = {{4, {0, 0, 1, 1}}, {8, {1, 0, 1, 1}}, {12, {2, 0, 1, 1}},
               {16, {3, 0, 1, 1}}, {20, {4, 0, 1, 1}}};

    SUBCASE("identical sequences give zero") {
        std::vector<BoxState> actual;
        for (const auto& e : f.boxes) actual.push_back(e.box);
        CHECK(ade(f, actual) == 0.0);
        CHECK(fde(f, actual) == 0.0);
    }
    SUBCASE("constant offset gives that offset") {
        std::vector<BoxState> actual;
        for (const auto& e : f.boxes) actual.push_back({e.box.cx + 0.5, e.box.cy, 1, 1});
        CHECK(ade(f, actual) == doctest::Approx(0.5));
    }
    SUBCASE("final-step-only error: fde 1.0, ade 0.2") {
        std::vector<BoxState> actual;
        for (const auto& e : f.boxes) actual.push_back(e.box);
        actual.back().cx += 1.0;
        CHECK(fde(f, actual) == doctest::Approx(1.0));
        CHECK(ade(f, actual) == doctest::Approx(0.2));
    }
    SUBCASE("hand-summed random pairs match exactly") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            Forecast p;
            std::vector<BoxState> actual;
            double sum = 0.0;
            for (int i = 1; i <= 5; ++i) {
                const BoxState a{uniform_double(rng, -5, 5), uniform_double(rng, -5, 5), 1, 1};
                const BoxState b{uniform_double(rng, -5, 5), uniform_double(rng, -5, 5), 1, 1};
                p.boxes.push_back({4 * i, a});
                actual.push_back(b);
                sum += std::hypot(a.cx - b.cx, a.cy - b.cy);
            }
            CHECK(ade(p, actual) == doctest::Approx(sum / 5.0).epsilon(1e-12));
            CHECK(fde(p, actual) >= 0.0);
        }
    }
    SUBCASE("errors") {
        std::vector<BoxState> actual = {{0, 0, 1, 1}};
        CHECK_THROWS_AS(ade(f, actual), std::invalid_argument);
        Forecast empty;
        CHECK_THROWS_AS(fde(empty, {}), std::invalid_argument);
    }
}

TEST_CASE("ade >= 0 and zero iff centers coincide (property)") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        Forecast p;
        std::vector<BoxState> actual;
        bool identical = true;
        for (int i = 1; i <= 5; ++i) {
            const BoxState a{uniform_double(rng, -5, 5), uniform_double(rng, -5, 5), 1, 1};
            BoxState b = a;
            if (rng() % 3 == 0) {
                b.cx += uniform_double(rng, 0.01, 1.0);
                identical = false;
            }
            p.boxes.push_back({4 * i, a});
            actual.push_back(b);
        }
        const double v = ade(p, actual);
        CHECK(v >= 0.0);
        CHECK((v == 0.0) == identical);
    }
}

TEST_CASE("history window drops the oldest samples") {
    TrackHistory h(0, ForecastSpace::image, 8);
    for (long s = 0; s < 20; ++s) h.push(s, {double(s), 0, 1, 1});
    CHECK(h.size() == 8);
    CHECK(h.samples().front().step == 12);
    CHECK_THROWS_AS(h.push(5, {0, 0, 1, 1}), std::invalid_argument);
}

TEST_CASE("noisy constant-velocity tracks: CVM and KF ADE within 2x (Monte-Carlo)") {
    std::mt19937_64 rng(2024);
    const int stride = 4;
    const int horizon = 5;
    const double sigma = 0.05;
    double sum_cvm = 0.0, sum_kf = 0.0;
    const int tracks = 100;
    for (int t = 0; t < tracks; ++t) {
        const Vec2 start{uniform_double(rng, 0, 20), uniform_double(rng, 0, 20)};
        const double speed = uniform_double(rng, 0.3, 1.5);
        const double dir = uniform_double(rng, -kPi, kPi);
        const Vec2 vel{speed * std::cos(dir) * 0.05, speed * std::sin(dir) * 0.05};

        // History at twice the forecast interval, matching the synthetic
        // generator of the forecast-quality evaluation.
        TrackHistory hist(t, ForecastSpace::world);
        std::optional<KalmanState> kf;
        long prev_step = 0;
        for (int k = 0; k < 8; ++k) {
            const long s = long(k) * 2 * stride;
            const Vec2 pos = start + vel * double(s);
            const BoxState z{pos.x + normal_double(rng, 0, sigma),
                             pos.y + normal_double(rng, 0, sigma), 0.6, 1.7};
            hist.push(s, z);
            if (!kf) kf = kf_init(z);
            else kf = kf_step(*kf, z, {}, int(s - prev_step));
            prev_step = s;
        }
        std::vector<BoxState> actual;
        for (int i = 1; i <= horizon; ++i) {
            const Vec2 pos = start + vel * double(prev_step + i * stride);
            actual.push_back({pos.x, pos.y, 0.6, 1.7});
        }
        const auto fc = cvm_forecast(hist, horizon, stride);
        REQUIRE(fc);
        sum_cvm += ade(*fc, actual);
        sum_kf += ade(kf_forecast(*kf, horizon, stride), actual);
    }
    const double mean_cvm = sum_cvm / tracks;
    const double mean_kf = sum_kf / tracks;
    CHECK(mean_cvm <= 2.0 * mean_kf);
    CHECK(mean_kf <= 2.0 * mean_cvm);
}
