#include "vf/forecast.hpp"

#include <algorithm>
#include <stdexcept>

namespace vf {

const char* forecast_space_name(ForecastSpace s) {
    return s == ForecastSpace::world ? "world" : "image";
}

const char* forecast_algo_name(ForecastAlgo a) {
    switch (a) {
        case ForecastAlgo::CVM: return "CVM";
        case ForecastAlgo::KF: return "KF";
        case ForecastAlgo::GT: return "GT";
    }
    return "?";
}

BoxState box_state_from_bbox(const BBox2D& b) {
    return {b.x + b.w / 2.0, b.y + b.h / 2.0, b.w, b.h};
}

BBox2D bbox_from_box_state(const BoxState& b) {
    return {b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.w, b.h};
}

BoxState box_state_from_cylinder(const Cylinder3D& c) {
    return {c.center.x, c.center.y, 2.0 * c.radius, c.height};
}

void TrackHistory::push(long step, const BoxState& box) {
    if (!samples_.empty() && step <= samples_.back().step)
        throw std::invalid_argument("TrackHistory: step indices must be strictly increasing");
    samples_.push_back({step, box});
    while (samples_.size() > window_) samples_.pop_front();
}

std::optional<Forecast> cvm_forecast(const TrackHistory& history, int horizon, int stride,
                                     bool window_fit) {
    const auto& samples = history.samples();
    if (samples.size() < 2) return std::nullopt;

    double vel[4] = {0, 0, 0, 0};
    auto components = [](const BoxState& b) {
        return std::array<double, 4>{b.cx, b.cy, b.w, b.h};
    };

    if (!window_fit) {
        const auto& last = samples.back();
        const auto& prev = samples[samples.size() - 2];
        const double gap = double(last.step - prev.step);
        const auto a = components(prev.box), b = components(last.box);
        for (int k = 0; k < 4; ++k) vel[k] = (b[k] - a[k]) / gap;
    } else {
        // Least-squares slope over the window, per component.
        const double n = double(samples.size());
        double mean_t = 0.0;
        for (const auto& s : samples) mean_t += double(s.step);
        mean_t /= n;
        double var_t = 0.0;
        std::array<double, 4> covs{0, 0, 0, 0}, means{0, 0, 0, 0};
        for (const auto& s : samples) {
            const auto c = components(s.box);
            for (int k = 0; k < 4; ++k) means[k] += c[k];
        }
        for (int k = 0; k < 4; ++k) means[k] /= n;
        for (const auto& s : samples) {
            const double dt = double(s.step) - mean_t;
            var_t += dt * dt;
            const auto c = components(s.box);
            for (int k = 0; k < 4; ++k) covs[k] += dt * (c[k] - means[k]);
        }
        for (int k = 0; k < 4; ++k) vel[k] = covs[k] / var_t;
    }

    if (history.space() == ForecastSpace::world) vel[2] = vel[3] = 0.0;  // constant extent

    Forecast f;
    f.object_id = history.object_id();
    f.algo = ForecastAlgo::CVM;
    f.space = history.space();
    const BoxState& last = samples.back().box;
    for (int i = 1; i <= horizon; ++i) {
        const double o = double(i * stride);
        f.boxes.push_back({i * stride,
                           BoxState{last.cx + o * vel[0], last.cy + o * vel[1],
                                    last.w + o * vel[2], last.h + o * vel[3]}});
    }
    return f;
}

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

Mat8 transition(double frames) {
    Mat8 F = Mat8::Identity();
    for (int i = 0; i < 4; ++i) F(i, i + 4) = frames;
    return F;
}

Mat8 process_noise(const KalmanConfig& c) {
    Mat8 Q = Mat8::Zero();
    Q(0, 0) = Q(1, 1) = c.q_pos;
    Q(2, 2) = Q(3, 3) = c.q_size;
    for (int i = 4; i < 8; ++i) Q(i, i) = c.q_vel;
    return Q;
}

Mat48 observation() {
    Mat48 H = Mat48::Zero();
    for (int i = 0; i < 4; ++i) H(i, i) = 1.0;
    return H;
}

}  // namespace

bool KalmanState::covariance_ok(double tol) const {
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol) return false;
    Eigen::LDLT<Mat8> ldlt(cov);
    return ldlt.vectorD().minCoeff() >= -tol;
}

KalmanState kf_init(const BoxState& measurement, const KalmanConfig& config) {
    KalmanState s;
    s.mean << measurement.cx, measurement.cy, measurement.w, measurement.h, 0, 0, 0, 0;
    for (int i = 0; i < 4; ++i) s.cov(i, i) = config.init_pos_var;
    for (int i = 4; i < 8; ++i) s.cov(i, i) = config.init_vel_var;
    return s;
}

KalmanState kf_step(const KalmanState& state, const BoxState& measurement,
                    const KalmanConfig& config, int gap) {
    if (gap < 1) throw std::invalid_argument("kf_step: gap must be >= 1");
    const Mat48 H = observation();
    const Mat4 R = Mat4::Identity() * config.r;

    KalmanState s = state;
    for (int i = 0; i < gap; ++i) {
        const Mat8 F = transition(1.0);
        s.mean = F * s.mean;
        s.cov = F * s.cov * F.transpose() + process_noise(config);
    }

    const Eigen::Vector4d z{measurement.cx, measurement.cy, measurement.w, measurement.h};
    const Mat4 S = H * s.cov * H.transpose() + R;
    Eigen::LLT<Mat4> llt(S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("kf_step: innovation covariance not invertible");
    const Eigen::Matrix<double, 8, 4> K = s.cov * H.transpose() * llt.solve(Mat4::Identity());

    s.mean += K * (z - H * s.mean);
    const Mat8 IKH = Mat8::Identity() - K * H;
    s.cov = IKH * s.cov * IKH.transpose() + K * R * K.transpose();  // Joseph form
    s.cov = ((s.cov + s.cov.transpose()) / 2.0).eval();
    if (!s.covariance_ok())
        throw std::runtime_error("kf_step: covariance lost symmetry/PSD");
    return s;
}

Forecast kf_forecast(const KalmanState& state, int horizon, int stride,
                     int object_id, ForecastSpace space) {
    Forecast f;
    f.object_id = object_id;
    f.algo = ForecastAlgo::KF;
    f.space = space;
    Vec8 mean = state.mean;
    const Mat8 F = transition(double(stride));
    for (int i = 1; i <= horizon; ++i) {
        mean = F * mean;
        f.boxes.push_back({i * stride,
                           BoxState{mean(0), mean(1), std::max(0.0, mean(2)), std::max(0.0, mean(3))}});
    }
    return f;
}

std::optional<Forecast> gt_forecast(const WorldState& world, const ScenarioConfig& config,
                                    int object_id, ForecastSpace space, int horizon, int stride) {
    const PedestrianState* ped = nullptr;
    for (const auto& p : world.pedestrians)
        if (p.id == object_id) { ped = &p; break; }
    if (!ped) throw std::invalid_argument("gt_forecast: unknown object id");

    Forecast f;
    f.object_id = object_id;
    f.algo = ForecastAlgo::GT;
    f.space = space;

    std::optional<BoxState> last_image_box;
    if (space == ForecastSpace::image) {
        if (auto b = project_cylinder(config.camera, world.agent.pose, ped->extent))
            last_image_box = box_state_from_bbox(*b);
    }

    PedestrianState future = *ped;
    for (int frame = 1; frame <= horizon * stride; ++frame) {
        future = pedestrian_advance(future, config.dt);
        if (frame % stride != 0) continue;
        if (space == ForecastSpace::world) {
            f.boxes.push_back({frame, box_state_from_cylinder(future.extent)});
        } else {
            if (auto b = project_cylinder(config.camera, world.agent.pose, future.extent))
                last_image_box = box_state_from_bbox(*b);
            if (!last_image_box) return std::nullopt;
            f.boxes.push_back({frame, *last_image_box});
        }
    }
    return f;
}

double ade(const Forecast& predicted, const std::vector<BoxState>& actual) {
    if (predicted.boxes.size() != actual.size())
        throw std::invalid_argument("ade: length mismatch");
    if (predicted.boxes.empty()) throw std::invalid_argument("ade: empty forecast");
    double sum = 0.0;
    for (size_t i = 0; i < actual.size(); ++i)
        sum += distance(predicted.boxes[i].box.center(), actual[i].center());
    return sum / double(actual.size());
}

double fde(const Forecast& predicted, const std::vector<BoxState>& actual) {
    if (predicted.boxes.empty() || actual.empty()) throw std::invalid_argument("fde: empty forecast");
    if (predicted.boxes.size() != actual.size())
        throw std::invalid_argument("fde: length mismatch");
    return distance(predicted.boxes.back().box.center(), actual.back().center());
}

}  // namespace vf
