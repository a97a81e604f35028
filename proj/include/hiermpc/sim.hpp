#pragma once

#include "hiermpc/planner.hpp"
#include "hiermpc/tracker.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hiermpc {

enum class DisturbanceKind { None, UniformInModeSet, VertexWorstCase, WindGust };

struct DisturbancePolicy {
    DisturbanceKind kind = DisturbanceKind::None;
    double scale = 1.0;
    Vec gust_vector;  // state-space gust added during on-intervals
    std::vector<std::pair<int, int>> gust_intervals;  // [start, end) in fine steps
};

/// splitmix64 stream; identical draws on every platform.
class SimRng {
  public:
    explicit SimRng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}
    double uniform() {  // [0, 1)
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return ((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    }
    double symmetric() { return 2.0 * uniform() - 1.0; }  // [-1, 1)

  private:
    std::uint64_t state_;
};

Vec step_plant(const LtiModel& model, const Vec& x, const Vec& u, const Vec& w);

Vec sample_disturbance(const DisturbancePolicy& policy, const Mode& mode, SimRng& rng,
                       int k = 0);

/// Fully prepared experiment; no file formats here.
struct SimSetup {
    ModelBundle model;
    std::vector<Mode> modes;
    std::vector<Obstacle> obstacles;
    PreparedPlanner prep;
    Mat K;
    Mat Q, R, P;
    Vec x0, goal;
    int N = 10;
    double alpha_x = 0.01, alpha_u = 0.01;
    double big_m = 1e4;
    IntersamplePolicy policy = IntersamplePolicy::SharedFace;
    bool open_loop = false;
    DisturbancePolicy disturbance;
    int max_steps = 400;
    double goal_tol = 0.05;
    long node_budget = 200000;
};

struct StepRecord {
    int k = 0;
    double t = 0.0;
    Vec x, u, w;
    int mode = -1;
    int L = 0;
    std::string plan_status = "-";  // set at planning instants
    std::string qp_status = "-";
    bool contract_ok = true;
    double obstacle_margin = 0.0;
    double plan_seconds = 0.0;
    double qp_seconds = 0.0;
    long plan_nodes = 0;
};

struct ClosedLoopLog {
    std::vector<StepRecord> steps;
    bool success = false;
    int steps_to_goal = -1;
    std::string failure;  // empty when clean

    struct PlanRecord {
        int k = 0;
        PlanResult result;
        Mat xref;  // n x (M+1)
    };
    std::vector<PlanRecord> plans;
    std::vector<Mat> z_nom;  // tracker nominal states per step
    std::vector<Mat> v_nom;
};

ClosedLoopLog run_closed_loop(const SimSetup& setup, std::uint64_t seed);

struct VerificationReport {
    long steps = 0;
    long state_violations = 0;
    long input_violations = 0;
    long obstacle_intrusions = 0;   // strict interior of a raw obstacle
    long contract_failures = 0;
    long chain_breaks = 0;          // infeasible after an initial optimal plan
    long out_of_bound_disturbances = 0;
    long aux_tube_failures = 0;     // auxiliary-law replay escaping its tube
    bool initial_plan_optimal = false;
    bool disturbances_in_bound = true;
    bool guarantees_in_force = false;
    bool success = false;
    double min_obstacle_margin = 0.0;

    bool clean() const {
        return state_violations == 0 && input_violations == 0 && obstacle_intrusions == 0 &&
               contract_failures == 0 && chain_breaks == 0;
    }
};

VerificationReport verify_log(const ClosedLoopLog& log, const SimSetup& setup);

void write_log_csv(const ClosedLoopLog& log, const SimSetup& setup, const std::string& path);
void write_log_json(const ClosedLoopLog& log, const SimSetup& setup, const std::string& path);

}  // namespace hiermpc
