#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linestab/allocator.hpp"
#include "linestab/powerflow.hpp"

// Continuous-time Markov chain of the charging network. Each station
// receives Poisson(lambda) arrivals; with exponential job sizes shared
// equally inside a station, station j empties at rate p_j(X), where p(X)
// is the alpha-fair allocation recomputed after every event.

namespace linestab::sim {

struct SimConfig {
    NetworkConfig network;
    FairnessSpec fairness;
    FlowModel model = FlowModel::LinDist;
    double arrival_rate = 0.0;  // per station
    double horizon = 1.0;       // simulated time
    std::uint64_t seed = 0;
    double sample_interval = 1.0;
    bool track_slack = false;   // evaluate the constraint slack at every event

    void validate() const;
};

struct SimReport {
    std::vector<double> time_grid;
    std::vector<std::int64_t> total_queue;
    std::vector<double> per_station_mean;  // time averages
    double mean_total_queue = 0.0;         // time average
    std::int64_t max_total_queue = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    std::uint64_t events = 0;
    std::int64_t final_total_queue = 0;
    double drift_estimate = 0.0;  // slope of total queue over the last half of the horizon
    double min_slack = 0.0;       // only meaningful with track_slack
    double end_time = 0.0;
    bool aborted = false;
    std::string error;
};

/// Gillespie next-event simulation from the empty state. Deterministic given
/// the seed. An allocator failure ends the run early with aborted = true.
SimReport simulate(const SimConfig& cfg);

/// Least-squares slope of y against t.
double fit_slope(const std::vector<double>& t, const std::vector<double>& y);

enum class Verdict { Stable, Unstable, Inconclusive };
const char* to_string(Verdict v);

struct ProbeOptions {
    int replications = 5;
    double drift_factor = 0.05;  // epsilon_drift = drift_factor * N * lambda
    double queue_cap_factor = 50.0;  // Q_cap = queue_cap_factor * N
    double events_target = 1e5;  // horizon = events_target / (N lambda) when > 0
    int threads = 1;
};

struct ReplicationOutcome {
    std::uint64_t seed = 0;
    double drift = 0.0;
    std::int64_t max_queue = 0;
    double mean_queue = 0.0;
    std::uint64_t events = 0;
    bool stable = false;    // drift < eps and max queue < cap
    bool unstable = false;  // drift > eps
    bool aborted = false;
    std::string error;
};

struct ProbeResult {
    double multiplier = 0.0;
    double arrival_rate = 0.0;
    double drift_threshold = 0.0;
    std::int64_t queue_cap = 0;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<ReplicationOutcome> replications;
    SimReport first_report;  // trajectory of replication 0

    int stable_count() const;
    int unstable_count() const;
};

/// base.arrival_rate is the model threshold lambda_N; every multiplier m is
/// run at m * lambda_N with seeds base.seed + k, k < replications.
std::vector<ProbeResult> stability_probe(const SimConfig& base, const std::vector<double>& multipliers,
                                         const ProbeOptions& opts = {});

}  // namespace linestab::sim
