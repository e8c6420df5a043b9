#include "linestab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "linestab/parallel.hpp"

namespace linestab::sim {

namespace {

// Uniform on [0, 1) from the top 53 bits; kept independent of the
// standard distributions so trajectories match across library versions.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double exponential(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

}  // namespace

void SimConfig::validate() const {
    network.validate();
    fairness.validate();
    if (!(arrival_rate >= 0.0) || !std::isfinite(arrival_rate)) throw std::domain_error("arrival_rate must be >= 0");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::domain_error("horizon must be positive");
    if (!(sample_interval > 0.0) || sample_interval > horizon) {
        throw std::domain_error("sample_interval must lie in (0, horizon]");
    }
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = std::min(t.size(), y.size());
    if (n < 2) return 0.0;
    double tm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (t[i] - tm) * (y[i] - ym);
        sxx += (t[i] - tm) * (t[i] - tm);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

SimReport simulate(const SimConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.network.n_stations;
    const double lambda = cfg.arrival_rate;
    const double arrival_total = lambda * static_cast<double>(n);

    std::mt19937_64 rng(cfg.seed);
    QueueState state{std::vector<std::int64_t>(n, 0)};
    std::vector<double> area(n, 0.0);
    SimReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();

    const auto samples = static_cast<std::size_t>(std::floor(cfg.horizon / cfg.sample_interval)) + 1;
    rep.time_grid.reserve(samples);
    rep.total_queue.reserve(samples);
    std::size_t next_sample = 0;
    std::int64_t total = 0;

    auto record_until = [&](double t_end) {
        while (next_sample < samples) {
            const double ts = static_cast<double>(next_sample) * cfg.sample_interval;
            if (ts > t_end) break;
            rep.time_grid.push_back(ts);
            rep.total_queue.push_back(total);
            ++next_sample;
        }
    };

    auto allocate = [&]() -> PowerAllocation {
        auto p = allocator::allocate(cfg.model, state, cfg.fairness, cfg.network);
        if (cfg.track_slack && !state.empty_network()) {
            rep.min_slack = std::min(rep.min_slack, powerflow::feasible(p, cfg.network, cfg.model).slack);
        }
        return p;
    };

    double t = 0.0;
    PowerAllocation p = PowerAllocation::zeros(n);
    try {
        for (;;) {
            const double service_total = p.total();
            const double rate = arrival_total + service_total;
            const double t_next = rate > 0.0 ? t + exponential(rng, rate) : std::numeric_limits<double>::infinity();
            const double t_stop = std::min(t_next, cfg.horizon);
            record_until(t_stop);
            for (std::size_t j = 0; j < n; ++j) area[j] += static_cast<double>(state.x[j]) * (t_stop - t);
            t = t_stop;
            if (t_next > cfg.horizon) break;

            const double pick = uniform01(rng) * rate;
            if (pick < arrival_total) {
                const auto j = std::min(n - 1, static_cast<std::size_t>(pick / lambda));
                ++state.x[j];
                ++total;
                ++rep.arrivals;
            } else {
                double acc = arrival_total;
                std::size_t chosen = n;
                for (std::size_t j = 0; j < n; ++j) {
                    if (p[j] <= 0.0) continue;
                    chosen = j;
                    acc += p[j];
                    if (pick < acc) break;
                }
                --state.x[chosen];
                --total;
                ++rep.departures;
            }
            ++rep.events;
            rep.max_total_queue = std::max(rep.max_total_queue, total);
            p = allocate();
        }
    } catch (const std::exception& e) {
        rep.aborted = true;
        rep.error = e.what();
    }

    rep.end_time = t;
    rep.final_total_queue = total;
    rep.per_station_mean.resize(n);
    rep.mean_total_queue = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        rep.per_station_mean[j] = t > 0.0 ? area[j] / t : 0.0;
        rep.mean_total_queue += rep.per_station_mean[j];
    }
    if (!cfg.track_slack) rep.min_slack = 0.0;

    std::vector<double> tail_t, tail_q;
    for (std::size_t i = 0; i < rep.time_grid.size(); ++i) {
        if (rep.time_grid[i] >= 0.5 * cfg.horizon) {
            tail_t.push_back(rep.time_grid[i]);
            tail_q.push_back(static_cast<double>(rep.total_queue[i]));
        }
    }
    rep.drift_estimate = fit_slope(tail_t, tail_q);
    return rep;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Stable: return "STABLE";
        case Verdict::Unstable: return "UNSTABLE";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

int ProbeResult::stable_count() const {
    return static_cast<int>(std::count_if(replications.begin(), replications.end(),
                                          [](const ReplicationOutcome& r) { return r.stable; }));
}

int ProbeResult::unstable_count() const {
    return static_cast<int>(std::count_if(replications.begin(), replications.end(),
                                          [](const ReplicationOutcome& r) { return r.unstable; }));
}

std::vector<ProbeResult> stability_probe(const SimConfig& base, const std::vector<double>& multipliers,
                                         const ProbeOptions& opts) {
    base.validate();
    if (opts.replications < 1) throw std::domain_error("replications must be >= 1");
    const std::size_t n = base.network.n_stations;
    const double nd = static_cast<double>(n);
    const auto reps = static_cast<std::size_t>(opts.replications);

    std::vector<ProbeResult> results(multipliers.size());
    std::vector<SimConfig> configs;
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        const double m = multipliers[i];
        if (!(m > 0.0)) throw std::domain_error("multipliers must be positive");
        auto& res = results[i];
        res.multiplier = m;
        res.arrival_rate = m * base.arrival_rate;
        res.drift_threshold = opts.drift_factor * nd * res.arrival_rate;
        res.queue_cap = static_cast<std::int64_t>(opts.queue_cap_factor * nd);
        res.replications.resize(reps);
    }

    parallel_for(multipliers.size() * reps, opts.threads, [&](std::size_t task) {
        const std::size_t i = task / reps;
        const std::size_t k = task % reps;
        auto& res = results[i];
        SimConfig cfg = base;
        cfg.arrival_rate = res.arrival_rate;
        cfg.seed = base.seed + k;
        if (opts.events_target > 0.0 && res.arrival_rate > 0.0) {
            cfg.horizon = opts.events_target / (nd * res.arrival_rate);
            cfg.sample_interval = cfg.horizon / 1000.0;
        }
        SimReport rep = simulate(cfg);
        auto& out = res.replications[k];
        out.seed = cfg.seed;
        out.drift = rep.drift_estimate;
        out.max_queue = rep.max_total_queue;
        out.mean_queue = rep.mean_total_queue;
        out.events = rep.events;
        out.aborted = rep.aborted;
        out.error = rep.error;
        out.stable = !rep.aborted && rep.drift_estimate < res.drift_threshold && rep.max_total_queue < res.queue_cap;
        out.unstable = !rep.aborted && rep.drift_estimate > res.drift_threshold;
        if (k == 0) res.first_report = std::move(rep);
    });

    for (auto& res : results) {
        const int majority = opts.replications / 2 + 1;
        if (res.stable_count() >= majority) {
            res.verdict = Verdict::Stable;
        } else if (res.unstable_count() >= majority) {
            res.verdict = Verdict::Unstable;
        } else {
            res.verdict = Verdict::Inconclusive;
        }
        for (const auto& rep : res.replications) {
            if (rep.aborted) throw std::runtime_error("stability_probe: simulation aborted: " + rep.error);
        }
    }
    return results;
}

}  // namespace linestab::sim
