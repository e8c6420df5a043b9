// linestab: thresholds, Newton tables, P(delta), continuum convergence,
// allocations and queue simulations for a line charging network, as CSV.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csv.hpp"
#include "linestab/allocator.hpp"
#include "linestab/parallel.hpp"
#include "linestab/powerflow.hpp"
#include "linestab/simulator.hpp"
#include "linestab/stability.hpp"

namespace {

using namespace linestab;
using cli::CsvWriter;
using cli::fmt_fixed;
using cli::fmt_sig;

constexpr const char* kToolVersion = "0.1.0";

enum ExitCode { kOk = 0, kValidation = 2, kSolver = 3, kSimulation = 4 };

struct SimulationAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
};

struct Thresholds {
    std::vector<std::size_t> n{10};
    double r = 1.0;
    double delta = 0.05;
    std::string model = "both";
};

struct Newton {
    std::vector<double> a{0.01, 0.05, 0.1};
    std::vector<std::size_t> n{10, 100, 1000, 10000, 100000};
    double stop_tol = 1e-10;
    int max_iter = 50;
};

struct Ratio {
    std::vector<double> deltas;
    double from = 0.01;
    double to = 0.5;
    int points = 50;
};

struct Converge {
    double a = 0.05;
    std::vector<std::size_t> n{10, 100, 1000, 10000, 100000};
};

struct Network {
    std::size_t n = 5;
    double r = 1.0;
    double delta = 0.1;
    double alpha = 1.0;
    std::string model = "lindist";
};

struct Simulate {
    Network net;
    std::vector<double> mult{0.5};
    int replications = 5;
    double events = 1e5;
    std::string trajectory;
};

struct Allocate {
    Network net;
    std::vector<std::int64_t> x;
};

void validate_network(const Network& net) {
    NetworkConfig{net.n, net.r, net.delta}.validate();
    FairnessSpec{net.alpha}.validate();
    parse_flow_model(net.model);
}

void run_thresholds(const Thresholds& opt, const Globals& g, std::ostream& out) {
    if (opt.model != "both" && opt.model != "lindist" && opt.model != "distflow") {
        throw std::domain_error("--model must be lindist, distflow or both");
    }
    std::vector<FlowModel> models;
    if (opt.model != "distflow") models.push_back(FlowModel::LinDist);
    if (opt.model != "lindist") models.push_back(FlowModel::Distflow);
    for (std::size_t n : opt.n) NetworkConfig{n, opt.r, opt.delta}.validate();

    struct Row { FlowModel model; std::size_t n; double lambda; double critical; };
    std::vector<Row> rows;
    for (std::size_t n : opt.n) {
        for (FlowModel m : models) rows.push_back({m, n, 0.0, 0.0});
    }
    parallel_for(rows.size(), g.threads, [&](std::size_t i) {
        auto& row = rows[i];
        const NetworkConfig cfg{row.n, opt.r, opt.delta};
        row.lambda = stability::lambda_threshold(cfg, row.model);
        row.critical = row.model == FlowModel::LinDist ? stability::lambda_lin_critical(opt.r, opt.delta)
                                                       : stability::lambda_dist_critical(opt.r, opt.delta);
    });

    CsvWriter csv(out);
    csv.row({"model", "n", "r", "delta", "lambda_n", "scaled_lambda_n", "lambda_c"});
    for (const auto& row : rows) {
        const double nd = static_cast<double>(row.n);
        csv.row({to_string(row.model), std::to_string(row.n), fmt_sig(opt.r), fmt_sig(opt.delta),
                 fmt_sig(row.lambda), fmt_sig(nd * nd * row.lambda), fmt_sig(row.critical)});
    }
}

void run_newton(const Newton& opt, const Globals& g, std::ostream& out) {
    for (double a : opt.a) {
        if (!(a > 0.0 && a < 2.0)) throw std::domain_error("--a values must lie in (0, 2)");
    }
    for (std::size_t n : opt.n) {
        if (n < 2) throw std::domain_error("--n values must be >= 2");
    }
    struct Row { double a; std::size_t n; double target; stability::NewtonTrace trace; };
    std::vector<Row> rows;
    for (double a : opt.a) {
        for (std::size_t n : opt.n) rows.push_back({a, n, 0.0, {}});
    }
    const stability::NewtonOptions nopts{opt.stop_tol, opt.max_iter};
    parallel_for(rows.size(), g.threads, [&](std::size_t i) {
        auto& row = rows[i];
        row.target = powerflow::distflow_sensitivity(row.a, row.n).v_n;
        row.trace = stability::newton_solve_a_for_voltage(row.n, row.target, nopts);
    });

    CsvWriter csv(out);
    csv.row({"a", "n", "inv_one_minus_delta", "a0", "a_bar", "iterations"});
    for (const auto& row : rows) {
        csv.row({fmt_sig(row.a), std::to_string(row.n), fmt_fixed(row.target), fmt_fixed(row.trace.a0),
                 fmt_fixed(row.trace.a_final), std::to_string(row.trace.iterations)});
    }
}

void run_ratio(const Ratio& opt, std::ostream& out) {
    std::vector<double> grid = opt.deltas;
    if (grid.empty()) {
        if (opt.points < 2) throw std::domain_error("--points must be >= 2");
        validate_delta(opt.from);
        validate_delta(opt.to);
        for (int i = 0; i < opt.points; ++i) {
            grid.push_back(opt.from + (opt.to - opt.from) * i / (opt.points - 1));
        }
        grid.back() = opt.to;
    }
    for (double d : grid) validate_delta(d);

    CsvWriter csv(out);
    csv.row({"delta", "P"});
    for (double d : grid) csv.row({fmt_sig(d), fmt_sig(stability::ratio_P(d))});
}

void run_converge(const Converge& opt, const Globals& g, std::ostream& out) {
    if (!(opt.a >= 0.0)) throw std::domain_error("--a must be >= 0");
    for (std::size_t n : opt.n) {
        if (n < 2) throw std::domain_error("--n values must be >= 2");
        if (!(opt.a < powerflow::sensitivity_a_limit(n))) throw std::domain_error("--a outside [0, 2N/(N-1))");
    }
    std::vector<stability::ConvergenceReport> rows(opt.n.size());
    parallel_for(rows.size(), g.threads, [&](std::size_t i) {
        rows[i] = stability::convergence_report(opt.a, {opt.n[i]}).front();
    });

    CsvWriter csv(out);
    csv.row({"n", "v_discrete", "v_continuum", "abs_err", "rel_err"});
    for (const auto& row : rows) {
        csv.row({std::to_string(row.n), fmt_sig(row.v_discrete), fmt_sig(row.v_continuum), fmt_sig(row.abs_err),
                 fmt_sig(row.rel_err)});
    }
}

void run_simulate(const Simulate& opt, const Globals& g, std::ostream& out) {
    validate_network(opt.net);
    for (double m : opt.mult) {
        if (!(m > 0.0)) throw std::domain_error("--mult values must be positive");
    }
    if (opt.replications < 1) throw std::domain_error("--replications must be >= 1");
    if (!(opt.events > 0.0)) throw std::domain_error("--events must be positive");

    sim::SimConfig base;
    base.network = NetworkConfig{opt.net.n, opt.net.r, opt.net.delta};
    base.fairness = FairnessSpec{opt.net.alpha};
    base.model = parse_flow_model(opt.net.model);
    base.arrival_rate = stability::lambda_threshold(base.network, base.model);
    base.seed = g.seed;
    base.horizon = 1.0;
    base.sample_interval = 1.0;

    sim::ProbeOptions popts;
    popts.replications = opt.replications;
    popts.events_target = opt.events;
    popts.threads = g.threads;
    std::vector<sim::ProbeResult> results;
    try {
        results = sim::stability_probe(base, opt.mult, popts);
    } catch (const std::runtime_error& e) {
        throw SimulationAbort(e.what());
    }

    if (!opt.trajectory.empty()) {
        std::ofstream traj(opt.trajectory);
        if (!traj) throw std::domain_error("cannot open trajectory file " + opt.trajectory);
        CsvWriter csv(traj);
        csv.row({"time", "total_queue"});
        const auto& rep = results.front().first_report;
        for (std::size_t i = 0; i < rep.time_grid.size(); ++i) {
            csv.row({fmt_sig(rep.time_grid[i]), std::to_string(rep.total_queue[i])});
        }
    }

    CsvWriter csv(out);
    csv.row({"model", "n", "delta", "multiplier", "arrival_rate", "verdict", "stable_reps", "unstable_reps",
             "replications", "mean_drift", "drift_threshold", "max_queue", "queue_cap"});
    for (const auto& res : results) {
        double drift = 0.0;
        std::int64_t max_queue = 0;
        for (const auto& rep : res.replications) {
            drift += rep.drift;
            max_queue = std::max(max_queue, rep.max_queue);
        }
        drift /= static_cast<double>(res.replications.size());
        csv.row({opt.net.model, std::to_string(opt.net.n), fmt_sig(opt.net.delta), fmt_sig(res.multiplier),
                 fmt_sig(res.arrival_rate), sim::to_string(res.verdict), std::to_string(res.stable_count()),
                 std::to_string(res.unstable_count()), std::to_string(res.replications.size()), fmt_sig(drift),
                 fmt_sig(res.drift_threshold), std::to_string(max_queue), std::to_string(res.queue_cap)});
    }
}

void run_allocate(const Allocate& opt, std::ostream& out) {
    validate_network(opt.net);
    if (opt.x.size() != opt.net.n) throw std::domain_error("--x must list exactly n queue lengths");
    const NetworkConfig cfg{opt.net.n, opt.net.r, opt.net.delta};
    const FlowModel model = parse_flow_model(opt.net.model);
    const QueueState state{opt.x};
    const auto p = allocator::allocate(model, state, FairnessSpec{opt.net.alpha}, cfg);
    const auto feas = powerflow::feasible(p, cfg, model);

    CsvWriter csv(out);
    csv.row({"index", "station_from_root", "x", "p", "slack"});
    for (std::size_t j = 0; j < cfg.n_stations; ++j) {
        csv.row({std::to_string(j), std::to_string(cfg.n_stations - j), std::to_string(opt.x[j]), fmt_sig(p[j]),
                 fmt_sig(feas.slack)});
    }
}

nlohmann::json collect_parameters(const CLI::App& sub) {
    nlohmann::json params = nlohmann::json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_name() == "--help" || opt->count() == 0) continue;
        std::string joined;
        for (const auto& r : opt->results()) {
            if (!joined.empty()) joined += ',';
            joined += r;
        }
        params[opt->get_name()] = joined;
    }
    return params;
}

void write_manifest(const std::string& command, const CLI::App& sub, const Globals& g) {
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["parameters"] = collect_parameters(sub);
    manifest["output_path"] = g.out;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = g.seed_given ? nlohmann::json(g.seed) : nlohmann::json(nullptr);
    manifest["threads"] = g.threads;
    std::ofstream f(g.out + ".manifest.json");
    f << manifest.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability thresholds and simulations for EV charging on a line distribution feeder", "linestab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    Globals g;
    app.add_option("--out", g.out, "Write CSV to this path (plus <path>.manifest.json)");
    auto* seed_opt = app.add_option("--seed", g.seed, "Base RNG seed");
    app.add_option("--threads", g.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);

    Thresholds th;
    auto* thresholds = app.add_subcommand("thresholds", "lambda_N, N^2 lambda_N and lambda_c per model");
    thresholds->add_option("--n", th.n, "Number of stations (comma list allowed)")->delimiter(',')->required();
    thresholds->add_option("--r", th.r, "Resistance per edge");
    thresholds->add_option("--delta", th.delta, "Voltage-drop bound in (0, 0.5]")->required();
    thresholds->add_option("--model", th.model, "lindist, distflow or both");

    Newton nw;
    auto* newton = app.add_subcommand("newton", "Newton recovery of a from forward-generated 1/(1-delta)");
    newton->add_option("--a", nw.a, "Values of a in (0, 2)")->delimiter(',');
    newton->add_option("--n", nw.n, "Values of N >= 2")->delimiter(',');
    newton->add_option("--stop-tol", nw.stop_tol, "Relative step stopping tolerance");
    newton->add_option("--max-iter", nw.max_iter, "Iteration cap");

    Ratio ra;
    auto* ratio = app.add_subcommand("ratio", "P(delta) = lambda_c^D / lambda_c^L");
    ratio->add_option("--delta", ra.deltas, "Explicit delta values")->delimiter(',');
    ratio->add_option("--from", ra.from, "Grid start");
    ratio->add_option("--to", ra.to, "Grid end");
    ratio->add_option("--points", ra.points, "Grid size");

    Converge cv;
    auto* converge = app.add_subcommand("converge", "V_N^D against the continuum limit V(1)");
    converge->add_option("--a", cv.a, "Scaled load a = r lambda N^2");
    converge->add_option("--n", cv.n, "Values of N >= 2")->delimiter(',');

    auto add_network = [](CLI::App* sub, Network& net) {
        sub->add_option("--n", net.n, "Number of stations")->required();
        sub->add_option("--r", net.r, "Resistance per edge");
        sub->add_option("--delta", net.delta, "Voltage-drop bound in (0, 0.5]");
        sub->add_option("--alpha", net.alpha, "Fairness parameter");
        sub->add_option("--model", net.model, "lindist or distflow");
    };

    Simulate sm;
    auto* simulate = app.add_subcommand("simulate", "Queue simulation at multiples of the model threshold");
    add_network(simulate, sm.net);
    simulate->add_option("--mult", sm.mult, "Multipliers of lambda_N")->delimiter(',');
    simulate->add_option("--replications", sm.replications, "Seeded replications per multiplier");
    simulate->add_option("--events", sm.events, "Expected arrivals per replication");
    simulate->add_option("--trajectory", sm.trajectory, "time,total_queue CSV of the first replication");

    Allocate al;
    auto* allocate = app.add_subcommand("allocate", "One alpha-fair allocation for a queue state");
    add_network(allocate, al.net);
    allocate->add_option("--x", al.x, "Vehicles per station, relabeled order (far end first)")
        ->delimiter(',')
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }
    g.seed_given = seed_opt->count() > 0;

    std::ofstream file;
    if (!g.out.empty()) {
        file.open(g.out);
        if (!file) {
            std::cerr << "error: cannot open " << g.out << '\n';
            return kValidation;
        }
    }
    std::ostream& out = g.out.empty() ? std::cout : file;

    CLI::App* chosen = app.get_subcommands().front();
    try {
        if (chosen == thresholds) run_thresholds(th, g, out);
        else if (chosen == newton) run_newton(nw, g, out);
        else if (chosen == ratio) run_ratio(ra, out);
        else if (chosen == converge) run_converge(cv, g, out);
        else if (chosen == simulate) run_simulate(sm, g, out);
        else if (chosen == allocate) run_allocate(al, out);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const stability::NewtonError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    } catch (const allocator::AllocationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    } catch (const SimulationAbort& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSimulation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }

    if (!g.out.empty()) {
        file.close();
        write_manifest(chosen->get_name(), *chosen, g);
    }
    return kOk;
}
