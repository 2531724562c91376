// nsqstab: certify, weights, falsify, simulate and pair subcommands.
//
// Exit codes: certify 0 certified-sufficient, 2 refuted, 3 inconclusive; falsify 0 none
// found, 2 counterexample; pair 0 if a certified pairing exists, else 3; 1 on usage or
// input errors everywhere.

#include <nsqstab/documents.hpp>
#include <nsqstab/parallel.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace nsqstab;

namespace {

struct Common {
    std::string input;
    std::string out;
    bool json = false;
};

struct Flags {
    double tol = 1e-9;
    int budget = 3000;
    std::uint64_t samples = 10000;
    std::uint64_t seed = 42;
    double zero_prob = 0.15;
    double min_mag = 1e-3;
    double max_mag = 1e3;
    double falsify_tol = 1e-9;
    int witnesses = 8;
    double base = 1.0;
    std::string eta_grid;
    double eta = 0.01;
    double horizon = 100.0;
    double step = 0.0;
    std::string trajectory;
    std::uint64_t cap = 100000;
    std::string csv;
};

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::vector<double> parse_grid(const std::string& spec)
{
    if (spec.empty()) return default_eta_grid();
    if (spec.find(':') != std::string::npos) {
        double hi = 0, lo = 0;
        int count = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(spec);
        if (!(ss >> hi >> c1 >> lo >> c2 >> count) || c1 != ':' || c2 != ':') throw Error(ErrorKind::Malformed, "eta grid must be HIGH:LOW:COUNT or a comma list");
        return log_grid(hi, lo, count);
    }
    std::vector<double> grid;
    std::istringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Malformed, "bad eta grid entry '" + item + "'");
        }
    }
    return grid;
}

SamplerOptions sampler_from(const Flags& f)
{
    SamplerOptions s;
    s.count = f.samples;
    s.seed = f.seed;
    s.zero_probability = f.zero_prob;
    s.min_magnitude = f.min_mag;
    s.max_magnitude = f.max_mag;
    s.tol = f.falsify_tol;
    return s;
}

VlOptions vl_from(const Flags& f)
{
    VlOptions v;
    v.tol = f.tol;
    v.budget = f.budget;
    return v;
}

void emit(const Common& c, Json report, const std::string& summary)
{
    report["timestamp"] = timestamp();
    if (!c.out.empty()) {
        std::ofstream out(c.out);
        if (!out) throw Error(ErrorKind::Malformed, "cannot write '" + c.out + "'");
        out << report.dump(2) << '\n';
    }
    if (c.json) std::cout << report.dump(2) << '\n';
    else std::cout << summary;
}

Json base_config(const std::string& command, const Common& c)
{
    Json cfg;
    cfg["command"] = command;
    cfg["input"] = c.input;
    cfg["threads"] = worker_count();
    return cfg;
}

int run_certify(const Common& c, const Flags& f)
{
    const GainDocument doc = load_gain_document(parse_json(read_file(c.input)));
    CertifyOptions opts;
    opts.vl = vl_from(f);
    opts.sampler = sampler_from(f);
    opts.witness_samples = f.witnesses;
    const CertifyReport rep = full_certify(doc.gain, doc.mixing, opts);

    Json cfg = base_config("certify", c);
    cfg["tol"] = f.tol;
    cfg["budget"] = f.budget;
    cfg["witness_samples"] = f.witnesses;
    Json report;
    report["config"] = std::move(cfg);
    report["gain"] = gain_to_json(doc.gain, doc.mixing);
    report["result"] = certify_report_to_json(rep);
    report["falsification"] = falsify_to_json(rep.falsification, opts.sampler);

    std::ostringstream s;
    s << "verdict: " << to_string(rep.verdict) << '\n';
    s << "squared matrices: " << rep.vl.selections.size() << " (" << to_string(rep.vl.overall) << ", min margin " << rep.vl.min_margin << ")\n";
    if (rep.falsification.counterexample) {
        const auto& cx = *rep.falsification.counterexample;
        s << "counterexample at sample " << cx.sample_index << ": eigenvalue " << cx.eigenvalue.real() << (cx.eigenvalue.imag() >= 0 ? "+" : "")
          << cx.eigenvalue.imag() << "i (" << to_string(cx.kind) << ")\n";
    } else {
        s << "no counterexample in " << rep.falsification.samples << " samples\n";
    }
    for (const auto& finding : rep.findings) s << "finding: " << finding << '\n';
    emit(c, std::move(report), s.str());

    switch (rep.verdict) {
    case CertifyVerdict::CertifiedSufficient: return 0;
    case CertifyVerdict::RefutedByCounterexample: return 2;
    case CertifyVerdict::Inconclusive: return 3;
    }
    return 3;
}

int run_weights(const Common& c, const Flags& f, bool base_given)
{
    const WeightDocument doc = load_weight_problem(parse_json(read_file(c.input)));
    WeightOptions opts;
    opts.base = base_given ? f.base : doc.base;
    if (!(opts.base > 0.0)) throw Error(ErrorKind::NonPositiveEntry, "base must be positive");
    const WeightSystem ws = construct_weights(doc.problem, opts);
    Json cfg = base_config("weights", c);
    cfg["base"] = opts.base;
    Json report;
    report["config"] = std::move(cfg);
    report["weights"] = weights_to_json(ws, doc.problem);
    std::ostringstream s;
    s << "weights: " << ws.gammas.size() << ", max ratio error " << verify_ratios(ws, doc.problem) << '\n';
    emit(c, std::move(report), s.str());
    return 0;
}

int run_falsify(const Common& c, const Flags& f)
{
    const GainDocument doc = load_gain_document(parse_json(read_file(c.input)));
    const MixingMatrix K = doc.mixing ? *doc.mixing : MixingMatrix::ones(doc.gain.partition());
    const SamplerOptions sampler = sampler_from(f);
    const FalsifyResult res = falsify(doc.gain, K, sampler);
    Json report;
    report["config"] = base_config("falsify", c);
    report["gain"] = gain_to_json(doc.gain, K);
    report["falsification"] = falsify_to_json(res, sampler);
    std::ostringstream s;
    if (res.counterexample) s << "counterexample at sample " << res.counterexample->sample_index << '\n';
    else s << "no counterexample in " << res.samples << " samples\n";
    emit(c, std::move(report), s.str());
    return res.counterexample ? 2 : 0;
}

int run_simulate(const Common& c, const Flags& f)
{
    const PlantDocument doc = load_plant(parse_json(read_file(c.input)));
    const std::vector<double> grid = parse_grid(f.eta_grid);
    const EtaSweep sweep = eta_threshold(doc.plant, doc.kbar, grid);

    SimulationSpec spec;
    spec.eta = f.eta;
    spec.x0 = Vector::Ones(doc.plant.outputs());
    spec.z0 = Vector::Zero(doc.plant.states());
    spec.horizon = f.horizon;
    spec.step = f.step;
    const Trajectory traj = simulate(doc.plant, doc.kbar, spec);
    if (!f.trajectory.empty()) {
        std::ofstream out(f.trajectory);
        if (!out) throw Error(ErrorKind::Malformed, "cannot write '" + f.trajectory + "'");
        traj.write_csv(out);
    }

    Json cfg = base_config("simulate", c);
    cfg["eta"] = f.eta;
    cfg["horizon"] = f.horizon;
    cfg["step"] = f.step;
    cfg["trajectory"] = f.trajectory;
    Json report;
    report["config"] = std::move(cfg);
    report["steady_state_gain"] = matrix_rows(steady_state_gain(doc.plant));
    report["sweep"] = sweep_to_json(sweep);
    report["simulation"] = {{"steps", traj.times.size() - 1}, {"diverged", traj.diverged}, {"convergence", traj.convergence}};
    if (sweep.reduced_hurwitz && !traj.diverged) {
        const QuasiSteadyState qss = quasi_steady_state_check(doc.plant, doc.kbar, traj);
        report["quasi_steady_state"] = {{"cutoff_time", qss.cutoff_time}, {"max_deviation", qss.max_deviation},
                                        {"max_relative_deviation", qss.max_relative_deviation}, {"samples", qss.samples}};
    }

    std::ostringstream s;
    const bool all_stable = sweep.stable_suffix_start == 0;
    if (!sweep.reduced_hurwitz) s << "unstable reduced model (max Re of -H(0)Kbar = " << sweep.reduced_max_real << ")\n";
    else if (all_stable) s << "stable at all grid eta\n";
    else if (sweep.has_stable_suffix()) s << "stable for eta <= " << sweep.points[sweep.stable_suffix_start].eta << '\n';
    else s << "reduced model Hurwitz but no stable grid eta\n";
    s << "simulation at eta=" << f.eta << ": ||s(T)||/||s(0)|| = " << traj.convergence << (traj.diverged ? " (diverged)" : "") << '\n';
    emit(c, std::move(report), s.str());
    return 0;
}

int run_pair(const Common& c, const Flags& f)
{
    const RawGainDocument doc = load_raw_gain(parse_json(read_file(c.input)));
    if (doc.entries.cols() < doc.entries.rows()) throw Error(ErrorKind::DimensionMismatch, "fewer inputs than outputs");
    const PairingRanking ranking = rank_pairings(doc.entries, f.cap, vl_from(f));

    if (!f.csv.empty()) {
        std::ofstream out(f.csv);
        if (!out) throw Error(ErrorKind::Malformed, "cannot write '" + f.csv + "'");
        out << "assignment,verdict,margin\n" << std::setprecision(17);
        for (const PairingReport& r : ranking.reports) {
            for (std::size_t i = 0; i < r.assignment.output_of_input.size(); ++i) out << (i ? " " : "") << r.assignment.output_of_input[i] + 1;
            out << ',' << to_string(r.verdict) << ',' << r.margin << '\n';
        }
    }

    Json cfg = base_config("pair", c);
    cfg["cap"] = f.cap;
    cfg["tol"] = f.tol;
    cfg["budget"] = f.budget;
    Json report;
    report["config"] = std::move(cfg);
    report["pairings"] = pairing_ranking_to_json(ranking);

    const bool feasible = !ranking.reports.empty() && ranking.reports.front().verdict == PairingVerdict::CertifiedSufficient;
    std::ostringstream s;
    s << "evaluated " << ranking.stream.emitted << " assignments" << (ranking.stream.truncated ? " (truncated)" : "") << '\n';
    if (!ranking.reports.empty()) {
        const PairingReport& best = ranking.reports.front();
        s << "best: outputs <- inputs";
        const int m = static_cast<int>(doc.entries.rows());
        for (int o = 0; o < m; ++o) {
            s << " " << (o + 1) << ":{";
            bool first = true;
            for (std::size_t i = 0; i < best.assignment.output_of_input.size(); ++i)
                if (best.assignment.output_of_input[i] == o) {
                    s << (first ? "" : ",") << i + 1;
                    first = false;
                }
            s << "}";
        }
        s << " " << to_string(best.verdict) << " margin " << best.margin << '\n';
    }
    emit(c, std::move(report), s.str());
    return feasible ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Extended D-stability certification for non-square gain matrices"};
    app.require_subcommand(1);
    Common common;
    Flags flags;

    auto add_common = [&](CLI::App* sub, const char* what) {
        sub->add_option("input", common.input, what)->required();
        sub->add_option("--out", common.out, "Write the JSON report to this path");
        sub->add_flag("--json", common.json, "Print the JSON report instead of the summary");
    };
    auto add_vl = [&](CLI::App* sub) {
        sub->add_option("--tol", flags.tol, "Margin tolerance for VL certification")->capture_default_str();
        sub->add_option("--budget", flags.budget, "Iteration budget per squared matrix")->capture_default_str();
    };
    auto add_sampler = [&](CLI::App* sub) {
        sub->add_option("--samples", flags.samples, "Random scalings to try")->capture_default_str();
        sub->add_option("--seed", flags.seed, "Sampler seed")->capture_default_str();
        sub->add_option("--zero-prob", flags.zero_prob, "Probability that a scaling entry is zero")->capture_default_str();
        sub->add_option("--min-mag", flags.min_mag, "Smallest nonzero scaling")->capture_default_str();
        sub->add_option("--max-mag", flags.max_mag, "Largest scaling")->capture_default_str();
        sub->add_option("--falsify-tol", flags.falsify_tol, "Counterexample when min Re <= tol * max(1, ||AEK||)")->capture_default_str();
    };

    auto* certify = app.add_subcommand("certify", "Check the sufficient condition and search for counterexamples");
    add_common(certify, "Gain document");
    add_vl(certify);
    add_sampler(certify);
    certify->add_option("--witnesses", flags.witnesses, "Positive scalings used for witness assembly")->capture_default_str();

    auto* weights = app.add_subcommand("weights", "Construct combinatorial weights");
    add_common(weights, "Weight-problem document");
    auto* base_opt = weights->add_option("--base", flags.base, "Weight of the all-first combination");

    auto* fals = app.add_subcommand("falsify", "Randomized search for a destabilizing scaling");
    add_common(fals, "Gain document");
    add_sampler(fals);

    auto* sim = app.add_subcommand("simulate", "Closed-loop eta sweep and trajectory");
    add_common(sim, "Plant document");
    sim->add_option("--eta-grid", flags.eta_grid, "HIGH:LOW:COUNT or comma list, descending (default 1:1e-4:17)");
    sim->add_option("--eta", flags.eta, "Integration rate for the trajectory")->capture_default_str();
    sim->add_option("--horizon", flags.horizon, "Simulation horizon")->capture_default_str();
    sim->add_option("--step", flags.step, "Fixed step (0 = automatic)")->capture_default_str();
    sim->add_option("--trajectory", flags.trajectory, "CSV output path (t, x..., z...)");

    auto* pair = app.add_subcommand("pair", "Rank input-output pairings");
    add_common(pair, "Gain document (partition ignored)");
    add_vl(pair);
    pair->add_option("--cap", flags.cap, "Maximum assignments to enumerate")->capture_default_str();
    pair->add_option("--csv", flags.csv, "Comma-separated summary output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*certify) return run_certify(common, flags);
        if (*weights) return run_weights(common, flags, base_opt->count() > 0);
        if (*fals) return run_falsify(common, flags);
        if (*sim) return run_simulate(common, flags);
        if (*pair) return run_pair(common, flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
