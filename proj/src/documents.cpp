#include <nsqstab/documents.hpp>
#include <nsqstab/squared.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace nsqstab {

namespace {

[[noreturn]] void malformed(const std::string& what)
{
    throw Error(ErrorKind::Malformed, what);
}

const Json& field(const Json& doc, const char* key)
{
    if (!doc.is_object()) malformed("document must be an object");
    auto it = doc.find(key);
    if (it == doc.end()) malformed(std::string("missing field '") + key + "'");
    return *it;
}

int integer(const Json& doc, const char* key)
{
    const Json& v = field(doc, key);
    if (!v.is_number_integer()) malformed(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

std::vector<double> reals(const Json& v, const std::string& key)
{
    if (!v.is_array()) malformed("field '" + key + "' must be a list of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) malformed("field '" + key + "' must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<std::vector<double>> ragged(const Json& v, const std::string& key)
{
    if (!v.is_array()) malformed("field '" + key + "' must be a list of lists");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) out.push_back(reals(row, key));
    return out;
}

std::vector<int> integers(const Json& v, const std::string& key)
{
    if (!v.is_array()) malformed("field '" + key + "' must be a list of integers");
    std::vector<int> out;
    for (const auto& x : v) {
        if (!x.is_number_integer()) malformed("field '" + key + "' must contain only integers");
        out.push_back(x.get<int>());
    }
    return out;
}

Matrix row_major(const Json& doc, const char* key, int rows, int cols)
{
    const std::vector<double> flat = reals(field(doc, key), key);
    if (static_cast<long>(flat.size()) != static_cast<long>(rows) * cols)
        throw Error(ErrorKind::DimensionMismatch, std::string("field '") + key + "' must have " + std::to_string(rows * cols) + " entries");
    Matrix M(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) M(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    return M;
}

Json number(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return v;
}

Json vector_list(const Vector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

Json flat_row_major(const Matrix& M)
{
    Json out = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) out.push_back(number(M(r, c)));
    return out;
}

Json selection_json(const SquaredSelection& s)
{
    Json out = Json::array();
    for (int k : s.kappa) out.push_back(k + 1);
    return out;
}

}  // namespace

Json parse_json(const std::string& text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        malformed(e.what());
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Malformed, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RawGainDocument load_raw_gain(const Json& doc)
{
    const int m = integer(doc, "m");
    const int n = integer(doc, "n");
    if (m < 1 || n < 1) throw Error(ErrorKind::DimensionMismatch, "m and n must be positive");
    RawGainDocument out;
    out.entries = row_major(doc, "A", m, n);
    require_finite(out.entries, "A");
    if (doc.contains("partition")) {
        Partition part(integers(doc["partition"], "partition"));
        if (part.blocks() != m) throw Error(ErrorKind::DimensionMismatch, "partition needs one block per row");
        if (part.columns() != n)
            throw Error(ErrorKind::DimensionMismatch, "partition sums to " + std::to_string(part.columns()) + ", n is " + std::to_string(n));
        out.partition = std::move(part);
    }
    return out;
}

GainDocument load_gain_document(const Json& doc)
{
    field(doc, "partition");
    RawGainDocument raw = load_raw_gain(doc);
    GainDocument out{PartitionedGain(std::move(raw.entries), std::move(*raw.partition)), std::nullopt};
    if (doc.contains("K_gains")) out.mixing = MixingMatrix(out.gain.partition(), ragged(doc["K_gains"], "K_gains"));
    return out;
}

PartitionedGain load_gain(const std::string& text)
{
    return load_gain_document(parse_json(text)).gain;
}

PlantDocument load_plant(const Json& doc)
{
    const int q = integer(doc, "q");
    const int m = integer(doc, "m");
    const int n = integer(doc, "n");
    if (q < 1) throw Error(ErrorKind::Precondition, "plant needs q >= 1 states");
    if (m < 1 || n < 1) throw Error(ErrorKind::DimensionMismatch, "m and n must be positive");
    PlantRealization plant(row_major(doc, "A", q, q), row_major(doc, "B", q, n), row_major(doc, "C", m, q), row_major(doc, "D", m, n));
    Matrix kbar;
    if (doc.contains("Kbar")) {
        kbar = row_major(doc, "Kbar", n, m);
    } else if (doc.contains("partition")) {
        Partition part(integers(doc["partition"], "partition"));
        if (part.blocks() != m || part.columns() != n) throw Error(ErrorKind::DimensionMismatch, "partition must have m blocks summing to n");
        MixingMatrix K = doc.contains("K_gains") ? MixingMatrix(part, ragged(doc["K_gains"], "K_gains")) : MixingMatrix::ones(part);
        kbar = K.dense();
    } else if (m == n) {
        kbar = Matrix::Identity(n, m);
    } else {
        malformed("plant document needs 'Kbar' or 'partition' when m != n");
    }
    return PlantDocument{std::move(plant), std::move(kbar)};
}

WeightDocument load_weight_problem(const Json& doc)
{
    Partition part(integers(field(doc, "partition"), "partition"));
    WeightDocument out;
    out.problem = WeightProblem::uniform_lambdas(part, ragged(field(doc, "ratios"), "ratios"));
    if (doc.contains("lambdas")) out.problem.lambdas = ragged(doc["lambdas"], "lambdas");
    if (doc.contains("base")) {
        if (!doc["base"].is_number()) malformed("field 'base' must be a number");
        out.base = doc["base"].get<double>();
    }
    out.problem.validate();
    if (!(out.base > 0.0)) throw Error(ErrorKind::NonPositiveEntry, "base must be positive");
    return out;
}

Json matrix_rows(const Matrix& M)
{
    Json out = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) out.push_back(vector_list(M.row(r).transpose()));
    return out;
}

Json complex_list(const ComplexVector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(Json::array({number(v(i).real()), number(v(i).imag())}));
    return out;
}

Json gain_to_json(const PartitionedGain& gain, const std::optional<MixingMatrix>& mixing)
{
    Json out;
    out["m"] = gain.rows();
    out["n"] = gain.cols();
    out["partition"] = gain.partition().sizes();
    out["A"] = flat_row_major(gain.entries());
    if (mixing) out["K_gains"] = mixing->values();
    return out;
}

Json vl_verdict_to_json(const VlVerdict& v)
{
    Json out;
    out["status"] = to_string(v.status);
    out["best_margin"] = number(v.best_margin);
    out["upper_bound"] = number(v.upper_bound);
    if (v.certificate) {
        out["certificate"] = {{"diagonal", vector_list(v.certificate->diagonal)}, {"margin", number(v.certificate->margin)}};
    }
    if (v.status == VlStatus::Refuted) out["dual_witness"] = matrix_rows(v.dual_witness);
    out["iterations"] = v.iterations;
    return out;
}

Json individual_vl_to_json(const IndividualVlResult& r)
{
    Json out;
    out["overall"] = to_string(r.overall);
    out["min_margin"] = number(r.min_margin);
    Json list = Json::array();
    for (std::size_t i = 0; i < r.selections.size(); ++i) {
        Json entry;
        entry["selection"] = selection_json(r.selections[i]);
        entry["verdict"] = vl_verdict_to_json(r.verdicts[i]);
        list.push_back(std::move(entry));
    }
    out["selections"] = std::move(list);
    Json failing = Json::array();
    for (std::size_t i : r.failing) failing.push_back(selection_json(r.selections[i]));
    out["failing"] = std::move(failing);
    return out;
}

Json counterexample_to_json(const Counterexample& c)
{
    Json out;
    out["sample_index"] = c.sample_index;
    out["kind"] = to_string(c.kind);
    out["E"] = c.E.values();
    Json blocks = Json::array();
    for (int b : c.active.blocks) blocks.push_back(b + 1);
    out["active_blocks"] = std::move(blocks);
    out["reduced_AEK"] = matrix_rows(c.reduced);
    out["eigenvalue"] = Json::array({number(c.eigenvalue.real()), number(c.eigenvalue.imag())});
    return out;
}

Json falsify_to_json(const FalsifyResult& r, const SamplerOptions& sampler)
{
    Json out;
    out["sampler"] = {{"count", sampler.count},
                      {"zero_probability", sampler.zero_probability},
                      {"min_magnitude", sampler.min_magnitude},
                      {"max_magnitude", sampler.max_magnitude},
                      {"seed", sampler.seed},
                      {"tol", sampler.tol}};
    out["samples"] = r.samples;
    out["marginal_samples"] = r.marginal_samples;
    out["empty_samples"] = r.empty_samples;
    out["min_scaled_real"] = number(r.min_scaled_real);
    out["counterexample"] = r.counterexample ? counterexample_to_json(*r.counterexample) : Json(nullptr);
    return out;
}

Json certify_report_to_json(const CertifyReport& r)
{
    Json out;
    out["verdict"] = to_string(r.verdict);
    out["individual_vl"] = individual_vl_to_json(r.vl);
    Json witnesses = Json::array();
    for (const WitnessCheck& w : r.witnesses) {
        witnesses.push_back({{"E", w.E.values()},
                             {"lyapunov_margin", number(w.lyapunov_margin)},
                             {"witness_min_real", number(w.witness_min_real)},
                             {"scaled_min_real", number(w.scaled_min_real)},
                             {"parallel_residual", number(w.parallel_residual)}});
    }
    out["witnesses"] = std::move(witnesses);
    out["findings"] = r.findings;
    return out;
}

Json weights_to_json(const WeightSystem& ws, const WeightProblem& wp)
{
    Json out;
    out["partition"] = wp.groups.sizes();
    out["base"] = ws.base;
    Json gammas = Json::array();
    const std::vector<int> blocks = all_blocks(wp.groups);
    for_each_selection(wp.groups, blocks, [&](std::uint64_t rank, const SquaredSelection& s) {
        gammas.push_back({{"kappa", selection_json(s)}, {"gamma", number(ws.gammas[rank])}});
    });
    out["gammas"] = std::move(gammas);
    Json payoffs = Json::array();
    for (int g = 0; g < wp.groups.blocks(); ++g) {
        Json row = Json::array();
        for (int j = 0; j < wp.groups.size(g); ++j) row.push_back(number(payoff(ws, wp, g, j)));
        payoffs.push_back(std::move(row));
    }
    out["payoffs"] = std::move(payoffs);
    out["ratios"] = wp.ratios;
    out["max_ratio_error"] = number(verify_ratios(ws, wp));
    return out;
}

Json sweep_to_json(const EtaSweep& sweep)
{
    Json out;
    Json pts = Json::array();
    for (const EtaPoint& p : sweep.points) pts.push_back({{"eta", p.eta}, {"stable", p.stable}, {"max_real", number(p.max_real)}});
    out["grid"] = std::move(pts);
    out["threshold"] = sweep.threshold ? Json(*sweep.threshold) : Json(nullptr);
    out["stable_suffix_from"] = sweep.has_stable_suffix() ? Json(sweep.points[sweep.stable_suffix_start].eta) : Json(nullptr);
    out["reduced_hurwitz"] = sweep.reduced_hurwitz;
    out["reduced_max_real"] = number(sweep.reduced_max_real);
    out["consistent"] = sweep.consistent;
    return out;
}

Json pairing_report_to_json(const PairingReport& r)
{
    Json out;
    Json groups = Json::array();
    const int m = r.assignment.outputs();
    for (int o = 0; o < m; ++o) {
        Json inputs = Json::array();
        for (std::size_t c = 0; c < r.assignment.output_of_input.size(); ++c)
            if (r.assignment.output_of_input[c] == o) inputs.push_back(c + 1);
        groups.push_back(std::move(inputs));
    }
    out["inputs_per_output"] = std::move(groups);
    out["verdict"] = to_string(r.verdict);
    out["margin"] = number(r.margin);
    out["vl_margin"] = number(r.vl_margin);
    out["dominance_slack"] = number(r.dominance_slack);
    out["squared_matrices"] = r.squared_count;
    out["vl_failures"] = r.vl_failures;
    out["dominance_failures"] = r.dominance_failures;
    if (r.heuristic) out["heuristic"] = true;
    return out;
}

Json pairing_ranking_to_json(const PairingRanking& r)
{
    Json out;
    out["evaluated"] = r.stream.emitted;
    out["total_assignments"] = r.stream.total ? Json(*r.stream.total) : Json(nullptr);
    out["truncated"] = r.stream.truncated;
    Json feasible = Json::array();
    Json all = Json::array();
    for (const PairingReport& rep : r.reports) {
        Json j = pairing_report_to_json(rep);
        if (rep.verdict == PairingVerdict::CertifiedSufficient || rep.verdict == PairingVerdict::DominanceOnly) feasible.push_back(j);
        all.push_back(std::move(j));
    }
    out["feasible"] = std::move(feasible);
    out["ranking"] = std::move(all);
    if (r.heuristic) out["heuristic_best"] = pairing_report_to_json(*r.heuristic);
    return out;
}

}  // namespace nsqstab
