#pragma once

// Structured-text (JSON) documents for gains, plants, weight problems and reports.
//
// Gain document:
//   {"m": 2, "n": 4, "partition": [2, 2], "A": [row-major m*n reals],
//    "K_gains": [[k11, k12], [k21, k22]]}            // K_gains optional
// "partition" may be omitted only where a raw matrix is accepted (pairing search).
//
// Plant document:
//   {"q": 1, "m": 1, "n": 2, "A": [...q*q], "B": [...q*n], "C": [...m*q], "D": [...m*n],
//    "Kbar": [...n*m]}                                 // or "partition" (+ "K_gains")
//
// Weight-problem document:
//   {"partition": [3, 2, 3], "ratios": [[k11, k21], [k12], [k13, k23]],
//    "lambdas": [[...N per group], ...], "base": 1.0}  // lambdas, base optional
//
// Numbers are written in shortest round-trip form, so reals survive a save/load cycle exactly.

#include <nsqstab/core.hpp>
#include <nsqstab/dstab.hpp>
#include <nsqstab/pairing.hpp>
#include <nsqstab/sim.hpp>
#include <nsqstab/vl.hpp>
#include <nsqstab/weights.hpp>

#include <json.hpp>

#include <optional>
#include <string>

namespace nsqstab {

using Json = nlohmann::ordered_json;

struct GainDocument {
    PartitionedGain gain;
    std::optional<MixingMatrix> mixing;
};

struct RawGainDocument {
    Matrix entries;
    std::optional<Partition> partition;
};

struct PlantDocument {
    PlantRealization plant;
    Matrix kbar;
};

struct WeightDocument {
    WeightProblem problem;
    double base = 1.0;
};

Json parse_json(const std::string& text);
std::string read_file(const std::string& path);

PartitionedGain load_gain(const std::string& text);
GainDocument load_gain_document(const Json& doc);
RawGainDocument load_raw_gain(const Json& doc);
PlantDocument load_plant(const Json& doc);
WeightDocument load_weight_problem(const Json& doc);

Json gain_to_json(const PartitionedGain& gain, const std::optional<MixingMatrix>& mixing = std::nullopt);
Json matrix_rows(const Matrix& M);
Json complex_list(const ComplexVector& v);
Json vl_verdict_to_json(const VlVerdict& v);
Json individual_vl_to_json(const IndividualVlResult& r);
Json counterexample_to_json(const Counterexample& c);
Json falsify_to_json(const FalsifyResult& r, const SamplerOptions& sampler);
Json certify_report_to_json(const CertifyReport& r);
Json weights_to_json(const WeightSystem& ws, const WeightProblem& wp);
Json sweep_to_json(const EtaSweep& sweep);
Json pairing_report_to_json(const PairingReport& r);
Json pairing_ranking_to_json(const PairingRanking& r);

}  // namespace nsqstab
