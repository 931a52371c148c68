#pragma once

#include <optional>
#include <string>
#include <vector>

#include "empath/generator.hpp"
#include "empath/policy_tree.hpp"

namespace empath {

// The Table-4/5 row set: how the response label is chosen before generation.
enum class Method { Gt, EndToEnd, Equal, DtArgmax, DtSampled, Neural };

std::string method_name(Method m);
Method parse_method(const std::string& name);
const std::vector<Method>& all_methods();

struct PipelineRow {
    std::string dialogue_id;
    Method method = Method::Gt;
    std::optional<LabelId> condition;  // nullopt for end_to_end
    std::string response;              // generated text
    LabelId gold_label = 0;
    std::string gold_response;
};

// Everything a pipeline run may need; only the models the chosen methods
// require must be present.
struct PipelineModels {
    const PolicyTree* tree = nullptr;
    const PredictorModel* predictor = nullptr;
    const GeneratorModel* conditioned_generator = nullptr;
    const GeneratorModel* end_to_end_generator = nullptr;
    const Vocab* vocab = nullptr;
};

// For each test dialogue's final listener position: predict the response
// label with the chosen method (skip for gt/end_to_end), condition the
// generation, record the row. Deterministic for a fixed seed.
std::vector<PipelineRow> run_pipeline(Method method, const Corpus& test,
                                      const PipelineModels& models, std::uint64_t seed);

}  // namespace empath
