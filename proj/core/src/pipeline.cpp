#include "empath/pipeline.hpp"

#include "empath/error.hpp"

namespace empath {

std::string method_name(Method m) {
    switch (m) {
        case Method::Gt: return "gt";
        case Method::EndToEnd: return "end_to_end";
        case Method::Equal: return "equal";
        case Method::DtArgmax: return "dt_argmax";
        case Method::DtSampled: return "dt_sampled";
        case Method::Neural: return "neural";
    }
    return "gt";
}

Method parse_method(const std::string& name) {
    const std::string n = to_lower(trim(name));
    for (Method m : all_methods())
        if (method_name(m) == n) return m;
    throw InputError("unknown method: '" + name + "' (expected gt, end_to_end, equal, "
                     "dt_argmax, dt_sampled or neural)");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {Method::Gt,    Method::EndToEnd,
                                                Method::Equal, Method::DtArgmax,
                                                Method::DtSampled, Method::Neural};
    return methods;
}

namespace {

void require(bool ok, const std::string& what, Method m) {
    if (!ok)
        throw InputError("method '" + method_name(m) + "' needs " + what +
                         " but none was provided");
}

}  // namespace

std::vector<PipelineRow> run_pipeline(Method method, const Corpus& test,
                                      const PipelineModels& models, std::uint64_t seed) {
    require(models.vocab != nullptr, "a vocabulary", method);
    if (method == Method::EndToEnd)
        require(models.end_to_end_generator != nullptr, "the unconditioned generator", method);
    else
        require(models.conditioned_generator != nullptr, "the conditioned generator", method);
    if (method == Method::DtArgmax || method == Method::DtSampled)
        require(models.tree != nullptr, "a policy tree", method);
    if (method == Method::Neural) require(models.predictor != nullptr, "a predictor", method);

    const GeneratorModel& generator = method == Method::EndToEnd
                                          ? *models.end_to_end_generator
                                          : *models.conditioned_generator;
    const GeneratorConfig& gcfg = generator.config();
    Rng predict_rng(fork_seed(seed, "pipeline.predict." + method_name(method)));
    Rng decode_rng(fork_seed(seed, "pipeline.decode." + method_name(method)));

    std::vector<PipelineRow> rows;
    for (const Dialogue& d : test.dialogues) {
        // Final listener position: the last even 1-based turn.
        const size_t n = d.turns.size();
        if (n < 2) continue;
        const size_t t = (n % 2 == 0) ? n - 1 : n - 2;  // 0-based listener index
        const size_t ctx_begin = t > static_cast<size_t>(gcfg.k) ? t - static_cast<size_t>(gcfg.k) : 0;
        std::span<const Turn> ctx_turns(d.turns.data() + ctx_begin, t - ctx_begin);

        PipelineRow row;
        row.dialogue_id = d.id;
        row.method = method;
        row.gold_label = d.turns[t].label;
        row.gold_response = d.turns[t].text;

        switch (method) {
            case Method::Gt:
                row.condition = row.gold_label;
                break;
            case Method::EndToEnd:
                row.condition = std::nullopt;
                break;
            case Method::Equal: {
                auto ctx = PredictionContext::from_turns(ctx_turns, gcfg.k);
                row.condition = predict_equally_sampled(ctx, predict_rng);
                break;
            }
            case Method::DtArgmax: {
                auto ctx = PredictionContext::from_turns(ctx_turns, models.tree->k());
                row.condition = models.tree->predict_argmax(ctx);
                break;
            }
            case Method::DtSampled: {
                auto ctx = PredictionContext::from_turns(ctx_turns, models.tree->k());
                row.condition = models.tree->predict_sampled(ctx, predict_rng);
                break;
            }
            case Method::Neural: {
                const PredictorConfig& pcfg = models.predictor->config();
                const size_t pc_begin =
                    t > static_cast<size_t>(pcfg.k) ? t - static_cast<size_t>(pcfg.k) : 0;
                std::span<const Turn> pc_turns(d.turns.data() + pc_begin, t - pc_begin);
                EncodedContext ec = encode_context(pc_turns, role_of_turn(pc_begin + 1),
                                                   *models.vocab, pcfg.max_tokens);
                row.condition = models.predictor->predict(ec);
                break;
            }
        }

        EncodedContext gen_ctx = encode_context(ctx_turns, role_of_turn(ctx_begin + 1),
                                                *models.vocab, gcfg.max_tokens);
        row.response = generator.generate(gen_ctx, row.condition, *models.vocab, &decode_rng);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace empath
