#include "sila/model.hpp"

namespace sila {

// Explicit instantiations for the two supported precisions keep the heavy
// template bodies out of every client translation unit.
template void build_parameters<float>(const ModelConfig&, ParameterStore<float>&);
template void build_parameters<double>(const ModelConfig&, ParameterStore<double>&);
template ParameterStore<float> init_model<float>(const ModelConfig&, std::uint64_t);
template ParameterStore<double> init_model<double>(const ModelConfig&, std::uint64_t);

template DecodeStep<float> decode_step<float>(Tape<float>&, const ModelConfig&,
                                              const std::vector<const DecodeState*>&);
template DecodeStep<double> decode_step<double>(Tape<double>&, const ModelConfig&,
                                                const std::vector<const DecodeState*>&);
template DecodeStep<float> decode_step_reference<float>(Tape<float>&, const ModelConfig&,
                                                        const std::vector<const DecodeState*>&);
template DecodeStep<double> decode_step_reference<double>(Tape<double>&, const ModelConfig&,
                                                          const std::vector<const DecodeState*>&);

template std::vector<RolloutOutcome<float>> run_rollouts<float>(
    Tape<float>&, const ModelConfig&, std::vector<DecodeState>&, DecodeMode, Rng*, bool,
    const std::vector<std::vector<ForcedAction>>*);
template std::vector<RolloutOutcome<double>> run_rollouts<double>(
    Tape<double>&, const ModelConfig&, std::vector<DecodeState>&, DecodeMode, Rng*, bool,
    const std::vector<std::vector<ForcedAction>>*);

template SampledTour<float> full_tsp_rollout<float>(const TspInstance&, const ModelConfig&,
                                                    ParameterStore<float>&, DecodeMode,
                                                    std::uint64_t, int);
template SampledTour<double> full_tsp_rollout<double>(const TspInstance&, const ModelConfig&,
                                                      ParameterStore<double>&, DecodeMode,
                                                      std::uint64_t, int);
template SampledCvrp<float> full_cvrp_rollout<float>(const CvrpInstance&, const ModelConfig&,
                                                     ParameterStore<float>&, DecodeMode,
                                                     std::uint64_t, int);
template SampledCvrp<double> full_cvrp_rollout<double>(const CvrpInstance&, const ModelConfig&,
                                                       ParameterStore<double>&, DecodeMode,
                                                       std::uint64_t, int);

}  // namespace sila
