// End-to-end walkthrough: generate a labeled dataset, fit the chain and
// scoring networks on the train split, then decode a held-out sequence
// and compare against the generating states.

#include <iostream>

#include "boss/boss.hpp"

int main() {
    using namespace boss;

    synth::ScenarioConfig scenario;
    scenario.n_train = 80;
    scenario.n_test = 5;
    scenario.T = 12;
    scenario.seed = 2024;
    auto data = synth::generate_dataset(scenario);
    std::cout << "generated " << data.train.size() << " train / "
              << data.test.size() << " test sequences over "
              << scenario.signature.n_states << " states\n";

    // The nets spend their first ~100 iterations on a flat stretch of the
    // objective before separating the states, so give the fit room.
    train::TrainConfig cfg;
    cfg.iterations = 400;
    cfg.learning_rate = 0.5;
    cfg.seed = 1;
    auto initial = random_model(scenario.signature, cfg.seed, scenario.states);
    auto [model, report] = train::fit_supervised(initial, data.train, cfg);
    std::cout << "fit " << report.log_likelihood_trace.size()
              << " iterations, final objective " << report.final_ll
              << (report.converged ? " (converged)" : "") << "\n\n";

    const auto& seq = data.test.front();
    auto decoded = viterbi(model, seq);
    std::cout << "sequence " << seq.id << "\n  truth  :";
    for (int s : seq.states) std::cout << " " << model.labels[s];
    std::cout << "\n  decoded:";
    for (int s : decoded.states) std::cout << " " << model.labels[s];
    std::cout << "\n\n";

    std::vector<std::vector<int>> decoded_paths;
    std::vector<std::vector<int>> truth_paths;
    for (const auto& t : data.test) {
        decoded_paths.push_back(viterbi(model, t).states);
        truth_paths.push_back(t.states);
    }
    auto accuracy = synth::evaluate_accuracy(
        decoded_paths, truth_paths, scenario.signature.n_states);
    std::cout << "held-out accuracy " << accuracy.overall << " over "
              << data.test.size() << " sequences\n";
    return 0;
}
