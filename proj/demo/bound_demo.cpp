// Information-bound walkthrough on a binary symmetric channel: mutual
// information, the expected-divergence upper bound under a mismatched
// reference, and the variational lower bound.

#include <cmath>
#include <iostream>

#include "boss/infobound.hpp"

int main() {
    using namespace boss::info;

    DiscreteChannel channel;
    channel.input_marginal.probs = {0.5, 0.5};
    channel.rows = {{{0.75, 0.25}}, {{0.25, 0.75}}};

    double mi = mutual_information(channel);
    std::cout << "binary symmetric channel, flip probability 0.25\n";
    std::cout << "  information: " << mi << " nats (" << nats_to_bits(mi)
              << " bits)\n";

    DiscreteDistribution skewed{{0.3, 0.7}};
    auto bound = check_upper_bound(channel, skewed);
    std::cout << "  expected divergence from reference (0.3, 0.7): "
              << bound.expected_kl << " nats, slack " << bound.slack
              << (bound.tight ? " (tight)" : " (loose)") << "\n";

    auto exact = check_upper_bound(channel, marginal(channel));
    std::cout << "  with the true marginal as reference: slack "
              << exact.slack << (exact.tight ? " (tight)" : " (loose)")
              << "\n";

    double achieved = ba_lower_bound(channel, channel.rows);
    std::cout << "  variational bound with the true rows: " << achieved
              << " nats (gap " << mi - achieved << ")\n";
    return 0;
}
