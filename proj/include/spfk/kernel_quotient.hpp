#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "spfk/predictive.hpp"

namespace spfk {

struct QuotientCluster {
    std::vector<std::uint32_t> members;  // state ids, in join order
    double mass = 0.0;                   // sum of member masses
    Distribution kernel;                 // mass-weighted centroid, sums to 1
};

// Partition of the non-root states with nonempty next-distributions.
struct QuotientStates {
    std::vector<QuotientCluster> clusters;  // in creation order
    double epsilon = 0.0;
    std::uint64_t source_size = 0;
};

// Greedy sequential clustering: states visited in descending mass order
// (ties by ascending id); a state joins the first cluster whose centroid is
// within Jensen-Shannon divergence epsilon of its kernel, updating the
// centroid, else opens a new cluster. Deterministic.
QuotientStates kernel_quotient(const Automaton& a, double epsilon);

// E(cluster) = mass * KL(kernel || baseline), descending, ties by ascending
// cluster creation index.
Spectrum quotient_spectrum(const QuotientStates& q, const Distribution& baseline);

void write_clusters_json(const QuotientStates& q, const std::filesystem::path& path);

}  // namespace spfk
