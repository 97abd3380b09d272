#include "spfk/kernel_quotient.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "spfk/error.hpp"

namespace spfk {

namespace {

// centroid <- (centroid * old_mass + kernel * mass) / (old_mass + mass),
// merging sorted sparse supports.
Distribution merge_centroid(const Distribution& centroid, double old_mass,
                            const Distribution& kernel, double mass) {
    Distribution out;
    out.probs.reserve(centroid.probs.size() + kernel.probs.size());
    const double denom = old_mass + mass;
    auto ci = centroid.probs.begin();
    auto ki = kernel.probs.begin();
    while (ci != centroid.probs.end() || ki != kernel.probs.end()) {
        std::uint32_t token;
        double cv = 0.0, kv = 0.0;
        if (ki == kernel.probs.end() ||
            (ci != centroid.probs.end() && ci->first < ki->first)) {
            token = ci->first;
            cv = ci->second;
            ++ci;
        } else if (ci == centroid.probs.end() || ki->first < ci->first) {
            token = ki->first;
            kv = ki->second;
            ++ki;
        } else {
            token = ci->first;
            cv = ci->second;
            kv = ki->second;
            ++ci;
            ++ki;
        }
        out.probs.emplace_back(token, (cv * old_mass + kv * mass) / denom);
    }
    return out;
}

}  // namespace

QuotientStates kernel_quotient(const Automaton& a, double epsilon) {
    if (!a.occ_computed) throw error("occurrences not computed");
    if (epsilon < 0.0) throw error("epsilon must be nonnegative");

    std::uint64_t total_occ = 0;
    for (std::size_t i = 1; i < a.states.size(); ++i) total_occ += a.states[i].occ;

    // Visit order: descending mass, ties by ascending state id. Only states
    // with outgoing transitions take part.
    std::vector<std::uint32_t> order;
    order.reserve(a.states.size() - 1);
    for (std::size_t i = 1; i < a.states.size(); ++i)
        if (!a.states[i].transitions.empty()) order.push_back(static_cast<std::uint32_t>(i));
    std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
        if (a.states[x].occ != a.states[y].occ) return a.states[x].occ > a.states[y].occ;
        return x < y;
    });

    QuotientStates q;
    q.epsilon = epsilon;
    q.source_size = a.source_length;
    for (std::uint32_t id : order) {
        double mass = static_cast<double>(a.states[id].occ) / static_cast<double>(total_occ);
        Distribution kernel = *state_next_distribution(a, id);

        bool placed = false;
        for (QuotientCluster& cluster : q.clusters) {
            if (jensen_shannon(kernel, cluster.kernel) <= epsilon) {
                // Identical kernels leave the centroid untouched.
                if (kernel.probs != cluster.kernel.probs)
                    cluster.kernel =
                        merge_centroid(cluster.kernel, cluster.mass, kernel, mass);
                cluster.mass += mass;
                cluster.members.push_back(id);
                placed = true;
                break;
            }
        }
        if (!placed) {
            QuotientCluster cluster;
            cluster.members.push_back(id);
            cluster.mass = mass;
            cluster.kernel = std::move(kernel);
            q.clusters.push_back(std::move(cluster));
        }
    }
    return q;
}

Spectrum quotient_spectrum(const QuotientStates& q, const Distribution& baseline) {
    std::vector<std::pair<double, std::size_t>> entries;
    entries.reserve(q.clusters.size());
    for (std::size_t i = 0; i < q.clusters.size(); ++i) {
        const QuotientCluster& c = q.clusters[i];
        entries.emplace_back(c.mass * kl_divergence(c.kernel, baseline), i);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });

    Spectrum sp;
    sp.provenance = Provenance::quotient;
    sp.normalized = false;
    sp.source_size = q.source_size;
    sp.weights.reserve(entries.size());
    for (const auto& [w, id] : entries) sp.weights.push_back(w);
    return sp;
}

void write_clusters_json(const QuotientStates& q, const std::filesystem::path& path) {
    nlohmann::json j;
    j["epsilon"] = q.epsilon;
    j["source_size"] = q.source_size;
    nlohmann::json clusters = nlohmann::json::array();
    for (const QuotientCluster& c : q.clusters) {
        nlohmann::json jc;
        jc["mass"] = c.mass;
        jc["members"] = c.members;
        nlohmann::json kernel = nlohmann::json::array();
        for (const auto& [token, p] : c.kernel.probs)
            kernel.push_back({token, p});
        jc["kernel"] = std::move(kernel);
        clusters.push_back(std::move(jc));
    }
    j["clusters"] = std::move(clusters);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw error("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

}  // namespace spfk
