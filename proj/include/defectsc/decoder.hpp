#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "defectsc/matching.hpp"
#include "defectsc/nest.hpp"

namespace defectsc {

// One sign change between consecutive outcomes of a stabilizer.
struct DetectionEvent {
    EventId id;
    long long round = 0;
};

// Events from per-stabilizer outcome sequences (0 = +1, 1 = -1); the reference before the first outcome is +1.
inline std::vector<EventId> extract_events(const std::vector<std::vector<int>>& outcomes) {
    std::vector<EventId> out;
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        int last = 0;
        for (std::size_t k = 0; k < outcomes[s].size(); ++k) {
            if (outcomes[s][k] != last) out.push_back({static_cast<int>(s), static_cast<long long>(k)});
            last = outcomes[s][k];
        }
    }
    return out;
}

// Per-kind decoding data shared read-only by all workers.
class KindDecoder {
public:
    KindDecoder(const StabilizerSet& set, const KindNest& kn, double p, int span)
        : set_(&set), kn_(&kn), table_(kn, p, span) {
        err_ = kn.error_kind;
        check_ = set.logical_check(err_);
        std::sort(check_.begin(), check_.end());
        const DualGraph& dg = set.dual(kn.stab_kind);
        S_ = dg.num_stabs();
        support_.resize(S_);
        for (int ls = 0; ls < S_; ++ls) support_[ls] = set.stabilizers[dg.stab_id(ls)].data;
        in_check_.assign(set.num_devices, 0);
        for (int q : check_) in_check_[q] = 1;
        // Hop distances and logical parity of canonical spatial chains, for the ideal closure.
        int nodes = dg.num_nodes();
        hop_.assign(static_cast<std::size_t>(S_) * nodes, std::numeric_limits<int>::max());
        par_.assign(static_cast<std::size_t>(S_) * nodes, 0);
        for (int a = 0; a < S_; ++a) {
            auto d = dg.bfs(a);
            for (int b = 0; b < nodes; ++b) {
                hop_[static_cast<std::size_t>(a) * nodes + b] = d[b];
                if (d[b] == std::numeric_limits<int>::max() || a == b) continue;
                int par = 0;
                for (int q : dg.shortest_path(a, b)) par ^= in_check_[q];
                par_[static_cast<std::size_t>(a) * nodes + b] = static_cast<std::uint8_t>(par);
            }
        }
        nodes_ = nodes;
    }

    const KindNest& nest() const { return *kn_; }
    const DistanceTable& table() const { return table_; }
    const StabilizerSet& set() const { return *set_; }
    Kind error_kind() const { return err_; }
    const std::vector<int>& check() const { return check_; }

    double distance(const EventId& a, const EventId& b) const {
        auto [ua, ba] = kn_->vertex_of(a);
        auto [ub, bb] = kn_->vertex_of(b);
        return table_.between(ua, ub, bb - ba);
    }
    double boundary_distance(const EventId& a) const { return table_.to_boundary(kn_->vertex_of(a).first); }

    // Data qubits flipped by a correction along the shortest path between two events (or to the boundary).
    void flip_path(const EventId& a, const EventId* b, std::vector<std::uint8_t>& frame) const {
        auto [ua, ba] = kn_->vertex_of(a);
        std::vector<int> es;
        if (b) {
            auto [ub, bb] = kn_->vertex_of(*b);
            es = table_.path_edges(ua, ub, bb - ba);
        } else {
            es = table_.boundary_edges(ua);
        }
        for (int e : es)
            for (int q : kn_->edges[e].rep) frame[q] ^= 1;
    }

    // Parity of the residual against the logical check after an ideal spatial matching of its syndrome.
    bool closed_logical(const std::vector<std::uint8_t>& residual) const {
        int par = 0;
        for (int q : check_) par ^= residual[q];
        std::vector<int> defects;
        for (int ls = 0; ls < S_; ++ls) {
            int s = 0;
            for (int q : support_[ls]) s ^= residual[q];
            if (s) defects.push_back(ls);
        }
        if (defects.empty()) return par != 0;
        const DualGraph& dg = set_->dual(kn_->stab_kind);
        int n = static_cast<int>(defects.size());
        auto bnode = [&](int ls) {
            int da = hop(ls, dg.side_a()), db = hop(ls, dg.side_b());
            return da <= db ? dg.side_a() : dg.side_b();
        };
        auto cost = [&](int i, int j) -> double {
            constexpr double inf = std::numeric_limits<double>::infinity();
            bool si = i >= n, sj = j >= n;
            if (si && sj) return 0.0;
            if (si || sj) {
                int ev = si ? j : i, sur = si ? i : j;
                if (sur - n != ev) return inf;
                int h = hop(defects[ev], bnode(defects[ev]));
                return h == std::numeric_limits<int>::max() ? inf : h;
            }
            int h = hop(defects[i], defects[j]);
            return h == std::numeric_limits<int>::max() ? inf : h;
        };
        auto mate = min_weight_perfect_matching(2 * n, cost);
        for (int i = 0; i < n; ++i) {
            int j = mate[i];
            if (j < 0) continue;
            if (j >= n) par ^= parity(defects[i], bnode(defects[i]));
            else if (j > i) par ^= parity(defects[i], defects[j]);
        }
        return par != 0;
    }

private:
    int hop(int a, int node) const { return hop_[static_cast<std::size_t>(a) * nodes_ + node]; }
    int parity(int a, int node) const { return par_[static_cast<std::size_t>(a) * nodes_ + node]; }

    const StabilizerSet* set_;
    const KindNest* kn_;
    DistanceTable table_;
    Kind err_;
    std::vector<int> check_;
    std::vector<std::uint8_t> in_check_;
    int S_ = 0;
    int nodes_ = 0;
    std::vector<std::vector<int>> support_;
    std::vector<int> hop_;
    std::vector<std::uint8_t> par_;
};

struct Matching {
    std::vector<std::pair<int, int>> pairs;  // event indices; second = -1 for the boundary
    double weight = 0.0;
};

// Minimum-weight perfect matching of events, each with its own boundary surrogate.
// Independent clusters are solved separately; an event pair is only offered when it beats both boundary legs.
inline Matching mwpm(const std::vector<EventId>& events, const KindDecoder& dec) {
    Matching out;
    int n = static_cast<int>(events.size());
    if (n == 0) return out;
    std::vector<double> bd(n);
    for (int i = 0; i < n; ++i) bd[i] = dec.boundary_distance(events[i]);
    std::vector<double> dist(static_cast<std::size_t>(n) * n, std::numeric_limits<double>::infinity());
    UnionFind uf(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = dec.distance(events[i], events[j]);
            if (d < bd[i] + bd[j]) {
                dist[static_cast<std::size_t>(i) * n + j] = dist[static_cast<std::size_t>(j) * n + i] = d;
                uf.unite(i, j);
            }
        }
    std::map<int, std::vector<int>> comps;
    for (int i = 0; i < n; ++i) comps[uf.find(i)].push_back(i);
    for (auto& [root, members] : comps) {
        int m = static_cast<int>(members.size());
        if (m == 1) {
            out.pairs.push_back({members[0], -1});
            out.weight += bd[members[0]];
            continue;
        }
        auto cost = [&](int a, int b) -> double {
            bool sa = a >= m, sb = b >= m;
            if (sa && sb) return 0.0;
            if (sa || sb) {
                int ev = sa ? b : a, sur = sa ? a : b;
                return sur - m == ev ? bd[members[ev]] : std::numeric_limits<double>::infinity();
            }
            return dist[static_cast<std::size_t>(members[a]) * n + members[b]];
        };
        auto mate = min_weight_perfect_matching(2 * m, cost);
        for (int a = 0; a < m; ++a) {
            int b = mate[a];
            if (b >= m) {
                out.pairs.push_back({members[a], -1});
                out.weight += bd[members[a]];
            } else if (b > a) {
                out.pairs.push_back({members[a], members[b]});
                out.weight += cost(a, b);
            }
        }
    }
    return out;
}

inline void apply_correction(const Matching& m, const std::vector<EventId>& events, const KindDecoder& dec,
                             std::vector<std::uint8_t>& frame) {
    for (auto [i, j] : m.pairs) dec.flip_path(events[i], j >= 0 ? &events[j] : nullptr, frame);
}

// Whether residual X bits anticommute with the Z logical, and residual Z bits with the X logical.
inline std::pair<bool, bool> check_logical_error(const std::vector<std::uint8_t>& residual_x,
                                                 const std::vector<std::uint8_t>& residual_z, const StabilizerSet& set) {
    int px = 0, pz = 0;
    for (int q : set.logical_check(Kind::X)) px ^= residual_x[q];
    for (int q : set.logical_check(Kind::Z)) pz ^= residual_z[q];
    return {px != 0, pz != 0};
}

// Sliding-window decoder for one lane and one error kind.
class WindowDecoder {
public:
    WindowDecoder(const KindDecoder& dec, int num_devices) : dec_(&dec), correction_(num_devices, 0) {}

    void add_event(const EventId& e, long long round) { active_.push_back({e, round}); }
    const std::vector<DetectionEvent>& active() const { return active_; }
    const std::vector<std::uint8_t>& correction() const { return correction_; }
    long long committed_pairs() const { return committed_; }

    // Matches all held events, commits pairs lying entirely in rounds <= oldest, and returns
    // whether the logical state at the end of `oldest` differs from the previous verdict.
    bool decode(long long oldest, const std::vector<std::uint8_t>& snapshot) {
        if (!active_.empty()) {
            std::vector<EventId> ids;
            ids.reserve(active_.size());
            for (const auto& a : active_) ids.push_back(a.id);
            Matching m = mwpm(ids, *dec_);
            std::vector<char> gone(active_.size(), 0);
            for (auto [i, j] : m.pairs) {
                bool old_i = active_[i].round <= oldest;
                if (j < 0) {
                    if (!old_i) continue;
                    dec_->flip_path(ids[i], nullptr, correction_);
                    gone[i] = 1;
                } else {
                    if (!old_i || active_[j].round > oldest) continue;
                    dec_->flip_path(ids[i], &ids[j], correction_);
                    gone[i] = gone[j] = 1;
                }
                ++committed_;
            }
            std::vector<DetectionEvent> keep;
            for (std::size_t i = 0; i < active_.size(); ++i)
                if (!gone[i]) keep.push_back(active_[i]);
            active_.swap(keep);
        }
        residual_.resize(snapshot.size());
        for (std::size_t q = 0; q < snapshot.size(); ++q) residual_[q] = snapshot[q] ^ correction_[q];
        bool state = dec_->closed_logical(residual_);
        bool flipped = state != state_;
        state_ = state;
        return flipped;
    }

private:
    const KindDecoder* dec_;
    std::vector<DetectionEvent> active_;
    std::vector<std::uint8_t> correction_;
    std::vector<std::uint8_t> residual_;
    bool state_ = false;
    long long committed_ = 0;
};

}  // namespace defectsc
