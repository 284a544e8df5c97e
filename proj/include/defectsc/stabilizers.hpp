#pragma once

#include <algorithm>
#include <deque>
#include <limits>
#include <string>
#include <numeric>
#include <vector>

#include "defectsc/lattice.hpp"

namespace defectsc {

struct Stabilizer {
    int id = 0;
    Kind kind = Kind::Z;
    int home = 0;                 // upper-left unit ancilla; names the stabilizer and breaks priority ties
    std::vector<int> data;        // sorted working data devices
    std::vector<int> ancillas;    // sorted working syndrome devices usable by the circuit
    std::vector<int> units;       // home ancillas of the merged units
    int merged_from() const { return static_cast<int>(units.size()); }
    std::string name() const { return std::string(1, kind_char(kind)) + std::to_string(home); }
};

// Stabilizers of one kind as nodes, data qubits as edges. The two terminals are extra nodes.
// Used for logical paths, reduced distance and noiseless spatial decoding.
class DualGraph {
public:
    struct Edge {
        int a, b, qubit;
    };

    DualGraph() = default;
    DualGraph(Kind kind, std::vector<int> stab_ids, int num_devices)
        : kind_(kind), stab_ids_(std::move(stab_ids)), local_(static_cast<std::size_t>(num_devices), -1) {}

    Kind kind() const { return kind_; }
    int num_stabs() const { return static_cast<int>(stab_ids_.size()); }
    int num_nodes() const { return num_stabs() + 2; }
    int side_a() const { return num_stabs(); }
    int side_b() const { return num_stabs() + 1; }
    bool is_side(int n) const { return n >= num_stabs(); }
    int stab_id(int node) const { return stab_ids_[node]; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<int>& incident(int node) const { return adj_[node]; }
    // Edge index carried by a data device, or -1.
    int edge_of(int qubit) const { return qubit < static_cast<int>(edge_of_.size()) ? edge_of_[qubit] : -1; }

    void set_local(int global_stab, int node) {
        if (global_stab >= static_cast<int>(local_.size())) local_.resize(global_stab + 1, -1);
        local_[global_stab] = node;
    }
    int local(int global_stab) const { return local_[global_stab]; }

    void add_edge(int a, int b, int qubit) {
        if (adj_.empty()) adj_.resize(num_nodes());
        if (qubit >= static_cast<int>(edge_of_.size())) edge_of_.resize(qubit + 1, -1);
        edge_of_[qubit] = static_cast<int>(edges_.size());
        adj_[a].push_back(static_cast<int>(edges_.size()));
        adj_[b].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({a, b, qubit});
    }
    void finalize() {
        if (adj_.empty()) adj_.resize(num_nodes());
        for (auto& v : adj_)
            std::sort(v.begin(), v.end(), [&](int x, int y) { return edges_[x].qubit < edges_[y].qubit; });
    }

    int other_end(int e, int node) const { return edges_[e].a == node ? edges_[e].b : edges_[e].a; }

    // Hop distances from `src`; terminals are sinks unless they are the source.
    std::vector<int> bfs(int src, const std::vector<std::uint8_t>* usable = nullptr) const {
        std::vector<int> dist(num_nodes(), std::numeric_limits<int>::max());
        std::deque<int> q;
        dist[src] = 0;
        q.push_back(src);
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            if (u != src && is_side(u)) continue;
            for (int e : adj_[u]) {
                if (usable && !(*usable)[e]) continue;
                int v = other_end(e, u);
                if (dist[v] == std::numeric_limits<int>::max()) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        return dist;
    }

    // Lexicographically smallest shortest path (by qubit label) from `from` to `to`, as data devices.
    std::vector<int> shortest_path(int from, int to, const std::vector<std::uint8_t>* usable = nullptr) const {
        std::vector<int> dist = bfs(to, usable);
        std::vector<int> out;
        if (dist[from] == std::numeric_limits<int>::max()) return out;
        int cur = from;
        while (cur != to) {
            int best = -1;
            for (int e : adj_[cur]) {
                if (usable && !(*usable)[e]) continue;
                int v = other_end(e, cur);
                if (dist[v] != std::numeric_limits<int>::max() && dist[v] == dist[cur] - 1 && (v == to || !is_side(v))) {
                    best = e;
                    break;  // incident lists are sorted by qubit label
                }
            }
            out.push_back(edges_[best].qubit);
            cur = other_end(best, cur);
        }
        return out;
    }

private:
    Kind kind_ = Kind::Z;
    std::vector<int> stab_ids_;
    std::vector<int> local_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
    std::vector<int> edge_of_;
};

struct StabilizerSet {
    int distance = 0;
    int num_devices = 0;
    std::vector<Stabilizer> stabilizers;
    DualGraph dual_x;  // X stabilizers; terminals west/east
    DualGraph dual_z;  // Z stabilizers; terminals north/south
    std::vector<int> x_logical;  // X-type chain north-south, commutes with Z stabilizers
    std::vector<int> z_logical;  // Z-type chain west-east, commutes with X stabilizers

    const DualGraph& dual(Kind k) const { return k == Kind::X ? dual_x : dual_z; }
    int count(Kind k) const {
        int n = 0;
        for (const auto& s : stabilizers) n += (s.kind == k);
        return n;
    }
    std::vector<int> x_bare;     // X chain commuting with every broken Z unit; empty if none exists
    std::vector<int> z_bare;

    // Operator whose parity against a residual of error kind `err` reveals a logical flip.
    // Bare chains are preferred so that errors on merged-away units count as gauge, not logical.
    const std::vector<int>& logical_check(Kind err) const {
        if (err == Kind::X) return z_bare.empty() ? z_logical : z_bare;
        return x_bare.empty() ? x_logical : x_bare;
    }
};

namespace detail {

// Working syndrome devices around the units: the 3x3 block of each unit plus every neighbour of its data qubits.
inline std::vector<int> block_syndromes(const Chip& chip, const std::vector<int>& units) {
    std::vector<int> out;
    auto take = [&](int idx) {
        if (idx >= 0 && !chip.is_data(idx) && chip.working(idx)) out.push_back(idx);
    };
    for (int a : units) {
        DeviceId c = chip.device(a);
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc)
                if (chip.in_grid(c.row + dr, c.col + dc)) take(chip.index(c.row + dr, c.col + dc));
        for (int q : unit_support(chip, a))
            if (chip.working(q))
                for (int n : chip.neighbors(q)) take(n);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Edges of `dg` whose qubit is measured by at least one stabilizer of the other kind.
inline std::vector<std::uint8_t> usable_edges(const DualGraph& dg, const DualGraph& opposite) {
    std::vector<std::uint8_t> ok(dg.edges().size(), 0);
    for (std::size_t e = 0; e < dg.edges().size(); ++e) {
        int oe = opposite.edge_of(dg.edges()[e].qubit);
        if (oe < 0) continue;
        const auto& ed = opposite.edges()[oe];
        ok[e] = !(opposite.is_side(ed.a) && opposite.is_side(ed.b));
    }
    return ok;
}

}  // namespace detail

inline StabilizerSet build_stabilizer_set(const Chip& chip) {
    StabilizerSet set;
    set.distance = chip.distance();
    set.num_devices = chip.num_devices();

    struct Pending {
        Stabilizer stab;
        std::vector<int> unit_idx;
    };
    struct KindInfo {
        MergeClusters mc;
        std::vector<int> node_of_unit;  // -1 side a, -2 side b, else pending index
    };
    std::vector<Pending> pending;
    KindInfo info[2];

    for (Kind k : {Kind::X, Kind::Z}) {
        KindInfo& ki = info[static_cast<int>(k)];
        ki.mc = merge_clusters(chip, k);
        int nu = static_cast<int>(ki.mc.ancillas.size());
        ki.node_of_unit.assign(nu, 0);
        std::vector<int> root_to_pending(nu, -1);
        for (int u = 0; u < nu; ++u) {
            int r = ki.mc.group[u];
            std::uint8_t t = ki.mc.touches[r];
            if (t == 3)
                throw ChipError(ChipError::Code::unencodable,
                                std::string("faulty data chain joins opposite ") + kind_char(k) + " terminals");
            if (t == 1) {
                ki.node_of_unit[u] = -1;
                continue;
            }
            if (t == 2) {
                ki.node_of_unit[u] = -2;
                continue;
            }
            if (root_to_pending[r] < 0) {
                root_to_pending[r] = static_cast<int>(pending.size());
                Pending p;
                p.stab.kind = k;
                pending.push_back(p);
            }
            Pending& p = pending[root_to_pending[r]];
            p.unit_idx.push_back(u);
            p.stab.units.push_back(ki.mc.ancillas[u]);
            ki.node_of_unit[u] = root_to_pending[r];
        }
    }

    for (auto& p : pending) {
        std::sort(p.stab.units.begin(), p.stab.units.end());
        p.stab.home = p.stab.units.front();
        if (p.stab.units.size() == 1 && chip.working(p.stab.home))
            p.stab.ancillas = {p.stab.home};
        else
            p.stab.ancillas = detail::block_syndromes(chip, p.stab.units);
    }
    std::vector<int> order(pending.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return pending[a].stab.home < pending[b].stab.home; });
    std::vector<int> final_id(pending.size());
    for (std::size_t i = 0; i < order.size(); ++i) final_id[order[i]] = static_cast<int>(i);
    for (int i : order) {
        Stabilizer s = pending[i].stab;
        s.id = final_id[i];
        set.stabilizers.push_back(std::move(s));
    }

    std::vector<DualGraph> unit_graphs;  // X then Z
    for (Kind k : {Kind::X, Kind::Z}) {
        KindInfo& ki = info[static_cast<int>(k)];
        std::vector<int> ids;
        for (const auto& s : set.stabilizers)
            if (s.kind == k) ids.push_back(s.id);
        DualGraph dg(k, ids, chip.num_devices());
        for (std::size_t n = 0; n < ids.size(); ++n) dg.set_local(ids[n], static_cast<int>(n));
        std::vector<int> pos(chip.num_devices(), -1);
        for (std::size_t u = 0; u < ki.mc.ancillas.size(); ++u) pos[ki.mc.ancillas[u]] = static_cast<int>(u);
        auto [first, second] = terminal_pair(k);
        auto node_for_unit = [&](int u) {
            int v = ki.node_of_unit[u];
            if (v == -1) return dg.side_a();
            if (v == -2) return dg.side_b();
            return dg.local(final_id[v]);
        };
        for (int q = 0; q < chip.num_devices(); ++q) {
            if (!chip.is_data(q) || !chip.working(q)) continue;
            std::vector<int> ends;
            for (int n : chip.neighbors(q))
                if (n >= 0 && chip.ancilla_kind(n) == k) ends.push_back(node_for_unit(pos[n]));
            if (ends.size() == 1) ends.push_back(terminal_side(chip, k, q) == first ? dg.side_a() : dg.side_b());
            if (ends.size() != 2 || ends[0] == ends[1]) continue;
            dg.add_edge(ends[0], ends[1], q);
            for (int e : ends)
                if (!dg.is_side(e)) set.stabilizers[dg.stab_id(e)].data.push_back(q);
        }
        dg.finalize();
        (k == Kind::X ? set.dual_x : set.dual_z) = std::move(dg);

        // Unit-level graph: merged and boundary-absorbed units stay separate nodes, so its paths
        // commute with every broken unit.
        int nu = static_cast<int>(ki.mc.ancillas.size());
        std::vector<int> unit_node(nu);
        std::iota(unit_node.begin(), unit_node.end(), 0);
        std::vector<int> ids_u(nu);
        std::iota(ids_u.begin(), ids_u.end(), 0);
        DualGraph ug(k, ids_u, 0);
        for (int q = 0; q < chip.num_devices(); ++q) {
            if (!chip.is_data(q) || !chip.working(q)) continue;
            std::vector<int> ends;
            for (int n : chip.neighbors(q))
                if (n >= 0 && chip.ancilla_kind(n) == k) ends.push_back(unit_node[pos[n]]);
            if (ends.size() == 1) ends.push_back(terminal_side(chip, k, q) == first ? ug.side_a() : ug.side_b());
            if (ends.size() != 2 || ends[0] == ends[1]) continue;
            ug.add_edge(ends[0], ends[1], q);
        }
        ug.finalize();
        unit_graphs.push_back(std::move(ug));
    }
    for (auto& s : set.stabilizers) std::sort(s.data.begin(), s.data.end());

    auto usable_z = detail::usable_edges(set.dual_z, set.dual_x);
    auto usable_x = detail::usable_edges(set.dual_x, set.dual_z);
    {
        const DualGraph &ux = unit_graphs[0], &uz = unit_graphs[1];
        set.z_bare = ux.shortest_path(ux.side_a(), ux.side_b());
        set.x_bare = uz.shortest_path(uz.side_a(), uz.side_b());
    }
    set.x_logical = set.dual_z.shortest_path(set.dual_z.side_a(), set.dual_z.side_b(), &usable_z);
    set.z_logical = set.dual_x.shortest_path(set.dual_x.side_a(), set.dual_x.side_b(), &usable_x);
    if (set.x_logical.empty() || set.z_logical.empty())
        throw ChipError(ChipError::Code::unencodable, "no logical operator survives reconfiguration");
    return set;
}

// True iff every X/Z pair overlaps on an even number of qubits.
inline bool verify_commutation(const std::vector<Stabilizer>& stabs) {
    for (const auto& a : stabs) {
        if (a.kind != Kind::X) continue;
        for (const auto& b : stabs) {
            if (b.kind != Kind::Z) continue;
            std::size_t i = 0, j = 0, common = 0;
            while (i < a.data.size() && j < b.data.size()) {
                if (a.data[i] < b.data[j]) ++i;
                else if (a.data[i] > b.data[j]) ++j;
                else { ++common; ++i; ++j; }
            }
            if (common % 2) return false;
        }
    }
    return true;
}
inline bool verify_commutation(const StabilizerSet& set) { return verify_commutation(set.stabilizers); }

// Length of the shortest logical chain of the given operator type (X runs north-south, Z west-east).
inline int reduced_distance(const StabilizerSet& set, Kind op) {
    return static_cast<int>(op == Kind::X ? set.x_logical.size() : set.z_logical.size());
}

inline int reduced_distance(const Chip& chip, Kind op) {
    if (!check_encodable(chip)) throw ChipError(ChipError::Code::unencodable, "chip is not encodable");
    return reduced_distance(build_stabilizer_set(chip), op);
}

}  // namespace defectsc
