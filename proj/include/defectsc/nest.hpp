#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <tuple>
#include <vector>

#include "defectsc/noise.hpp"
#include "defectsc/stabilizers.hpp"

namespace defectsc {

// Measurement of stabilizer `stab` with running index k; block = k / m, slot = k % m.
struct EventId {
    int stab;
    long long k;
    friend bool operator==(const EventId&, const EventId&) = default;
    friend auto operator<=>(const EventId&, const EventId&) = default;
};

struct NestEdge {
    int u = -1;
    int v = -1;     // -1 for a boundary edge
    int dv = 0;     // block offset of v relative to u
    int side = -1;  // boundary side 0 (first terminal) or 1
    bool cls = false;
    double coeff = 0.0;    // probability / p
    std::vector<int> rep;  // data qubits flipped by a correction along this edge
};

// Matching graph for one error kind; vertices are the measurements of one block.
struct KindNest {
    Kind stab_kind = Kind::Z;   // stabilizers whose outcomes form the vertices
    Kind error_kind = Kind::X;  // Pauli component they detect
    int period = 0;
    std::vector<int> stab_ids;  // local -> global
    std::vector<int> local;     // global -> local or -1
    std::vector<int> m;         // measurements per block, per local stabilizer
    std::vector<int> offset;    // first vertex of each local stabilizer
    std::vector<int> vstab;     // vertex -> local stabilizer
    std::vector<int> vtime;     // vertex -> block step of its MEAS
    std::vector<NestEdge> edges;
    double injected = 0.0;   // sum of outcome coefficients over all locations
    double edge_mass = 0.0;  // coefficient mass placed on edges (split pairs counted each)
    double discarded = 0.0;  // outcomes without events in this kind
    double split_mass = 0.0; // outcomes decomposed into several pairs

    int num_vertices() const { return static_cast<int>(vstab.size()); }

    // Vertex id and block of a measurement.
    std::pair<int, long long> vertex_of(const EventId& e) const {
        int ls = local[e.stab];
        long long mm = m[ls];
        long long b = e.k >= 0 ? e.k / mm : -((-e.k + mm - 1) / mm);
        int i = static_cast<int>(e.k - b * mm);
        return {offset[ls] + i, b};
    }
    EventId event_of(int vertex, long long block) const {
        int ls = vstab[vertex];
        return {stab_ids[ls], block * m[ls] + (vertex - offset[ls])};
    }
    int degree(int vertex) const {
        int n = 0;
        for (const auto& e : edges) n += (e.u == vertex) + (e.v == vertex);
        return n;
    }
    double weight(const NestEdge& e, double p) const {
        double q = std::min(0.999, e.coeff * p);
        return -std::log(q);
    }
};

struct Nest {
    KindNest for_x;  // X errors, Z-stabilizer vertices
    KindNest for_z;  // Z errors, X-stabilizer vertices
    const KindNest& of_error(Kind err) const { return err == Kind::X ? for_x : for_z; }
    KindNest& of_error(Kind err) { return err == Kind::X ? for_x : for_z; }
};

namespace detail {

inline std::vector<int> sym_diff(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool odd_overlap(const std::vector<int>& a, const std::vector<int>& sorted_check) {
    int n = 0;
    for (int q : a) n += std::binary_search(sorted_check.begin(), sorted_check.end(), q);
    return n % 2 == 1;
}

// Outcome of one basis injection: events and residual per error kind.
struct Footprint {
    std::vector<EventId> ev[2];   // [0] X-error kind (Z stabs), [1] Z-error kind (X stabs)
    std::vector<int> res[2];      // data qubits with an X (resp. Z) component left behind
};

inline Footprint xor_fp(const Footprint& a, const Footprint& b) {
    Footprint o;
    for (int k = 0; k < 2; ++k) {
        std::set_symmetric_difference(a.ev[k].begin(), a.ev[k].end(), b.ev[k].begin(), b.ev[k].end(),
                                      std::back_inserter(o.ev[k]));
        o.res[k] = sym_diff(a.res[k], b.res[k]);
    }
    return o;
}

class NestBuilder {
public:
    NestBuilder(const Chip& chip, const StabilizerSet& set, const WholeCircuit& wc, const LocationTable& lt)
        : chip_(chip), set_(set), wc_(wc), lt_(lt) {
        int maxd = *std::max_element(wc.depth.begin(), wc.depth.end());
        horizon_ = 4 * wc.period + 2 * maxd + 2;
        for (int k = 0; k < 2; ++k) {
            Kind sk = k == 0 ? Kind::Z : Kind::X;
            check_[k] = set.logical_check(k == 0 ? Kind::X : Kind::Z);
            std::sort(check_[k].begin(), check_[k].end());
            (void)sk;
        }
    }

    Nest build() {
        Nest nest;
        init_kind(nest.for_x, Kind::Z, Kind::X);
        init_kind(nest.for_z, Kind::X, Kind::Z);
        // Basis injections: per location, X/Z on each operand or a flip.
        struct Basis {
            int t, loc, slot;
        };
        std::vector<Basis> basis;
        for (int t = 0; t < wc_.period; ++t)
            for (int li = lt_.base[t]; li < lt_.base[t + 1]; ++li) {
                const Location& l = lt_.locs[li];
                int nb = (l.kind == LocKind::init || l.kind == LocKind::meas) ? 1 : (l.kind == LocKind::one ? 2 : 4);
                for (int s = 0; s < nb; ++s) basis.push_back({t, li - lt_.base[t], s});
            }
        std::vector<Footprint> fps(basis.size());
        for (std::size_t b0 = 0; b0 < basis.size(); b0 += 64) {
            std::size_t n = std::min<std::size_t>(64, basis.size() - b0);
            std::vector<std::vector<Injection>> inj(wc_.period);
            for (std::size_t j = 0; j < n; ++j) {
                const Basis& bs = basis[b0 + j];
                Injection e{bs.t, bs.loc};
                e.lanes = std::uint64_t{1} << j;
                switch (bs.slot) {
                    case 0: e.pa = Pauli::X; e.flip = true; break;
                    case 1: e.pa = Pauli::Z; break;
                    case 2: e.pb = Pauli::X; break;
                    case 3: e.pb = Pauli::Z; break;
                }
                inj[bs.t].push_back(e);
            }
            run_batch(inj, n, fps.data() + b0);
        }
        // Combine basis footprints into channel outcomes.
        std::size_t bi = 0;
        for (int t = 0; t < wc_.period; ++t)
            for (int li = lt_.base[t]; li < lt_.base[t + 1]; ++li) {
                const Location& l = lt_.locs[li];
                if (l.kind == LocKind::init || l.kind == LocKind::meas) {
                    add_outcome(nest, fps[bi], 1.0);
                    bi += 1;
                } else if (l.kind == LocKind::one) {
                    const Footprint& fx = fps[bi];
                    const Footprint& fz = fps[bi + 1];
                    add_outcome(nest, fx, 1.0 / 3);
                    add_outcome(nest, fz, 1.0 / 3);
                    add_outcome(nest, xor_fp(fx, fz), 1.0 / 3);
                    bi += 2;
                } else {
                    Footprint one[4];
                    for (int a = 0; a < 4; ++a) {
                        // IXZY labels: bit0 = X, bit1 = Z
                        Footprint f;
                        if (a & 1) f = xor_fp(f, fps[bi]);
                        if (a & 2) f = xor_fp(f, fps[bi + 1]);
                        one[a] = f;
                    }
                    Footprint two[4];
                    for (int b = 0; b < 4; ++b) {
                        Footprint f;
                        if (b & 1) f = xor_fp(f, fps[bi + 2]);
                        if (b & 2) f = xor_fp(f, fps[bi + 3]);
                        two[b] = f;
                    }
                    for (int k = 1; k < 16; ++k) add_outcome(nest, xor_fp(one[k >> 2], two[k & 3]), 1.0 / 15);
                    bi += 4;
                }
            }
        return nest;
    }

    // Footprint of arbitrary injections; used by the enumeration oracle.
    Footprint footprint_of(const std::vector<Injection>& at_block_steps) {
        std::vector<std::vector<Injection>> inj(wc_.period);
        for (auto e : at_block_steps) {
            e.lanes = 1;
            inj[e.step].push_back(e);
        }
        Footprint f;
        run_batch(inj, 1, &f);
        return f;
    }

    const std::vector<int>& canonical(int k, int la, int lb) {
        auto key = std::make_tuple(k, la, lb);
        auto it = canon_.find(key);
        if (it != canon_.end()) return it->second;
        const DualGraph& dg = set_.dual(k == 0 ? Kind::Z : Kind::X);
        auto path = dg.shortest_path(la, lb);
        std::sort(path.begin(), path.end());
        return canon_.emplace(key, path).first->second;
    }

private:
    void init_kind(KindNest& kn, Kind stab_kind, Kind err) {
        kn.stab_kind = stab_kind;
        kn.error_kind = err;
        kn.period = wc_.period;
        kn.local.assign(set_.stabilizers.size(), -1);
        const DualGraph& dg = set_.dual(stab_kind);
        for (int n = 0; n < dg.num_stabs(); ++n) {
            int g = dg.stab_id(n);
            kn.local[g] = static_cast<int>(kn.stab_ids.size());
            kn.stab_ids.push_back(g);
        }
        for (std::size_t ls = 0; ls < kn.stab_ids.size(); ++ls) {
            int g = kn.stab_ids[ls];
            kn.offset.push_back(static_cast<int>(kn.vstab.size()));
            kn.m.push_back(static_cast<int>(wc_.meas_steps[g].size()));
            for (int t : wc_.meas_steps[g]) {
                kn.vstab.push_back(static_cast<int>(ls));
                kn.vtime.push_back(t);
            }
        }
    }

    void run_batch(const std::vector<std::vector<Injection>>& inj, std::size_t n, Footprint* out) {
        FrameSim sim(wc_, lt_);
        std::vector<MeasRecord> recs;
        for (int s = 0; s < horizon_; ++s) {
            const std::vector<Injection>* here = s < wc_.period ? &inj[s] : nullptr;
            sim.run_step(nullptr, here, recs);
        }
        std::vector<long long> count(set_.stabilizers.size(), 0);
        std::vector<std::uint64_t> last(set_.stabilizers.size(), 0);
        for (const auto& r : recs) {
            std::uint64_t ev = r.bits ^ last[r.stab];
            last[r.stab] = r.bits;
            long long k = count[r.stab]++;
            int kind = set_.stabilizers[r.stab].kind == Kind::Z ? 0 : 1;
            while (ev) {
                int lane = std::countr_zero(ev);
                ev &= ev - 1;
                if (static_cast<std::size_t>(lane) < n) out[lane].ev[kind].push_back({r.stab, k});
            }
        }
        for (std::size_t j = 0; j < n; ++j)
            for (int k = 0; k < 2; ++k) std::sort(out[j].ev[k].begin(), out[j].ev[k].end());
        for (int q = 0; q < chip_.num_devices(); ++q) {
            if (!chip_.is_data(q) || !chip_.working(q)) continue;
            std::uint64_t xb = sim.x_of_var(q), zb = sim.z_of_var(q);
            for (std::size_t j = 0; j < n; ++j) {
                if ((xb >> j) & 1) out[j].res[0].push_back(q);
                if ((zb >> j) & 1) out[j].res[1].push_back(q);
            }
        }
    }

    long long meas_step(const EventId& e) const {
        const auto& ms = wc_.meas_steps[e.stab];
        long long mm = static_cast<long long>(ms.size());
        return (e.k / mm) * wc_.period + ms[e.k % mm];
    }

    void add_outcome(Nest& nest, const Footprint& f, double c) {
        for (int k = 0; k < 2; ++k) {
            KindNest& kn = k == 0 ? nest.for_x : nest.for_z;
            kn.injected += c;
            auto ev = f.ev[k];
            if (ev.empty()) {
                kn.discarded += c;
                continue;
            }
            if (ev.size() <= 2) {
                add_simple(kn, k, ev, f.res[k], c);
                continue;
            }
            // Temporal-then-spatial order, consecutive pairs, odd leftover to its nearer boundary.
            std::sort(ev.begin(), ev.end(), [&](const EventId& a, const EventId& b) {
                long long ta = meas_step(a), tb = meas_step(b);
                if (ta != tb) return ta < tb;
                return set_.stabilizers[a.stab].home < set_.stabilizers[b.stab].home;
            });
            kn.split_mass += c;
            for (std::size_t i = 0; i + 1 < ev.size(); i += 2) add_pair(kn, k, ev[i], ev[i + 1], nullptr, c);
            if (ev.size() % 2) add_boundary(kn, k, ev.back(), nullptr, c);
        }
    }

    void add_simple(KindNest& kn, int k, const std::vector<EventId>& ev, const std::vector<int>& res, double c) {
        if (ev.size() == 2) add_pair(kn, k, ev[0], ev[1], &res, c);
        else add_boundary(kn, k, ev[0], &res, c);
    }

    void add_pair(KindNest& kn, int k, EventId a, EventId b, const std::vector<int>* res, double c) {
        auto [va, ba] = kn.vertex_of(a);
        auto [vb, bb] = kn.vertex_of(b);
        if (std::tie(bb, vb) < std::tie(ba, va)) {
            std::swap(va, vb);
            std::swap(ba, bb);
            std::swap(a, b);
        }
        int la = kn.local[a.stab], lb = kn.local[b.stab];
        const std::vector<int>& canon = canonical(k, la, lb);
        bool cls = false;
        if (res) cls = odd_overlap(sym_diff(*res, canon), check_[k]);
        auto key = std::make_tuple(va, vb, static_cast<int>(bb - ba), -1, cls);
        NestEdge* e = find_or_add(kn, key);
        if (e->rep.empty() && e->coeff == 0.0) e->rep = cls ? *res : canon;
        e->coeff += c;
        kn.edge_mass += c;
    }

    void add_boundary(KindNest& kn, int k, EventId a, const std::vector<int>* res, double c) {
        auto [va, ba] = kn.vertex_of(a);
        (void)ba;
        int la = kn.local[a.stab];
        const DualGraph& dg = set_.dual(k == 0 ? Kind::Z : Kind::X);
        const std::vector<int>& pa = canonical(k, la, dg.side_a());
        const std::vector<int>& pb = canonical(k, la, dg.side_b());
        int side;
        std::vector<int> rep;
        if (res) {
            if (!odd_overlap(sym_diff(*res, pa), check_[k])) {
                side = 0;
                rep = pa;
            } else {
                side = 1;
                rep = *res;
            }
        } else {
            side = (pb.empty() || (!pa.empty() && pa.size() <= pb.size())) ? 0 : 1;
            rep = side == 0 ? pa : pb;
        }
        auto key = std::make_tuple(va, -1, 0, side, false);
        NestEdge* e = find_or_add(kn, key);
        if (e->coeff == 0.0) e->rep = rep;
        e->coeff += c;
        kn.edge_mass += c;
    }

    using Key = std::tuple<int, int, int, int, bool>;
    NestEdge* find_or_add(KindNest& kn, const Key& key) {
        auto& idx = index_[kn.error_kind == Kind::X ? 0 : 1];
        auto it = idx.find(key);
        if (it != idx.end()) return &kn.edges[it->second];
        NestEdge e;
        std::tie(e.u, e.v, e.dv, e.side, e.cls) = key;
        idx.emplace(key, kn.edges.size());
        kn.edges.push_back(e);
        return &kn.edges.back();
    }

    const Chip& chip_;
    const StabilizerSet& set_;
    const WholeCircuit& wc_;
    const LocationTable& lt_;
    int horizon_ = 0;
    std::vector<int> check_[2];
    std::map<std::tuple<int, int, int>, std::vector<int>> canon_;
    std::map<Key, std::size_t> index_[2];
};

}  // namespace detail

inline Nest build_nest(const Chip& chip, const StabilizerSet& set, const WholeCircuit& wc, const LocationTable& lt) {
    detail::NestBuilder b(chip, set, wc, lt);
    return b.build();
}

// All-pairs shortest paths on the nest unrolled over blocks [-span, span] around each source in block 0.
class DistanceTable {
public:
    static constexpr double inf = std::numeric_limits<double>::infinity();

    DistanceTable() = default;
    DistanceTable(const KindNest& kn, double p, int span) : kn_(&kn), span_(span) {
        V_ = kn.num_vertices();
        width_ = 2 * span + 1;
        int nodes = V_ * width_;
        // Adjacency on block-0 vertices with relative block offsets.
        adj_.assign(V_, {});
        for (std::size_t ei = 0; ei < kn.edges.size(); ++ei) {
            const NestEdge& e = kn.edges[ei];
            double w = kn.weight(e, p);
            if (e.v < 0) {
                adj_[e.u].push_back({-1, 0, w, static_cast<int>(ei)});
            } else {
                adj_[e.u].push_back({e.v, e.dv, w, static_cast<int>(ei)});
                adj_[e.v].push_back({e.u, -e.dv, w, static_cast<int>(ei)});
            }
        }
        dist_.assign(static_cast<std::size_t>(V_) * nodes, inf);
        pred_.assign(static_cast<std::size_t>(V_) * nodes, -1);
        pedge_.assign(static_cast<std::size_t>(V_) * nodes, -1);
        bdist_.assign(V_, inf);
        bnode_.assign(V_, -1);
        bedge_.assign(V_, -1);
        for (int s = 0; s < V_; ++s) run(s);
    }

    int span() const { return span_; }
    int node(int v, long long db) const { return static_cast<int>((db + span_) * V_ + v); }
    bool in_range(long long db) const { return db >= -span_ && db <= span_; }

    double between(int u, int v, long long db) const {
        if (!in_range(db)) return inf;
        return dist_[static_cast<std::size_t>(u) * V_ * width_ + node(v, db)];
    }
    double to_boundary(int u) const { return bdist_[u]; }

    // Nest edges along the shortest path from (u, block 0) to (v, block db).
    std::vector<int> path_edges(int u, int v, long long db) const {
        std::vector<int> out;
        std::size_t base = static_cast<std::size_t>(u) * V_ * width_;
        int n = node(v, db), src = node(u, 0);
        while (n != src && n >= 0) {
            out.push_back(pedge_[base + n]);
            n = pred_[base + n];
        }
        return out;
    }
    std::vector<int> boundary_edges(int u) const {
        std::vector<int> out{bedge_[u]};
        std::size_t base = static_cast<std::size_t>(u) * V_ * width_;
        int n = bnode_[u], src = node(u, 0);
        while (n != src && n >= 0) {
            out.push_back(pedge_[base + n]);
            n = pred_[base + n];
        }
        return out;
    }

private:
    struct Arc {
        int to;  // -1 boundary
        int db;
        double w;
        int edge;
    };

    void run(int s) {
        std::size_t base = static_cast<std::size_t>(s) * V_ * width_;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
        int src = node(s, 0);
        dist_[base + src] = 0.0;
        pq.push({0.0, src});
        while (!pq.empty()) {
            auto [d, n] = pq.top();
            pq.pop();
            if (d > dist_[base + n]) continue;
            int v = n % V_;
            int b = n / V_ - span_;
            for (const Arc& a : adj_[v]) {
                double nd = d + a.w;
                if (a.to < 0) {
                    if (nd < bdist_[s]) {
                        bdist_[s] = nd;
                        bnode_[s] = n;
                        bedge_[s] = a.edge;
                    }
                    continue;
                }
                int nb = b + a.db;
                if (!in_range(nb)) continue;
                int m = node(a.to, nb);
                if (nd < dist_[base + m]) {
                    dist_[base + m] = nd;
                    pred_[base + m] = n;
                    pedge_[base + m] = a.edge;
                    pq.push({nd, m});
                }
            }
        }
    }

    const KindNest* kn_ = nullptr;
    int span_ = 0;
    int V_ = 0;
    int width_ = 0;
    std::vector<std::vector<Arc>> adj_;
    std::vector<double> dist_;
    std::vector<int> pred_, pedge_;
    std::vector<double> bdist_;
    std::vector<int> bnode_, bedge_;
};

// Single-source Dijkstra over an explicit weighted graph; the reference used by tests and tools.
inline std::vector<double> dijkstra(int n, const std::vector<std::tuple<int, int, double>>& edges, int src) {
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (auto [a, b, w] : edges) {
        adj[a].push_back({b, w});
        adj[b].push_back({a, w});
    }
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[src] = 0;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (auto [v, w] : adj[u])
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pq.push({dist[v], v});
            }
    }
    return dist;
}

}  // namespace defectsc
