#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "defectsc/lattice.hpp"
#include "defectsc/stabilizers.hpp"

namespace defectsc {

enum class GateKind : std::uint8_t { init, cnot, swap, h, meas, id };

inline const char* gate_name(GateKind k) {
    switch (k) {
        case GateKind::init: return "INIT_Z";
        case GateKind::cnot: return "CNOT";
        case GateKind::swap: return "SWAP";
        case GateKind::h: return "H";
        case GateKind::meas: return "MEAS_Z";
        case GateKind::id: return "ID";
    }
    return "?";
}

inline bool two_qubit(GateKind k) { return k == GateKind::cnot || k == GateKind::swap; }

// For CNOT, `a` is the control and `b` the target.
struct Gate {
    GateKind kind = GateKind::id;
    int a = -1;
    int b = -1;
    int step = 0;
    int owner = -1;
    friend bool operator==(const Gate&, const Gate&) = default;
};

struct StabilizerCircuit {
    int stab = -1;
    Kind kind = Kind::Z;
    int home = -1;          // device of the INIT
    int meas_device = -1;   // device of the MEAS
    std::vector<int> route; // devices visited by the syndrome variable
    std::vector<Gate> gates;  // steps relative to INIT
    int depth = 0;            // K
    int dq = 0;               // data qubits gathered
    int q = 0;                // distinct devices touched
    // Per relative step: devices carrying circuit state into that step, and the subset holding live variables.
    std::vector<std::vector<int>> held_before;
    std::vector<std::vector<int>> live_before;
    std::vector<std::vector<int>> layers;  // gate indices per relative step
};

namespace detail {

// BFS over working devices; ties resolved toward larger labels so routes are reproducible.
inline std::vector<int> device_distances(const Chip& chip, int src) {
    std::vector<int> dist(chip.num_devices(), -1);
    std::vector<int> queue{src};
    dist[src] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        int u = queue[h];
        for (int v : chip.neighbors(u)) {
            if (v < 0 || !chip.working(v) || dist[v] >= 0) continue;
            dist[v] = dist[u] + 1;
            queue.push_back(v);
        }
    }
    return dist;
}

inline std::vector<int> greatest_route(const Chip& chip, int from, int to, const std::vector<int>& dist_to) {
    std::vector<int> out{from};
    int cur = from;
    while (cur != to) {
        int best = -1;
        for (int v : chip.neighbors(cur))
            if (v >= 0 && chip.working(v) && dist_to[v] == dist_to[cur] - 1) best = std::max(best, v);
        cur = best;
        out.push_back(cur);
    }
    return out;
}

struct Tour {
    int cost = std::numeric_limits<int>::max();
    std::vector<int> route;
};

inline bool better_tour(const Tour& a, const Tour& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.route > b.route;
}

}  // namespace detail

// Minimum ancilla cover, cheapest one-way traversal, then gather / hop / restore as in the composition algorithm.
inline StabilizerCircuit compose_stabilizer_circuit(const Stabilizer& stab, const Chip& chip) {
    const auto& dat = stab.data;
    const auto& anc = stab.ancillas;
    auto is_dat = [&](int d) { return std::binary_search(dat.begin(), dat.end(), d); };
    auto is_anc = [&](int d) { return std::binary_search(anc.begin(), anc.end(), d); };

    std::vector<std::uint32_t> cover_mask(anc.size(), 0);
    if (dat.size() > 32) throw ChipError(ChipError::Code::uncoverable, "stabilizer " + stab.name() + " too large");
    for (std::size_t i = 0; i < anc.size(); ++i)
        for (int n : chip.neighbors(anc[i]))
            if (n >= 0) {
                auto it = std::lower_bound(dat.begin(), dat.end(), n);
                if (it != dat.end() && *it == n) cover_mask[i] |= 1u << (it - dat.begin());
            }
    const std::uint32_t full = dat.size() == 32 ? ~0u : ((1u << dat.size()) - 1);

    std::map<int, std::vector<int>> dist_cache;
    auto dist_from = [&](int a) -> const std::vector<int>& {
        auto it = dist_cache.find(a);
        if (it == dist_cache.end()) it = dist_cache.emplace(a, detail::device_distances(chip, a)).first;
        return it->second;
    };

    auto tour_of = [&](const std::vector<int>& order) {
        detail::Tour t;
        t.cost = 0;
        t.route = {order[0]};
        for (std::size_t i = 1; i < order.size(); ++i) {
            const auto& dto = dist_from(order[i]);
            int dd = dto[order[i - 1]];
            if (dd < 0) {
                t.cost = std::numeric_limits<int>::max();
                return t;
            }
            t.cost += dd;
            auto leg = detail::greatest_route(chip, order[i - 1], order[i], dto);
            t.route.insert(t.route.end(), leg.begin() + 1, leg.end());
        }
        return t;
    };

    auto solve_tsp = [&](std::vector<int> pts) {
        detail::Tour best;
        if (pts.size() <= 4) {
            std::sort(pts.begin(), pts.end());
            do {
                detail::Tour t = tour_of(pts);
                if (t.cost != std::numeric_limits<int>::max() && detail::better_tour(t, best)) best = t;
            } while (std::next_permutation(pts.begin(), pts.end()));
            return best;
        }
        for (std::size_t s = 0; s < pts.size(); ++s) {
            std::vector<int> order{pts[s]};
            std::vector<char> used(pts.size(), 0);
            used[s] = 1;
            for (std::size_t k = 1; k < pts.size(); ++k) {
                int pick = -1, pd = std::numeric_limits<int>::max();
                const auto& dfrom = dist_from(order.back());
                for (std::size_t j = 0; j < pts.size(); ++j) {
                    if (used[j] || dfrom[pts[j]] < 0) continue;
                    if (dfrom[pts[j]] < pd || (dfrom[pts[j]] == pd && pts[j] > pts[pick])) {
                        pd = dfrom[pts[j]];
                        pick = static_cast<int>(j);
                    }
                }
                if (pick < 0) break;
                used[pick] = 1;
                order.push_back(pts[pick]);
            }
            if (order.size() != pts.size()) continue;
            detail::Tour t = tour_of(order);
            if (t.cost != std::numeric_limits<int>::max() && detail::better_tour(t, best)) best = t;
        }
        return best;
    };

    detail::Tour best;
    const std::size_t combo_cap = 200000;
    for (std::size_t n = 1; n <= anc.size() && best.route.empty(); ++n) {
        std::vector<int> pick(n);
        std::iota(pick.begin(), pick.end(), 0);
        std::size_t visited = 0;
        while (true) {
            std::uint32_t m = 0;
            for (int i : pick) m |= cover_mask[i];
            if (m == full) {
                std::vector<int> pts;
                for (int i : pick) pts.push_back(anc[i]);
                detail::Tour t = solve_tsp(pts);
                if (!t.route.empty() && detail::better_tour(t, best)) best = t;
            }
            if (++visited > combo_cap) break;
            int i = static_cast<int>(n) - 1;
            while (i >= 0 && pick[i] == static_cast<int>(anc.size() - n) + i) --i;
            if (i < 0) break;
            ++pick[i];
            for (std::size_t j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
        }
    }
    if (best.route.empty())
        throw ChipError(ChipError::Code::uncoverable, "no ancilla traversal covers stabilizer " + stab.name());

    StabilizerCircuit c;
    c.stab = stab.id;
    c.kind = stab.kind;
    c.route = best.route;
    c.home = best.route.front();
    c.meas_device = best.route.back();
    std::vector<Gate> seq;
    auto add = [&](GateKind k, int a, int b = -1) { seq.push_back({k, a, b, 0, stab.id}); };
    add(GateKind::init, c.home);
    if (stab.kind == Kind::X) add(GateKind::h, c.home);
    std::vector<char> gathered(dat.size(), 0);
    const auto& r = best.route;
    for (std::size_t i = 0; i < r.size(); ++i) {
        int qd = r[i];
        if (is_anc(qd)) {
            for (int n : chip.neighbors(qd)) {
                if (n < 0 || !is_dat(n)) continue;
                auto pos = std::lower_bound(dat.begin(), dat.end(), n) - dat.begin();
                if (gathered[pos]) continue;
                gathered[pos] = 1;
                if (stab.kind == Kind::Z) add(GateKind::cnot, n, qd);
                else add(GateKind::cnot, qd, n);
            }
        }
        if (i + 1 < r.size()) add(GateKind::swap, qd, r[i + 1]);
        if (i > 0 && chip.is_data(qd)) add(GateKind::swap, r[i - 1], qd);
    }
    if (stab.kind == Kind::X) add(GateKind::h, c.meas_device);
    add(GateKind::meas, c.meas_device);

    // As-soon-as-possible layering by device availability.
    std::map<int, int> last;
    std::set<int> touched;
    for (auto& g : seq) {
        int s = 0;
        for (int d : {g.a, g.b})
            if (d >= 0) {
                auto it = last.find(d);
                if (it != last.end()) s = std::max(s, it->second + 1);
                touched.insert(d);
            }
        g.step = s;
        for (int d : {g.a, g.b})
            if (d >= 0) last[d] = s;
    }
    c.gates = seq;
    c.depth = 0;
    for (const auto& g : seq) c.depth = std::max(c.depth, g.step + 1);
    c.dq = static_cast<int>(dat.size());
    c.q = static_cast<int>(touched.size());
    c.layers.assign(c.depth, {});
    for (std::size_t i = 0; i < seq.size(); ++i) c.layers[seq[i].step].push_back(static_cast<int>(i));

    // Replay the variable moves to find which devices carry this circuit's state between steps.
    std::map<int, int> var_at;  // device -> variable (device label of origin)
    auto var_of = [&](int d) {
        auto it = var_at.find(d);
        return it == var_at.end() ? d : it->second;
    };
    int syn_var = c.home;
    bool live = false;
    c.held_before.assign(c.depth, {});
    c.live_before.assign(c.depth, {});
    for (int t = 0; t < c.depth; ++t) {
        if (t > 0) {
            for (int d : touched) {
                int v = var_of(d);
                bool holds_syn = live && v == syn_var;
                bool displaced_data = chip.is_data(v) && v != d;
                bool vacated = chip.is_data(d) && v != d;
                if (holds_syn || displaced_data || vacated) c.held_before[t].push_back(d);
                if (holds_syn || displaced_data) c.live_before[t].push_back(d);
            }
        }
        for (int gi : c.layers[t]) {
            const Gate& g = seq[gi];
            if (g.kind == GateKind::init) live = true;
            if (g.kind == GateKind::meas) live = false;
            if (g.kind == GateKind::swap) {
                int va = var_of(g.a), vb = var_of(g.b);
                var_at[g.a] = vb;
                var_at[g.b] = va;
            }
        }
    }
    return c;
}

struct MeasEvent {
    int step = 0;  // within the block
    int stab = -1;
};

// One period of the steady-state schedule, replayed cyclically.
struct WholeCircuit {
    int num_devices = 0;
    int period = 0;  // block length in steps
    int offset = 0;  // first step of the block in the generated schedule
    std::vector<std::vector<Gate>> steps;  // gates per block step, sorted by device
    std::vector<int> start_var;            // variable label on each device at block start (-1 junk)
    std::vector<MeasEvent> measurements;   // in step order
    std::vector<std::vector<int>> meas_steps;  // per stabilizer id
    std::vector<int> round_ends;           // block steps closing an error-correction round
    int deepest = -1;
    std::vector<int> depth;                // K per stabilizer id
    std::vector<int> q;                    // Q per stabilizer id
    std::vector<int> dq;                   // DQ per stabilizer id
    std::vector<Kind> kind;                // per stabilizer id
    std::vector<int> first_start;          // first scheduled INIT per stabilizer (priority check)

    int rounds_per_block() const { return static_cast<int>(round_ends.size()); }
    double steps_per_round() const { return static_cast<double>(period) / rounds_per_block(); }
    // Cycle C: block length over measurements per block.
    double cycle(int stab) const { return static_cast<double>(period) / meas_steps[stab].size(); }
};

class ScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class Scheduler {
public:
    Scheduler(const Chip& chip, const std::vector<StabilizerCircuit>& circuits, const std::vector<Stabilizer>& stabs)
        : chip_(chip), circuits_(circuits), n_(chip.num_devices()) {
        by_stab_.assign(stabs.size(), -1);
        for (std::size_t i = 0; i < circuits.size(); ++i) by_stab_[circuits[i].stab] = static_cast<int>(i);
        // Opposite-kind stabilizers sharing data qubits.
        partners_.assign(stabs.size(), {});
        for (const auto& a : stabs)
            for (const auto& b : stabs) {
                if (a.kind == b.kind) continue;
                std::vector<int> common;
                std::set_intersection(a.data.begin(), a.data.end(), b.data.begin(), b.data.end(), std::back_inserter(common));
                if (!common.empty()) partners_[a.id].push_back(b.id);
            }
        instances_of_.assign(stabs.size(), {});
        prev_end_.assign(stabs.size(), -1);
    }

    struct Instance {
        int stab;
        int start;
        int end;
        std::vector<std::pair<int, int>> access;  // (data device, step) of gathering CNOTs
    };

    // Places the next instance of circuit `ci` no earlier than `floor`; returns its MEAS step.
    // With limit >= 0 the instance is kept only if it finishes by `limit`, otherwise -1.
    int schedule(int ci, int floor = 0, int limit = -1) {
        const StabilizerCircuit& c = circuits_[ci];
        int start = std::max(floor, prev_end_[c.stab] + 1);
        for (int guard = 0;; ++guard) {
            if (guard > 100000) throw ScheduleError("scheduler failed to place " + std::to_string(c.stab));
            int restart = -1;
            int r = try_place(c, start, restart, limit);
            if (r == 1) break;
            if (r == 2) return -1;
            start = std::max(start + 1, restart);
        }
        prev_end_[c.stab] = instances_.back().end;
        return instances_.back().end;
    }

    int last_start(int stab) const {
        return instances_of_[stab].empty() ? -1 : instances_[instances_of_[stab].back()].start;
    }

    int horizon() const { return static_cast<int>(occ_.size() / n_); }
    const std::vector<Instance>& instances() const { return instances_; }
    const std::vector<std::vector<Gate>>& gates() const { return gates_; }

private:
    int& occ(int t, int d) {
        ensure(t);
        return occ_[static_cast<std::size_t>(t) * n_ + d];
    }
    void ensure(int t) {
        if (static_cast<std::size_t>(t + 1) * n_ > occ_.size()) {
            occ_.resize(static_cast<std::size_t>(t + 64) * n_, -1);
            gates_.resize(t + 64);
        }
    }

    // 1 placed, 0 retry from `restart`, 2 would finish after `limit`.
    int try_place(const StabilizerCircuit& c, int start, int& restart, int limit) {
        struct Tent {
            int t, d;
        };
        std::vector<Tent> reserve;
        std::vector<Gate> placed;
        int t = start;
        int prev = start - 1;
        auto blocked_by = [&](int step, int d) { return occ(step, d); };
        for (int i = 0; i < c.depth; ++i) {
            t = (i == 0) ? start : prev + 1;
            while (true) {
                int blocker = -1;
                for (int d : c.held_before[i])
                    if (blocked_by(t, d) >= 0) blocker = blocked_by(t, d);
                if (blocker >= 0) {
                    restart = instances_[blocker].end + 1;
                    return 0;
                }
                bool wait = false;
                for (int gi : c.layers[i]) {
                    const Gate& g = c.gates[gi];
                    for (int d : {g.a, g.b}) {
                        if (d < 0) continue;
                        int b = blocked_by(t, d);
                        if (b < 0) continue;
                        if (i > 0 && chip_.is_data(d) && !is_held(c, i, d)) {
                            wait = true;
                        } else {
                            restart = instances_[b].end + 1;
                            return 0;
                        }
                    }
                }
                if (!wait) break;
                for (int d : c.held_before[i]) reserve.push_back({t, d});
                for (int d : c.live_before[i]) placed.push_back({GateKind::id, d, -1, t, c.stab});
                ++t;
                if (limit >= 0 && t > limit) return 2;
            }
            for (int d : c.held_before[i]) reserve.push_back({t, d});
            for (int gi : c.layers[i]) {
                Gate g = c.gates[gi];
                g.step = t;
                placed.push_back(g);
                reserve.push_back({t, g.a});
                if (g.b >= 0) reserve.push_back({t, g.b});
            }
            prev = t;
            if (limit >= 0 && prev > limit) return 2;
        }
        Instance inst{c.stab, start, prev, {}};
        for (const auto& g : placed)
            if (g.kind == GateKind::cnot) inst.access.push_back({chip_.is_data(g.a) ? g.a : g.b, g.step});
        if (!order_consistent(inst)) {
            restart = start + 1;
            return 0;
        }
        int id = static_cast<int>(instances_.size());
        instances_.push_back(inst);
        instances_of_[c.stab].push_back(id);
        for (const auto& r : reserve) occ(r.t, r.d) = id;
        for (const auto& g : placed) {
            ensure(g.step);
            gates_[g.step].push_back(g);
        }
        return 1;
    }

    static bool is_held(const StabilizerCircuit& c, int i, int d) {
        return std::find(c.held_before[i].begin(), c.held_before[i].end(), d) != c.held_before[i].end();
    }

    // Opposite-kind stabilizers live at the same time must visit shared qubits in one consistent order.
    bool order_consistent(const Instance& inst) const {
        for (int p : partners_[inst.stab]) {
            for (int jid : instances_of_[p]) {
                const Instance& j = instances_[jid];
                if (j.end < inst.start || j.start > inst.end) continue;
                int sign = 0;
                for (const auto& [dq, ts] : inst.access)
                    for (const auto& [dj, tj] : j.access) {
                        if (dq != dj) continue;
                        int s = ts > tj ? 1 : -1;
                        if (sign != 0 && s != sign) return false;
                        sign = s;
                    }
            }
        }
        return true;
    }

    const Chip& chip_;
    const std::vector<StabilizerCircuit>& circuits_;
    int n_;
    std::vector<int> by_stab_;
    std::vector<std::vector<int>> partners_;
    std::vector<std::vector<int>> instances_of_;
    std::vector<int> prev_end_;
    std::vector<Instance> instances_;
    std::vector<int> occ_;
    std::vector<std::vector<Gate>> gates_;
};

inline bool same_row(std::vector<Gate> a, std::vector<Gate> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i].step = 0;
        b[i].step = 0;
        if (!(a[i] == b[i])) return false;
    }
    return true;
}

}  // namespace detail

inline std::vector<int> priority_order(const std::vector<StabilizerCircuit>& circuits, const std::vector<Stabilizer>& stabs) {
    std::vector<int> order(circuits.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (circuits[a].depth != circuits[b].depth) return circuits[a].depth > circuits[b].depth;
        return stabs[circuits[a].stab].home < stabs[circuits[b].stab].home;
    });
    return order;
}

// Deepest-first scheduling with slot conflicts; returns the steady-state block of the generated schedule.
struct ScheduleOptions {
    bool window_floor = true;
    bool fit_repeats = true;
    bool backpressure = true;
};

inline WholeCircuit schedule_whole_circuit(const Chip& chip, const std::vector<StabilizerCircuit>& circuits,
                                           const std::vector<Stabilizer>& stabs, int max_step = 0,
                                           ScheduleOptions opt = {}) {
    if (circuits.empty()) throw std::invalid_argument("no circuits to schedule");
    int max_depth = 0;
    for (const auto& c : circuits) max_depth = std::max(max_depth, c.depth);
    if (max_step <= 0) max_step = std::max(1500, 60 * max_depth);

    for (int attempt = 0; attempt < 4; ++attempt, max_step *= 2) {
        auto order = priority_order(circuits, stabs);
        detail::Scheduler sch(chip, circuits, stabs);
        int deepest = order.front();
        std::vector<int> ceil(circuits.size(), -1);
        int whole_ceil = 0, lag_end = -1;
        while (whole_ceil <= max_step) {
            int floor = opt.window_floor && ceil[deepest] >= 0 ? ceil[deepest] + 1 : 0;
            // The deepest stabilizer may not finish before the slowest one of the previous window.
            int hold = opt.backpressure ? lag_end - circuits[deepest].depth + 1 : 0;
            whole_ceil = ceil[deepest] = sch.schedule(deepest, std::max(0, hold));
            for (std::size_t k = 1; k < order.size(); ++k) {
                ceil[order[k]] = sch.schedule(order[k], floor);
                lag_end = std::max(lag_end, ceil[order[k]]);
            }
            // Repeats are kept only when they finish under the ceiling.
            bool again = true;
            while (again) {
                again = false;
                for (std::size_t k = 1; k < order.size(); ++k) {
                    if (ceil[order[k]] > whole_ceil) continue;
                    int e = sch.schedule(order[k], floor, opt.fit_repeats ? whole_ceil : -1);
                    if (e >= 0) {
                        ceil[order[k]] = e;
                        again = true;
                    } else {
                        ceil[order[k]] = whole_ceil + 1;
                    }
                }
            }
        }
        const auto& rows = sch.gates();
        int usable = std::min<int>(max_step, static_cast<int>(rows.size()));
        std::vector<std::vector<Gate>> sorted(usable);
        for (int t = 0; t < usable; ++t) {
            sorted[t] = rows[t];
            std::sort(sorted[t].begin(), sorted[t].end(), [](const Gate& x, const Gate& y) { return x.a < y.a; });
        }
        // Smallest period P with a repeating tail at least three periods long.
        int found_p = -1, found_t0 = -1;
        for (int p = 1; p * 4 < usable && found_p < 0; ++p) {
            int t = usable - p - 1;
            while (t >= 0 && detail::same_row(sorted[t], sorted[t + p])) --t;
            int t0 = t + 1;
            if (usable - t0 >= 3 * p + max_depth && t0 <= usable / 2) {
                found_p = p;
                found_t0 = t0;
            }
        }
        if (found_p < 0) continue;

        WholeCircuit wc;
        wc.num_devices = chip.num_devices();
        wc.period = found_p;
        // Start the block after warm-up so every stabilizer has run before it.
        int t0 = found_t0 + found_p * ((max_depth * 2) / found_p + 1);
        wc.offset = t0;
        wc.steps.assign(found_p, {});
        for (int t = 0; t < found_p; ++t) {
            wc.steps[t] = sorted[t0 + t];
            for (auto& g : wc.steps[t]) g.step = t;
        }
        std::vector<int> var(chip.num_devices());
        std::iota(var.begin(), var.end(), 0);
        for (int t = 0; t < t0; ++t)
            for (const auto& g : sorted[t])
                if (g.kind == GateKind::swap) std::swap(var[g.a], var[g.b]);
        wc.start_var.resize(var.size());
        for (std::size_t d = 0; d < var.size(); ++d) wc.start_var[d] = chip.is_data(var[d]) ? var[d] : -1;

        std::size_t ns = stabs.size();
        wc.meas_steps.assign(ns, {});
        for (int t = 0; t < found_p; ++t)
            for (const auto& g : wc.steps[t])
                if (g.kind == GateKind::meas) {
                    wc.measurements.push_back({t, g.owner});
                    wc.meas_steps[g.owner].push_back(t);
                }
        wc.depth.assign(ns, 0);
        wc.q.assign(ns, 0);
        wc.dq.assign(ns, 0);
        wc.kind.assign(ns, Kind::Z);
        wc.first_start.assign(ns, -1);
        for (const auto& c : circuits) {
            wc.depth[c.stab] = c.depth;
            wc.q[c.stab] = c.q;
            wc.dq[c.stab] = c.dq;
            wc.kind[c.stab] = c.kind;
        }
        for (const auto& inst : sch.instances())
            if (wc.first_start[inst.stab] < 0) wc.first_start[inst.stab] = inst.start;
        for (std::size_t s = 0; s < ns; ++s)
            if (wc.meas_steps[s].empty()) throw ScheduleError("stabilizer never measured in steady state");
        wc.deepest = circuits[deepest].stab;

        // Round ends: measurements of the deepest stabilizer after which every stabilizer has been seen.
        std::vector<int> ends = wc.meas_steps[wc.deepest];
        auto covered = [&](int from, int to) {  // steps (from, to] cyclic
            std::vector<char> seen(ns, 0);
            int len = to - from;
            if (len <= 0) len += found_p;
            for (int k = 1; k <= len; ++k) {
                int t = (from + k) % found_p;
                for (const auto& g : wc.steps[t])
                    if (g.kind == GateKind::meas) seen[g.owner] = 1;
            }
            return std::all_of(seen.begin(), seen.end(), [](char x) { return x != 0; });
        };
        bool changed = true;
        while (changed && ends.size() > 1) {
            changed = false;
            for (std::size_t i = 0; i < ends.size(); ++i) {
                int from = ends[(i + ends.size() - 1) % ends.size()];
                if (!covered(from, ends[i])) {
                    ends.erase(ends.begin() + static_cast<long>(i));
                    changed = true;
                    break;
                }
            }
        }
        wc.round_ends = ends;
        return wc;
    }
    throw ScheduleError("schedule did not reach a periodic steady state");
}

inline std::vector<StabilizerCircuit> compile_circuits(const Chip& chip, const StabilizerSet& set) {
    std::vector<StabilizerCircuit> out;
    for (const auto& s : set.stabilizers) out.push_back(compose_stabilizer_circuit(s, chip));
    return out;
}

}  // namespace defectsc
