#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "defectsc/circuits.hpp"

namespace defectsc {

// Pauli as (x bit, z bit): I=0, X=1, Z=2, Y=3.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

inline bool has_x(Pauli p) { return (static_cast<int>(p) & 1) != 0; }
inline bool has_z(Pauli p) { return (static_cast<int>(p) & 2) != 0; }
inline char pauli_char(Pauli p) { return "IXZY"[static_cast<int>(p)]; }

// Non-identity 1q outcomes in order X, Y, Z.
inline Pauli pauli_1q(int k) {
    constexpr Pauli t[3] = {Pauli::X, Pauli::Y, Pauli::Z};
    return t[k];
}

// k in 1..15 maps to (k / 4, k % 4) in IXZY labels.
inline std::pair<Pauli, Pauli> pauli_2q(int k) { return {static_cast<Pauli>(k >> 2), static_cast<Pauli>(k & 3)}; }

template <class Rng>
double uniform01(Rng& rng) {
    return unit_uniform(rng());
}

template <class Rng>
Pauli sample_channel_1q(double p, Rng& rng) {
    double u = uniform01(rng);
    if (!(u < p)) return Pauli::I;
    int k = std::min(2, static_cast<int>(3.0 * u / p));
    return pauli_1q(k);
}

template <class Rng>
std::pair<Pauli, Pauli> sample_channel_2q(double p, Rng& rng) {
    double u = uniform01(rng);
    if (!(u < p)) return {Pauli::I, Pauli::I};
    int k = 1 + std::min(14, static_cast<int>(15.0 * u / p));
    return pauli_2q(k);
}

enum class LocKind : std::uint8_t { one, two, init, meas };

// A noisy location in one block step.
struct Location {
    LocKind kind = LocKind::one;
    int a = -1;
    int b = -1;
    int gate = -1;  // index into the step's gate list, -1 for idle
};

// Flattened noisy locations for one block of a WholeCircuit.
struct LocationTable {
    std::vector<int> base;  // first location of each block step; size period+1
    std::vector<Location> locs;
    int size() const { return static_cast<int>(locs.size()); }
};

inline LocationTable build_locations(const WholeCircuit& wc, const Chip& chip, bool idle_noise) {
    LocationTable lt;
    for (int t = 0; t < wc.period; ++t) {
        lt.base.push_back(lt.size());
        std::vector<char> busy(wc.num_devices, 0);
        const auto& gs = wc.steps[t];
        for (std::size_t i = 0; i < gs.size(); ++i) {
            const Gate& g = gs[i];
            Location l;
            l.a = g.a;
            l.b = g.b;
            l.gate = static_cast<int>(i);
            busy[g.a] = 1;
            if (g.b >= 0) busy[g.b] = 1;
            switch (g.kind) {
                case GateKind::init: l.kind = LocKind::init; break;
                case GateKind::meas: l.kind = LocKind::meas; break;
                case GateKind::cnot:
                case GateKind::swap: l.kind = LocKind::two; break;
                default: l.kind = LocKind::one; break;
            }
            lt.locs.push_back(l);
        }
        if (idle_noise)
            for (int d = 0; d < wc.num_devices; ++d)
                if (!busy[d] && chip.working(d)) lt.locs.push_back({LocKind::one, d, -1, -1});
    }
    lt.base.push_back(lt.size());
    return lt;
}

// 64 independent shots per bit lane.
struct MeasRecord {
    int stab;
    long long step;  // global step of the MEAS
    std::uint64_t bits;
};

// Geometric skipping over (location, lane) pairs; every location fails with total probability p.
class NoiseSource {
public:
    NoiseSource(double p, std::uint64_t seed) : p_(p), rng_(seed) {
        if (p_ > 0.0 && p_ < 1.0) log1mp_ = std::log1p(-p_);
        skip_ = draw();
    }
    double p() const { return p_; }

    // Calls f(lane) for every failing lane at the next location.
    template <class F>
    void location(F&& f) {
        if (p_ <= 0.0) return;
        while (skip_ < 64) {
            f(static_cast<int>(skip_));
            skip_ += 1 + draw();
        }
        skip_ -= 64;
    }

    std::mt19937_64& rng() { return rng_; }

    // Outcome given that the location failed.
    int one_qubit() { return std::min(2, static_cast<int>(3.0 * uniform01(rng_))); }
    int two_qubit() { return 1 + std::min(14, static_cast<int>(15.0 * uniform01(rng_))); }

private:
    std::int64_t draw() {
        if (p_ >= 1.0) return 0;
        if (p_ <= 0.0) return std::numeric_limits<std::int64_t>::max() / 2;
        double u = uniform01(rng_);
        if (u <= 0.0) u = 0x1.0p-53;
        double g = std::floor(std::log(u) / log1mp_);
        return g > 1e15 ? static_cast<std::int64_t>(1e15) : static_cast<std::int64_t>(g);
    }

    double p_;
    double log1mp_ = 0.0;
    std::mt19937_64 rng_;
    std::int64_t skip_ = 0;
};

// Deterministic Pauli injected after the ideal action of a location.
struct Injection {
    long long step;   // global step
    int loc;          // location index within that block step
    Pauli pa = Pauli::I;
    Pauli pb = Pauli::I;  // second operand for two-qubit locations
    bool flip = false;    // INIT/MEAS bit flip
    std::uint64_t lanes = 1;
};

struct InjectedError {
    long long step;
    int loc;
    int lane;
    Pauli pa;
    Pauli pb;
};

// Pauli-frame replay of a WholeCircuit; frames live on devices and move with SWAPs.
class FrameSim {
public:
    FrameSim(const WholeCircuit& wc, const LocationTable& lt) : wc_(wc), lt_(lt) { reset(); }

    void reset() {
        x_.assign(wc_.num_devices, 0);
        z_.assign(wc_.num_devices, 0);
        dev_var_ = wc_.start_var;
        var_dev_.assign(wc_.num_devices, -1);
        for (int d = 0; d < wc_.num_devices; ++d)
            if (dev_var_[d] >= 0) var_dev_[dev_var_[d]] = d;
        step_ = 0;
    }

    long long step() const { return step_; }
    int block_step() const { return static_cast<int>(step_ % wc_.period); }

    // Device currently holding data variable v (its home label).
    int where(int v) const { return var_dev_[v]; }
    std::uint64_t x_of_var(int v) const { return x_[var_dev_[v]]; }
    std::uint64_t z_of_var(int v) const { return z_[var_dev_[v]]; }
    std::uint64_t& x_dev(int d) { return x_[d]; }
    std::uint64_t& z_dev(int d) { return z_[d]; }
    const std::vector<int>& dev_var() const { return dev_var_; }

    void set_record(std::vector<InjectedError>* rec) { record_ = rec; }

    // One step. `noise` may be null; `inj` are injections for this step (any order).
    void run_step(NoiseSource* noise, const std::vector<Injection>* inj, std::vector<MeasRecord>& out) {
        int t = block_step();
        const auto& gs = wc_.steps[t];
        int lo = lt_.base[t], hi = lt_.base[t + 1];
        for (int li = lo; li < hi; ++li) {
            const Location& l = lt_.locs[li];
            int rel = li - lo;
            if (l.gate >= 0) {
                const Gate& g = gs[l.gate];
                switch (g.kind) {
                    case GateKind::init:
                        x_[g.a] = z_[g.a] = 0;
                        break;
                    case GateKind::cnot:
                        x_[g.b] ^= x_[g.a];
                        z_[g.a] ^= z_[g.b];
                        break;
                    case GateKind::swap:
                        std::swap(x_[g.a], x_[g.b]);
                        std::swap(z_[g.a], z_[g.b]);
                        std::swap(dev_var_[g.a], dev_var_[g.b]);
                        if (dev_var_[g.a] >= 0) var_dev_[dev_var_[g.a]] = g.a;
                        if (dev_var_[g.b] >= 0) var_dev_[dev_var_[g.b]] = g.b;
                        break;
                    case GateKind::h:
                        std::swap(x_[g.a], z_[g.a]);
                        break;
                    default:
                        break;
                }
            }
            if (noise) {
                noise->location([&](int lane) {
                    std::uint64_t m = std::uint64_t{1} << lane;
                    switch (l.kind) {
                        case LocKind::init:
                        case LocKind::meas:
                            x_[l.a] ^= m;
                            log(t, rel, lane, Pauli::X, Pauli::I);
                            break;
                        case LocKind::one: {
                            Pauli p = pauli_1q(noise->one_qubit());
                            apply(l.a, p, m);
                            log(t, rel, lane, p, Pauli::I);
                            break;
                        }
                        case LocKind::two: {
                            auto [pa, pb] = pauli_2q(noise->two_qubit());
                            apply(l.a, pa, m);
                            apply(l.b, pb, m);
                            log(t, rel, lane, pa, pb);
                            break;
                        }
                    }
                });
            }
            if (inj)
                for (const auto& e : *inj) {
                    if (e.loc != rel) continue;
                    if (l.kind == LocKind::init || l.kind == LocKind::meas) {
                        if (e.flip) x_[l.a] ^= e.lanes;
                    } else {
                        apply(l.a, e.pa, e.lanes);
                        if (l.b >= 0) apply(l.b, e.pb, e.lanes);
                    }
                }
            if (l.gate >= 0 && gs[l.gate].kind == GateKind::meas) {
                out.push_back({gs[l.gate].owner, step_, x_[l.a]});
                x_[l.a] = z_[l.a] = 0;
            }
        }
        ++step_;
    }

    // Applies a Pauli directly to a data variable between steps.
    void inject_data(int var, Pauli p, std::uint64_t lanes = 1) { apply(var_dev_[var], p, lanes); }

private:
    void apply(int d, Pauli p, std::uint64_t m) {
        if (has_x(p)) x_[d] ^= m;
        if (has_z(p)) z_[d] ^= m;
    }
    void log(int t, int rel, int lane, Pauli a, Pauli b) {
        if (record_) record_->push_back({step_, rel, lane, a, b});
        (void)t;
    }

    const WholeCircuit& wc_;
    const LocationTable& lt_;
    std::vector<std::uint64_t> x_, z_;
    std::vector<int> dev_var_, var_dev_;
    long long step_ = 0;
    std::vector<InjectedError>* record_ = nullptr;
};

// Noisy run returning measurement records for `steps` steps over 64 lanes.
inline std::vector<MeasRecord> simulate_steps(const WholeCircuit& wc, const LocationTable& lt, double p, long long steps,
                                              std::uint64_t seed, std::vector<InjectedError>* record = nullptr) {
    FrameSim sim(wc, lt);
    sim.set_record(record);
    NoiseSource noise(p, seed);
    std::vector<MeasRecord> out;
    for (long long s = 0; s < steps; ++s) sim.run_step(&noise, nullptr, out);
    return out;
}

}  // namespace defectsc
