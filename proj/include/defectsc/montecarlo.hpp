#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <thread>
#include <vector>

#include "defectsc/decoder.hpp"

namespace defectsc {

// Everything the simulator needs for one chip; immutable once built.
struct CompiledChip {
    Chip chip;
    StabilizerSet set;
    std::vector<StabilizerCircuit> circuits;
    WholeCircuit whole;
    LocationTable locations;
    Nest nest;
    bool idle_noise = true;
};

inline std::shared_ptr<CompiledChip> compile_chip(const Chip& chip, bool idle_noise = true) {
    auto cc = std::make_shared<CompiledChip>();
    cc->chip = chip;
    cc->idle_noise = idle_noise;
    cc->set = build_stabilizer_set(chip);
    cc->circuits = compile_circuits(chip, cc->set);
    cc->whole = schedule_whole_circuit(chip, cc->circuits, cc->set.stabilizers);
    cc->locations = build_locations(cc->whole, chip, idle_noise);
    cc->nest = build_nest(chip, cc->set, cc->whole, cc->locations);
    return cc;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t shard_seed(std::uint64_t seed, std::uint64_t shard) { return splitmix64(seed ^ splitmix64(shard + 1)); }

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval at 95%.
inline Interval wilson(long long k, long long n, double z = 1.959963984540054) {
    if (n <= 0) return {0.0, 1.0};
    double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn, z2 = z * z;
    double den = 1.0 + z2 / nn;
    double center = (ph + z2 / (2 * nn)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn)) / den;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct RunConfig {
    std::vector<double> ps;
    long long target_errors = 500;
    long long max_rounds = 10'000'000;
    int workers = 1;
    std::uint64_t seed = 1;
    bool decode_x = true;
    bool decode_z = true;
    int window = 0;            // rounds held by the decoder; 0 means the code distance
    int shard_rounds = 256;    // rounds per lane in one shard (64 lanes)
};

struct PointResult {
    double p = 0.0;
    long long rounds = 0;
    long long x_errors = 0;
    long long z_errors = 0;
    long long shards = 0;
    double x_rate() const { return rounds ? static_cast<double>(x_errors) / rounds : 0.0; }
    double z_rate() const { return rounds ? static_cast<double>(z_errors) / rounds : 0.0; }
    Interval x_ci() const { return wilson(x_errors, rounds); }
    Interval z_ci() const { return wilson(z_errors, rounds); }
};

struct ShardResult {
    long long rounds = 0;
    long long x_errors = 0;
    long long z_errors = 0;
    long long events = 0;
};

struct DecoderPair {
    std::unique_ptr<KindDecoder> x;  // X errors
    std::unique_ptr<KindDecoder> z;  // Z errors
};

inline DecoderPair make_decoders(const CompiledChip& cc, double p, int window, bool want_x, bool want_z) {
    DecoderPair d;
    int span = window + 3;
    if (want_x) d.x = std::make_unique<KindDecoder>(cc.set, cc.nest.for_x, p, span);
    if (want_z) d.z = std::make_unique<KindDecoder>(cc.set, cc.nest.for_z, p, span);
    return d;
}

// Lanes that saw a logical flip, per kind ([0] X errors, [1] Z errors).
using LaneFlips = std::array<std::uint64_t, 2>;

// 64 independent lanes for `rounds` error-correction rounds each; decoding starts once the window is full.
// `injections` (global steps, ascending) are applied on top of the noise.
inline ShardResult run_shard(const CompiledChip& cc, const DecoderPair& dec, double p, int window, long long rounds,
                             std::uint64_t seed, const std::vector<Injection>* injections = nullptr,
                             LaneFlips* flips = nullptr) {
    const WholeCircuit& wc = cc.whole;
    const int n = cc.chip.num_devices();
    FrameSim sim(wc, cc.locations);
    NoiseSource noise(p, seed);
    const KindDecoder* kd[2] = {dec.x.get(), dec.z.get()};
    std::vector<WindowDecoder> lanes[2];
    for (int k = 0; k < 2; ++k)
        if (kd[k]) lanes[k].assign(64, WindowDecoder(*kd[k], n));
    std::vector<std::uint64_t> last(cc.set.stabilizers.size(), 0);
    std::vector<long long> count(cc.set.stabilizers.size(), 0);
    std::vector<int> kind_of(cc.set.stabilizers.size());
    for (const auto& s : cc.set.stabilizers) kind_of[s.id] = s.kind == Kind::Z ? 0 : 1;
    std::vector<int> data;
    for (int q = 0; q < n; ++q)
        if (cc.chip.is_data(q) && cc.chip.working(q)) data.push_back(q);
    std::vector<std::vector<std::uint64_t>> snaps[2];
    for (int k = 0; k < 2; ++k) snaps[k].assign(window + 1, std::vector<std::uint64_t>(n, 0));
    std::vector<std::uint8_t> lane_snap(n, 0);
    std::vector<MeasRecord> recs;
    const int R = wc.rounds_per_block();
    ShardResult out;
    std::vector<Injection> here;
    std::size_t next_inj = 0;
    for (long long r = 0; r < rounds; ++r) {
        long long end = (r / R) * wc.period + wc.round_ends[r % R];
        while (sim.step() <= end) {
            here.clear();
            while (injections && next_inj < injections->size() && (*injections)[next_inj].step <= sim.step()) {
                if ((*injections)[next_inj].step == sim.step()) here.push_back((*injections)[next_inj]);
                ++next_inj;
            }
            sim.run_step(&noise, here.empty() ? nullptr : &here, recs);
            for (const auto& rec : recs) {
                std::uint64_t ev = rec.bits ^ last[rec.stab];
                last[rec.stab] = rec.bits;
                long long k = count[rec.stab]++;
                int kind = kind_of[rec.stab];
                if (!kd[kind]) continue;
                while (ev) {
                    int lane = std::countr_zero(ev);
                    ev &= ev - 1;
                    lanes[kind][lane].add_event({rec.stab, k}, r);
                    ++out.events;
                }
            }
            recs.clear();
        }
        int slot = static_cast<int>(r % (window + 1));
        for (int k = 0; k < 2; ++k) {
            if (!kd[k]) continue;
            for (int q : data) snaps[k][slot][q] = k == 0 ? sim.x_of_var(q) : sim.z_of_var(q);
        }
        if (r < window - 1) continue;
        long long oldest = r - window + 1;
        int oslot = static_cast<int>(oldest % (window + 1));
        for (int k = 0; k < 2; ++k) {
            if (!kd[k]) continue;
            for (int lane = 0; lane < 64; ++lane) {
                for (int q : data) lane_snap[q] = static_cast<std::uint8_t>((snaps[k][oslot][q] >> lane) & 1);
                if (lanes[k][lane].decode(oldest, lane_snap)) {
                    (k == 0 ? out.x_errors : out.z_errors)++;
                    if (flips) (*flips)[k] |= std::uint64_t{1} << lane;
                }
            }
        }
        out.rounds += 64;
    }
    return out;
}

// Shards run in index order in batches of `workers`; the stop rule is applied in shard order,
// so totals do not depend on the worker count.
inline std::vector<PointResult> run_logical_error_rate(const CompiledChip& cc, const RunConfig& cfg) {
    std::vector<PointResult> out;
    int window = cfg.window > 0 ? cfg.window : cc.chip.distance();
    for (double p : cfg.ps) {
        PointResult pr;
        pr.p = p;
        DecoderPair dec = make_decoders(cc, p, window, cfg.decode_x, cfg.decode_z);
        long long per_shard_rounds = cfg.shard_rounds + window - 1;
        std::uint64_t next = 0;
        bool done = false;
        while (!done) {
            int w = std::max(1, cfg.workers);
            std::vector<ShardResult> batch(w);
            std::vector<std::thread> pool;
            for (int i = 0; i < w; ++i) {
                std::uint64_t sid = next + i;
                auto job = [&, i, sid] { batch[i] = run_shard(cc, dec, p, window, per_shard_rounds, shard_seed(cfg.seed ^ std::hash<double>{}(p), sid)); };
                if (w == 1) job();
                else pool.emplace_back(job);
            }
            for (auto& t : pool) t.join();
            for (int i = 0; i < w && !done; ++i) {
                pr.rounds += batch[i].rounds;
                pr.x_errors += batch[i].x_errors;
                pr.z_errors += batch[i].z_errors;
                ++pr.shards;
                long long errs = std::max(cfg.decode_x ? pr.x_errors : 0, cfg.decode_z ? pr.z_errors : 0);
                if (errs >= cfg.target_errors || pr.rounds >= cfg.max_rounds) done = true;
            }
            next += w;
            if (p <= 0.0 && pr.rounds >= std::min<long long>(cfg.max_rounds, 64LL * cfg.shard_rounds)) done = true;
        }
        out.push_back(pr);
    }
    return out;
}

}  // namespace defectsc
