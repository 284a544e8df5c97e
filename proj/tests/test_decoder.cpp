#include <gtest/gtest.h>

#include "defectsc/montecarlo.hpp"

using namespace defectsc;

namespace {

struct Outcome {
    int t, loc;
    Pauli a, b;
    bool flip;
};

std::vector<Outcome> all_outcomes(const WholeCircuit& wc, const LocationTable& lt) {
    std::vector<Outcome> out;
    for (int t = 0; t < wc.period; ++t)
        for (int li = lt.base[t]; li < lt.base[t + 1]; ++li) {
            const auto& l = lt.locs[li];
            int rel = li - lt.base[t];
            if (l.kind == LocKind::init || l.kind == LocKind::meas) {
                out.push_back({t, rel, Pauli::I, Pauli::I, true});
            } else if (l.kind == LocKind::one) {
                for (int k = 0; k < 3; ++k) out.push_back({t, rel, pauli_1q(k), Pauli::I, false});
            } else {
                for (int k = 1; k < 16; ++k) {
                    auto [a, b] = pauli_2q(k);
                    out.push_back({t, rel, a, b, false});
                }
            }
        }
    return out;
}

// Logical flips over all single faults, 64 faults per noiseless shard.
int single_fault_failures(const Chip& chip, int* total) {
    auto cc = compile_chip(chip);
    const auto& wc = cc->whole;
    const int d = chip.distance();
    auto dec = make_decoders(*cc, 0.001, d, true, true);
    auto outs = all_outcomes(wc, cc->locations);
    *total = static_cast<int>(outs.size());
    const int R = wc.rounds_per_block();
    const long long blk = (d + 2 + R - 1) / R;
    const long long rounds = blk * R + 3 * d + 4;
    int bad = 0;
    for (std::size_t b0 = 0; b0 < outs.size(); b0 += 64) {
        std::vector<Injection> inj;
        for (std::size_t j = b0; j < std::min(outs.size(), b0 + 64); ++j) {
            const auto& o = outs[j];
            inj.push_back({blk * wc.period + o.t, o.loc, o.a, o.b, o.flip, std::uint64_t{1} << (j - b0)});
        }
        std::stable_sort(inj.begin(), inj.end(), [](const Injection& x, const Injection& y) { return x.step < y.step; });
        LaneFlips fl{0, 0};
        run_shard(*cc, dec, 0.0, d, rounds, 1, &inj, &fl);
        bad += std::popcount(fl[0]) + std::popcount(fl[1]);
    }
    return bad;
}

// Noiseless runs with data errors injected between periods; outcomes per stabilizer.
struct Replay {
    std::shared_ptr<CompiledChip> cc;
    std::vector<std::vector<int>> outcomes;
    std::vector<std::uint8_t> x_err, z_err;

    Replay(std::shared_ptr<CompiledChip> c, const std::vector<int>& xs, const std::vector<int>& zs, int before = 3,
           int after = 4)
        : cc(std::move(c)) {
        const auto& wc = cc->whole;
        FrameSim sim(wc, cc->locations);
        std::vector<MeasRecord> recs;
        for (int k = 0; k < before * wc.period; ++k) sim.run_step(nullptr, nullptr, recs);
        x_err.assign(cc->chip.num_devices(), 0);
        z_err = x_err;
        for (int q : xs) {
            sim.inject_data(q, Pauli::X);
            x_err[q] ^= 1;
        }
        for (int q : zs) {
            sim.inject_data(q, Pauli::Z);
            z_err[q] ^= 1;
        }
        for (int k = 0; k < after * wc.period; ++k) sim.run_step(nullptr, nullptr, recs);
        outcomes.assign(cc->set.stabilizers.size(), {});
        for (const auto& r : recs) outcomes[r.stab].push_back(static_cast<int>(r.bits & 1));
    }

    std::vector<EventId> events(Kind stab_kind) const {
        std::vector<EventId> out;
        for (const auto& e : extract_events(outcomes))
            if (cc->set.stabilizers[e.stab].kind == stab_kind) out.push_back(e);
        return out;
    }
};

}  // namespace

TEST(ExtractEvents, Examples) {
    EXPECT_TRUE(extract_events({{0, 0, 0, 0}, {1, 1, 1}}).size() == 1u);
    EXPECT_TRUE(extract_events({{0, 0, 0}, {0, 0}}).empty());
    auto ev = extract_events({{0, 0}, {0, 1, 0}});
    ASSERT_EQ(ev.size(), 2u);
    EXPECT_EQ(ev[0], (EventId{1, 1}));
    EXPECT_EQ(ev[1], (EventId{1, 2}));
    auto many = extract_events({{1, 0, 1, 1, 0}});
    EXPECT_EQ(many.size(), 4u);
}

TEST(SingleFault, PerfectDistanceThreeCorrectsEveryFault) {
    int total = 0;
    EXPECT_EQ(single_fault_failures(generate_chip(3, 1.0, 1), &total), 0);
    EXPECT_GT(total, 500);
}

TEST(SingleFault, PerfectDistanceFiveCorrectsEveryFault) {
    int total = 0;
    EXPECT_EQ(single_fault_failures(generate_chip(5, 1.0, 1), &total), 0);
    EXPECT_GT(total, 2000);
}

TEST(SingleFault, CenterDefectDistanceFiveCorrectsEveryFault) {
    Chip chip = generate_chip(5, 1.0, 1);
    chip.set_working(chip.index(4, 4), false);
    int total = 0;
    EXPECT_EQ(single_fault_failures(chip, &total), 0);
}

TEST(Correction, SingleBulkXErrorIsCancelled) {
    auto cc = compile_chip(generate_chip(5, 1.0, 1));
    const Chip& chip = cc->chip;
    Replay r(cc, {chip.index(4, 4)}, {});
    auto ev = r.events(Kind::Z);
    ASSERT_EQ(ev.size(), 2u);
    std::set<int> homes{cc->set.stabilizers[ev[0].stab].home, cc->set.stabilizers[ev[1].stab].home};
    EXPECT_EQ(homes, (std::set<int>{chip.index(3, 4), chip.index(5, 4)}));
    EXPECT_EQ(ev[0].k, ev[1].k);
    EXPECT_TRUE(r.events(Kind::X).empty());
    auto dec = make_decoders(*cc, 0.001, 5, true, true);
    Matching m = mwpm(ev, *dec.x);
    ASSERT_EQ(m.pairs.size(), 1u);
    EXPECT_EQ(m.pairs[0].second, m.pairs[0].first == 0 ? 1 : 0);
    std::vector<std::uint8_t> corr(chip.num_devices(), 0);
    apply_correction(m, ev, *dec.x, corr);
    std::vector<std::uint8_t> residual(chip.num_devices(), 0);
    for (int q = 0; q < chip.num_devices(); ++q) residual[q] = r.x_err[q] ^ corr[q];
    EXPECT_EQ(std::count(residual.begin(), residual.end(), 1), 0);
    std::vector<std::uint8_t> none(chip.num_devices(), 0);
    EXPECT_EQ(check_logical_error(residual, none, cc->set), std::make_pair(false, false));
}

// Four X errors down the middle column: both ends are nearer a boundary than each other.
TEST(Correction, FourErrorChainMatchesToBoundaries) {
    auto cc = compile_chip(generate_chip(7, 1.0, 1));
    const Chip& chip = cc->chip;
    std::vector<int> chain{chip.index(2, 6), chip.index(4, 6), chip.index(6, 6), chip.index(8, 6)};
    Replay r(cc, chain, {});
    auto ev = r.events(Kind::Z);
    ASSERT_EQ(ev.size(), 2u);
    auto dec = make_decoders(*cc, 0.001, 7, true, false);
    Matching m = mwpm(ev, *dec.x);
    ASSERT_EQ(m.pairs.size(), 2u);
    for (auto [i, j] : m.pairs) EXPECT_EQ(j, -1);
    EXPECT_LT(m.weight, dec.x->distance(ev[0], ev[1]));
    std::vector<std::uint8_t> corr(chip.num_devices(), 0);
    apply_correction(m, ev, *dec.x, corr);
    EXPECT_EQ(std::count(corr.begin(), corr.end(), 1), 3);
    std::vector<std::uint8_t> residual(chip.num_devices(), 0), none(chip.num_devices(), 0);
    for (int q = 0; q < chip.num_devices(); ++q) residual[q] = r.x_err[q] ^ corr[q];
    EXPECT_EQ(check_logical_error(residual, none, cc->set), std::make_pair(true, false));
    EXPECT_TRUE(dec.x->closed_logical(residual));
}

TEST(CheckLogicalError, Examples) {
    auto cc = compile_chip(generate_chip(5, 1.0, 1));
    const int n = cc->chip.num_devices();
    std::vector<std::uint8_t> none(n, 0);
    EXPECT_EQ(check_logical_error(none, none, cc->set), std::make_pair(false, false));
    for (const auto& s : cc->set.stabilizers) {
        std::vector<std::uint8_t> r(n, 0);
        for (int q : s.data) r[q] = 1;
        auto v = s.kind == Kind::X ? check_logical_error(r, none, cc->set) : check_logical_error(none, r, cc->set);
        EXPECT_EQ(v, std::make_pair(false, false)) << s.name();
    }
    std::vector<std::uint8_t> lx(n, 0), lz(n, 0);
    for (int q : cc->set.x_logical) lx[q] = 1;
    for (int q : cc->set.z_logical) lz[q] = 1;
    EXPECT_EQ(check_logical_error(lx, none, cc->set), std::make_pair(true, false));
    EXPECT_EQ(check_logical_error(none, lz, cc->set), std::make_pair(false, true));
}

// Two equal-weight corrections for the same events differ by a stabilizer and agree on the verdict.
TEST(Correction, AlternativeChainGivesSameVerdict) {
    auto cc = compile_chip(generate_chip(5, 1.0, 1));
    const Chip& chip = cc->chip;
    auto dec = make_decoders(*cc, 0.001, 5, true, true);
    // X on two qubits of an X plaquette versus X on the other two: same Z syndrome, product is the plaquette.
    int checked = 0;
    for (const auto& s : cc->set.stabilizers) {
        if (s.kind != Kind::X || s.data.size() != 4) continue;
        ++checked;
        std::vector<int> a{s.data[0], s.data[1]}, b{s.data[2], s.data[3]};
        Replay ra(cc, a, {}), rb(cc, b, {});
        EXPECT_EQ(ra.events(Kind::Z), rb.events(Kind::Z)) << s.name();
        std::vector<std::uint8_t> xa(chip.num_devices(), 0), xb = xa, none = xa;
        for (int q : a) xa[q] = 1;
        for (int q : b) xb[q] = 1;
        EXPECT_EQ(check_logical_error(xa, none, cc->set), check_logical_error(xb, none, cc->set));
        EXPECT_EQ(dec.x->closed_logical(xa), dec.x->closed_logical(xb));
    }
    EXPECT_GT(checked, 5);
}

TEST(WindowDecoder, HeldEventsStayWithinTheWindow) {
    auto cc = compile_chip(generate_chip(5, 0.95, 6));
    const int window = 5;
    auto dec = make_decoders(*cc, 0.004, window, true, false);
    // Mirror the shard loop for one lane and check retention after every decode.
    const auto& wc = cc->whole;
    FrameSim sim(wc, cc->locations);
    NoiseSource noise(0.004, 9);
    WindowDecoder wd(*dec.x, cc->chip.num_devices());
    std::vector<std::uint64_t> last(cc->set.stabilizers.size(), 0);
    std::vector<long long> count(cc->set.stabilizers.size(), 0);
    std::vector<std::vector<std::uint8_t>> snaps(window + 1, std::vector<std::uint8_t>(cc->chip.num_devices(), 0));
    std::vector<MeasRecord> recs;
    long long added = 0;
    const int R = wc.rounds_per_block();
    for (long long r = 0; r < 300; ++r) {
        long long end = (r / R) * wc.period + wc.round_ends[r % R];
        while (sim.step() <= end) {
            sim.run_step(&noise, nullptr, recs);
            for (const auto& rec : recs) {
                std::uint64_t ev = (rec.bits ^ last[rec.stab]) & 1;
                last[rec.stab] = rec.bits;
                long long k = count[rec.stab]++;
                if (ev && cc->set.stabilizers[rec.stab].kind == Kind::Z) {
                    wd.add_event({rec.stab, k}, r);
                    ++added;
                }
            }
            recs.clear();
        }
        for (int q = 0; q < cc->chip.num_devices(); ++q)
            snaps[r % (window + 1)][q] = static_cast<std::uint8_t>(sim.x_dev(q) & 1);
        if (r < window - 1) continue;
        long long oldest = r - window + 1;
        wd.decode(oldest, snaps[oldest % (window + 1)]);
        for (const auto& a : wd.active()) ASSERT_GT(a.round, oldest - window) << "event held past two windows";
    }
    EXPECT_GT(added, 50);
    EXPECT_GT(wd.committed_pairs(), 10);
}
