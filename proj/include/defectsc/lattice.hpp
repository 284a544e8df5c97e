#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace defectsc {

enum class Role : std::uint8_t { data, syndrome };

enum class Kind : std::uint8_t { X, Z };

inline char kind_char(Kind k) { return k == Kind::X ? 'X' : 'Z'; }
inline Kind other(Kind k) { return k == Kind::X ? Kind::Z : Kind::X; }

enum class Side : std::uint8_t { north, south, west, east };

struct DeviceId {
    int row = 0;
    int col = 0;
    friend bool operator==(const DeviceId&, const DeviceId&) = default;
};

class ChipError : public std::runtime_error {
public:
    enum class Code { unencodable, uncoverable };
    ChipError(Code c, const std::string& what) : std::runtime_error(what), code_(c) {}
    Code code() const { return code_; }

private:
    Code code_;
};

// (2d-1)x(2d-1) grid; data qubits sit at even (row+col), so corners are data.
class Chip {
public:
    Chip() = default;
    Chip(int distance, double yield, std::uint64_t seed)
        : distance_(distance), yield_(yield), seed_(seed),
          width_(2 * distance - 1), working_(static_cast<std::size_t>(width_ * width_), 1) {
        if (distance < 2) throw std::invalid_argument("distance must be >= 2");
        if (!(yield > 0.0 && yield <= 1.0)) throw std::invalid_argument("yield must be in (0,1]");
    }

    int distance() const { return distance_; }
    double yield() const { return yield_; }
    std::uint64_t seed() const { return seed_; }
    int width() const { return width_; }
    int num_devices() const { return width_ * width_; }

    int index(int r, int c) const { return r * width_ + c; }
    int index(DeviceId d) const { return index(d.row, d.col); }
    DeviceId device(int idx) const { return {idx / width_, idx % width_}; }
    bool in_grid(int r, int c) const { return r >= 0 && c >= 0 && r < width_ && c < width_; }

    Role role(int idx) const {
        DeviceId d = device(idx);
        return ((d.row + d.col) % 2 == 0) ? Role::data : Role::syndrome;
    }
    bool is_data(int idx) const { return role(idx) == Role::data; }
    bool working(int idx) const { return working_[static_cast<std::size_t>(idx)] != 0; }
    void set_working(int idx, bool w) { working_[static_cast<std::size_t>(idx)] = w ? 1 : 0; }

    // Syndrome devices at (even row, odd col) host X units; (odd row, even col) host Z units.
    Kind ancilla_kind(int idx) const {
        DeviceId d = device(idx);
        return (d.row % 2 == 0) ? Kind::X : Kind::Z;
    }

    // Neighbors in N, W, E, S order; -1 where off-grid.
    std::array<int, 4> neighbors(int idx) const {
        DeviceId d = device(idx);
        std::array<int, 4> out{-1, -1, -1, -1};
        if (in_grid(d.row - 1, d.col)) out[0] = index(d.row - 1, d.col);
        if (in_grid(d.row, d.col - 1)) out[1] = index(d.row, d.col - 1);
        if (in_grid(d.row, d.col + 1)) out[2] = index(d.row, d.col + 1);
        if (in_grid(d.row + 1, d.col)) out[3] = index(d.row + 1, d.col);
        return out;
    }

    bool adjacent(int a, int b) const {
        DeviceId x = device(a), y = device(b);
        return std::abs(x.row - y.row) + std::abs(x.col - y.col) == 1;
    }

    int count_faulty() const {
        int n = 0;
        for (auto w : working_) n += (w == 0);
        return n;
    }
    int count_faulty(Role r) const {
        int n = 0;
        for (int i = 0; i < num_devices(); ++i)
            if (!working(i) && role(i) == r) ++n;
        return n;
    }

    friend bool operator==(const Chip&, const Chip&) = default;

private:
    int distance_ = 0;
    double yield_ = 1.0;
    std::uint64_t seed_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> working_;
};

// 53-bit uniform in [0,1) from a 64-bit draw; fixed so chip files reproduce across toolchains.
inline double unit_uniform(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One mt19937_64 per chip, seeded directly; one draw per device in row-major order.
inline Chip generate_chip(int distance, double yield, std::uint64_t seed) {
    Chip chip(distance, yield, seed);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < chip.num_devices(); ++i) {
        double u = unit_uniform(rng());
        chip.set_working(i, u < yield);
    }
    return chip;
}

// Home ancillas of the unit stabilizers of one kind, row-major.
inline std::vector<int> unit_ancillas(const Chip& chip, Kind k) {
    std::vector<int> out;
    for (int i = 0; i < chip.num_devices(); ++i)
        if (!chip.is_data(i) && chip.ancilla_kind(i) == k) out.push_back(i);
    return out;
}

// Data qubits of the unit hosted at ancilla a, in N, W, E, S order (faulty ones included).
inline std::vector<int> unit_support(const Chip& chip, int a) {
    std::vector<int> out;
    for (int n : chip.neighbors(a))
        if (n >= 0) out.push_back(n);
    return out;
}

// Which terminal a single-unit data qubit sits on for the given stabilizer kind.
// Z units terminate on north/south, X units on west/east.
inline Side terminal_side(const Chip& chip, Kind k, int q) {
    DeviceId d = chip.device(q);
    if (k == Kind::Z) return d.row == 0 ? Side::north : Side::south;
    return d.col == 0 ? Side::west : Side::east;
}

inline std::pair<Side, Side> terminal_pair(Kind k) {
    return k == Kind::Z ? std::pair{Side::north, Side::south} : std::pair{Side::west, Side::east};
}

// Disjoint-set forest used by the merge relation.
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent_[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            auto& p = parent_[static_cast<std::size_t>(x)];
            p = parent_[static_cast<std::size_t>(p)];
            x = p;
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }

private:
    std::vector<int> parent_;
};

// Faulty-data clusters of one kind: units joined through a shared faulty data qubit.
struct MergeClusters {
    std::vector<int> ancillas;          // unit home ancillas, row-major
    std::vector<int> group;             // cluster root per unit (index into ancillas)
    std::vector<std::uint8_t> touches;  // per root: bit0 = first terminal, bit1 = second
};

inline MergeClusters merge_clusters(const Chip& chip, Kind k) {
    MergeClusters mc;
    mc.ancillas = unit_ancillas(chip, k);
    std::vector<int> pos(static_cast<std::size_t>(chip.num_devices()), -1);
    for (std::size_t u = 0; u < mc.ancillas.size(); ++u) pos[static_cast<std::size_t>(mc.ancillas[u])] = static_cast<int>(u);
    int nu = static_cast<int>(mc.ancillas.size());
    UnionFind uf(nu);
    std::vector<std::uint8_t> touch(static_cast<std::size_t>(nu), 0);
    auto [first, second] = terminal_pair(k);
    for (int q = 0; q < chip.num_devices(); ++q) {
        if (!chip.is_data(q) || chip.working(q)) continue;
        std::vector<int> units;
        for (int n : chip.neighbors(q))
            if (n >= 0 && chip.ancilla_kind(n) == k) units.push_back(pos[static_cast<std::size_t>(n)]);
        if (units.size() == 2) {
            uf.unite(units[0], units[1]);
        } else if (units.size() == 1) {
            Side s = terminal_side(chip, k, q);
            touch[static_cast<std::size_t>(units[0])] |= (s == first) ? 1 : 2;
        }
    }
    mc.group.resize(static_cast<std::size_t>(nu));
    mc.touches.assign(static_cast<std::size_t>(nu), 0);
    for (int u = 0; u < nu; ++u) {
        int r = uf.find(u);
        mc.group[static_cast<std::size_t>(u)] = r;
        mc.touches[static_cast<std::size_t>(r)] |= touch[static_cast<std::size_t>(u)];
    }
    return mc;
}

inline bool check_encodable(const Chip& chip) {
    for (Kind k : {Kind::X, Kind::Z}) {
        MergeClusters mc = merge_clusters(chip, k);
        for (auto t : mc.touches)
            if (t == 3) return false;
    }
    return true;
}

}  // namespace defectsc
