#include "nschs/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; add byte swapping for this platform");

namespace nschs {

namespace {

constexpr char kMagic[7] = "NSCHS1";
constexpr std::size_t kHeaderSize = 64;

void put_hex(char* dst, std::uint64_t value, int digits) {
    static const char* hex = "0123456789abcdef";
    for (int k = digits - 1; k >= 0; --k) {
        dst[k] = hex[value & 0xf];
        value >>= 4;
    }
}

std::uint64_t get_hex(const char* src, int digits) {
    std::uint64_t v = 0;
    for (int k = 0; k < digits; ++k) {
        const char c = src[k];
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw SnapshotError("corrupt header: non-hex digit");
    }
    return v;
}

} // namespace

void write_snapshot(const SimState& state, const std::string& path) {
    const Grid2D& g = state.grid();
    if (g.nx > 0xffff || g.ny > 0xffff)
        throw SnapshotError("snapshot format supports at most 65535 cells per axis");

    char header[kHeaderSize];
    std::memcpy(header, kMagic, 6);
    put_hex(header + 6, static_cast<std::uint64_t>(g.nx), 4);
    header[10] = ' ';
    put_hex(header + 11, static_cast<std::uint64_t>(g.ny), 4);
    header[15] = ' ';
    put_hex(header + 16, std::bit_cast<std::uint64_t>(g.Lx), 16);
    put_hex(header + 32, std::bit_cast<std::uint64_t>(g.Ly), 16);
    put_hex(header + 48, std::bit_cast<std::uint64_t>(state.t), 16);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SnapshotError("cannot open '" + path + "' for writing");
    out.write(header, kHeaderSize);
    auto dump = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    dump(state.phi.data());
    dump(state.rho.data());
    dump(state.p.data());
    dump(state.u.ux_data());
    dump(state.u.uy_data());
    if (!out) throw SnapshotError("write failed for '" + path + "'");
}

SimState read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SnapshotError("cannot open '" + path + "'");
    char header[kHeaderSize];
    in.read(header, kHeaderSize);
    if (in.gcount() != static_cast<std::streamsize>(kHeaderSize))
        throw SnapshotError("truncated header in '" + path + "'");
    if (std::memcmp(header, kMagic, 6) != 0)
        throw SnapshotError("bad magic in '" + path + "'");
    if (header[10] != ' ' || header[15] != ' ')
        throw SnapshotError("corrupt header in '" + path + "'");

    const int nx = static_cast<int>(get_hex(header + 6, 4));
    const int ny = static_cast<int>(get_hex(header + 11, 4));
    const double Lx = std::bit_cast<double>(get_hex(header + 16, 16));
    const double Ly = std::bit_cast<double>(get_hex(header + 32, 16));
    const double t = std::bit_cast<double>(get_hex(header + 48, 16));

    SimState state{Grid2D(nx, ny, Lx, Ly)};
    state.t = t;
    auto slurp = [&](std::vector<double>& v, const char* what) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
            throw SnapshotError(std::string("shape mismatch reading ") + what + " from '" +
                                path + "'");
    };
    slurp(state.phi.data(), "phi");
    slurp(state.rho.data(), "rho");
    slurp(state.p.data(), "p");
    slurp(state.u.ux_data(), "ux");
    slurp(state.u.uy_data(), "uy");
    char extra;
    if (in.read(&extra, 1))
        throw SnapshotError("shape mismatch: trailing bytes in '" + path + "'");
    return state;
}

} // namespace nschs
