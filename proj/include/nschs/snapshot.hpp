#pragma once

// Binary state snapshots. Layout: a 64-byte text header
//
//   bytes  0..5   magic "NSCHS1"
//   bytes  6..9   nx, 4 lowercase hex digits
//   byte   10     space
//   bytes 11..14  ny, 4 lowercase hex digits
//   byte   15     space
//   bytes 16..31  Lx, IEEE-754 bit pattern as 16 hex digits
//   bytes 32..47  Ly, same encoding
//   bytes 48..63  t, same encoding
//
// followed by little-endian 64-bit floats, row-major (x fastest), fields in
// the fixed order phi, rho, p, ux, uy. The bit-pattern encoding makes
// read(write(state)) a bitwise identity including the header time.

#include <string>

#include "nschs/model.hpp"

namespace nschs {

struct SnapshotError : std::runtime_error {
    explicit SnapshotError(const std::string& what) : std::runtime_error(what) {}
};

void write_snapshot(const SimState& state, const std::string& path);
SimState read_snapshot(const std::string& path);

} // namespace nschs
