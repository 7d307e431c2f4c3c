#pragma once

// Closed-form sizing of table-lookup and layered architectures for an n-DOF
// inverse dynamics model. Table sizes are exact big integers.

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cerebellum/encoding.hpp"

namespace cerebellum {

using BigInt = boost::multiprecision::cpp_int;
using Nanos = std::chrono::nanoseconds;

struct ArchitectureParams {
  int n = 10;
  std::vector<int> b{16};  // one level count for every joint, or one per joint
  Nanos t_ins{100'000};
  Nanos t_c{10'000'000};
  std::uint64_t n_dm = 0;  // instructions of the dynamics model; 0 = not given
  std::uint64_t bytes_per_entry = 1;

  int levels(int joint) const { return b.size() == 1 ? b[0] : b[static_cast<std::size_t>(joint)]; }
};

void validate(const ArchitectureParams& p);

/// Named parameter sets; "n10-b16" is n = 10, b = 16, T_ins = 100 us, T_c = 10 ms.
ArchitectureParams arch_preset(const std::string& name);

struct ArchitectureEstimate {
  BigInt entries;
  std::uint64_t address_bits = 0;
  BigInt memory_bytes;
};

/// One table over (q, qd, qdd) of every joint: prod_k b_k^3 entries.
ArchitectureEstimate unstructured_table(const ArchitectureParams& p);
/// One table per processing unit over q only: prod_k b_k entries.
ArchitectureEstimate structured_table(const ArchitectureParams& p);

/// (layer 1, layer 2) = (n (n + n^2 + 3 + 3 + 6), n).
std::pair<std::uint64_t, std::uint64_t> pu_count(int n);

struct Latencies {
  std::optional<Nanos> single;  // n_dm T_ins
  Nanos multi{0};               // 2n T_ins
  Nanos layered{0};             // 2 T_ins
};

Latencies latencies(const ArchitectureParams& p);
bool meets_deadline(Nanos t, Nanos t_c);

/// Bytes of PC weights over `n_microzones` microzones of a planar network using `position`.
BigInt encoder_memory(const BasisLayout& position, std::size_t n_microzones, std::uint64_t bytes_per_weight = 8);

/// "1024^k" when v is an exact power of 1024, otherwise its decimal digits.
std::string power_text(const BigInt& v);
std::string duration_text(Nanos t);

/// quantity,value rows of the architecture report.
std::vector<std::pair<std::string, std::string>> arch_report(const ArchitectureParams& p);
void write_arch_report(std::ostream& os, const ArchitectureParams& p, bool csv);

}  // namespace cerebellum
