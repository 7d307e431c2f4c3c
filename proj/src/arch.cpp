#include "cerebellum/arch.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "cerebellum/errors.hpp"

namespace cerebellum {

namespace {

std::uint64_t bit_length(const BigInt& v) {
  return v == 0 ? 0 : static_cast<std::uint64_t>(boost::multiprecision::msb(v)) + 1;
}

ArchitectureEstimate estimate(const BigInt& entries, std::uint64_t bytes_per_entry) {
  ArchitectureEstimate e;
  e.entries = entries;
  e.address_bits = bit_length(entries - 1);
  e.memory_bytes = entries * bytes_per_entry;
  return e;
}

std::string sci(const BigInt& v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v.convert_to<double>();
  return os.str();
}

}  // namespace

void validate(const ArchitectureParams& p) {
  if (p.n < 1) throw ConfigError("n", 0, "must be >= 1");
  if (p.b.size() != 1 && p.b.size() != static_cast<std::size_t>(p.n)) {
    throw ConfigError("b", 0, "give one level count or one per joint");
  }
  for (int b : p.b) {
    if (b < 2) throw ConfigError("b", 0, "must be >= 2");
  }
  if (p.t_ins.count() <= 0) throw ConfigError("t_ins", 0, "must be positive");
  if (p.t_c.count() <= 0) throw ConfigError("t_c", 0, "must be positive");
  if (p.bytes_per_entry < 1) throw ConfigError("bytes_per_entry", 0, "must be >= 1");
}

ArchitectureParams arch_preset(const std::string& name) {
  if (name == "n10-b16") return ArchitectureParams{};
  throw InputError("unknown preset '" + name + "' (known: n10-b16)");
}

ArchitectureEstimate unstructured_table(const ArchitectureParams& p) {
  validate(p);
  BigInt entries = 1;
  for (int k = 0; k < p.n; ++k) {
    const BigInt b = p.levels(k);
    entries *= b * b * b;
  }
  return estimate(entries, p.bytes_per_entry);
}

ArchitectureEstimate structured_table(const ArchitectureParams& p) {
  validate(p);
  BigInt entries = 1;
  for (int k = 0; k < p.n; ++k) entries *= p.levels(k);
  return estimate(entries, p.bytes_per_entry);
}

std::pair<std::uint64_t, std::uint64_t> pu_count(int n) {
  if (n < 1) throw InputError("pu_count needs n >= 1");
  const auto u = static_cast<std::uint64_t>(n);
  return {u * (u + u * u + 3 + 3 + 6), u};
}

Latencies latencies(const ArchitectureParams& p) {
  validate(p);
  Latencies l;
  if (p.n_dm > 0) l.single = p.t_ins * static_cast<std::int64_t>(p.n_dm);
  l.multi = p.t_ins * (2 * static_cast<std::int64_t>(p.n));
  l.layered = p.t_ins * 2;
  return l;
}

bool meets_deadline(Nanos t, Nanos t_c) { return t <= t_c; }

BigInt encoder_memory(const BasisLayout& position, std::size_t n_microzones, std::uint64_t bytes_per_weight) {
  const auto n = static_cast<std::uint64_t>(position.dims());
  const std::uint64_t cepus = n + n + 2 + 3;
  return BigInt(n_microzones) * cepus * position.cell_count() * bytes_per_weight;
}

std::string power_text(const BigInt& v) {
  if (v >= 1) {
    BigInt x = v;
    int k = 0;
    while (x % 1024 == 0) {
      x /= 1024;
      ++k;
    }
    if (x == 1 && k > 0) return "1024^" + std::to_string(k);
  }
  return v.str();
}

std::string duration_text(Nanos t) {
  const auto ns = t.count();
  if (ns % 1'000'000'000 == 0) return std::to_string(ns / 1'000'000'000) + " s";
  if (ns % 1'000'000 == 0) return std::to_string(ns / 1'000'000) + " ms";
  if (ns % 1'000 == 0) return std::to_string(ns / 1'000) + " us";
  return std::to_string(ns) + " ns";
}

std::vector<std::pair<std::string, std::string>> arch_report(const ArchitectureParams& p) {
  validate(p);
  const auto un = unstructured_table(p);
  const auto st = structured_table(p);
  const auto [l1, l2] = pu_count(p.n);
  const auto lat = latencies(p);
  std::string levels;
  for (std::size_t i = 0; i < p.b.size(); ++i) levels += (i ? ";" : "") + std::to_string(p.b[i]);
  std::vector<std::pair<std::string, std::string>> rows = {
      {"n", std::to_string(p.n)},
      {"b", levels},
      {"t_ins", duration_text(p.t_ins)},
      {"t_c", duration_text(p.t_c)},
      {"bytes_per_entry", std::to_string(p.bytes_per_entry)},
      {"unstructured_address_bits", std::to_string(un.address_bits)},
      {"unstructured_entries", un.entries.str()},
      {"unstructured_memory_bytes", power_text(un.memory_bytes)},
      {"unstructured_memory_approx", sci(un.memory_bytes)},
      {"structured_address_bits", std::to_string(st.address_bits)},
      {"structured_entries", st.entries.str()},
      {"structured_memory_bytes", power_text(st.memory_bytes)},
      {"structured_memory_approx", sci(st.memory_bytes)},
      {"reduction_factor", BigInt(un.entries / st.entries).str()},
      {"pu_layer1", std::to_string(l1)},
      {"pu_layer2", std::to_string(l2)},
      {"t_single", lat.single ? duration_text(*lat.single) : "n/a"},
      {"t_multi", duration_text(lat.multi)},
      {"t_layered", duration_text(lat.layered)},
      {"t_multi_meets_deadline", meets_deadline(lat.multi, p.t_c) ? "true" : "false"},
      {"t_layered_meets_deadline", meets_deadline(lat.layered, p.t_c) ? "true" : "false"},
  };
  if (lat.single) rows.emplace_back("t_single_meets_deadline", meets_deadline(*lat.single, p.t_c) ? "true" : "false");
  return rows;
}

void write_arch_report(std::ostream& os, const ArchitectureParams& p, bool csv) {
  const auto rows = arch_report(p);
  if (csv) {
    os << "quantity,value\n";
    for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(width + 2)) << k << v << '\n';
}

}  // namespace cerebellum
