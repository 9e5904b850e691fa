#include "tworing/csv.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace tworing::csv {

std::string real(double x) {
  if (x == 0.0) return "0";
  return fmt::format("{:.9g}", x);
}

std::string schema_line(std::string_view name, int version) {
  return fmt::format("# schema: {} v{}", name, version);
}

void write_trajectories(std::ostream& os, const TrajectoryTable& table) {
  os << schema_line("tworing.trajectory") << '\n';
  os << "time_s,vehicle_id,class,link_id,position_m,speed_mps,accel_mps2\n";
  fmt::memory_buffer buf;
  for (const auto& r : table.records) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{},{}\n", real(r.time), r.vehicle,
                   to_string(r.cls), static_cast<int>(r.link), real(r.position), real(r.speed),
                   real(r.accel));
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

namespace {

/// Quotes a field when it holds a separator or quote.
std::string field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

void write_events(std::ostream& os, const EventLog& log) {
  os << schema_line("tworing.events") << '\n';
  os << "time_s,vehicle_id,event_kind,detail\n";
  for (const auto& e : log.events) {
    fmt::print(os, "{},{},{},{}\n", real(e.time), e.vehicle, to_string(e.kind), field(e.detail));
  }
}

void write_metrics(std::ostream& os, const EdieSeries& series) {
  os << schema_line("tworing.metrics") << '\n';
  os << "interval_start_s,region,density_veh_per_m,flow_veh_per_s\n";
  for (std::size_t i = 0; i < series.network.size(); ++i) {
    for (const auto* s : {&series.ring1[i], &series.ring2[i], &series.network[i]}) {
      fmt::print(os, "{},{},{},{}\n", real(s->interval_start), to_string(s->region),
                 real(s->density), real(s->flow));
    }
  }
}

void write_phase_path(std::ostream& os, const PhasePath& raw, const PhasePath& smoothed) {
  os << schema_line("tworing.phase_path") << '\n';
  os << "index,time_s,k1,k2,k1_smoothed,k2_smoothed\n";
  for (std::size_t i = 0; i < raw.points.size(); ++i) {
    fmt::print(os, "{},{},{},{},{},{}\n", i, real(static_cast<double>(i) * raw.cadence),
               real(raw.points[i].k1), real(raw.points[i].k2), real(smoothed.points[i].k1),
               real(smoothed.points[i].k2));
  }
}

void write_bifurcations(std::ostream& os, std::span<const BifurcationRow> rows) {
  os << schema_line("tworing.bifurcation") << '\n';
  os << "scenario,replication,detected,index,k1,k2,K,ratio_to_jam\n";
  for (const auto& r : rows) {
    if (r.point) {
      fmt::print(os, "{},{},true,{},{},{},{},{}\n", field(r.scenario), r.replication,
                 r.point->index, real(r.point->k1), real(r.point->k2),
                 real(r.point->mean_density), real(r.ratio_to_jam()));
    } else {
      fmt::print(os, "{},{},false,,,,,\n", field(r.scenario), r.replication);
    }
  }
}

void write_fd_curve(std::ostream& os, std::string_view label, const TriangularFd& fd, int points) {
  os << schema_line("tworing.fd_theory") << '\n';
  os << "fleet,density_veh_per_m,flow_veh_per_s\n";
  for (int i = 0; i < points; ++i) {
    const double k = fd.jam_density() * i / (points - 1);
    fmt::print(os, "{},{},{}\n", field(label), real(k), real(fd.flow(std::min(k, fd.jam_density()))));
  }
}

void write_equilibria(std::ostream& os, std::string_view label, const TriangularFd& fd,
                      int points) {
  os << schema_line("tworing.equilibria") << '\n';
  os << "fleet,K,k1,k2,stability,branch,network_flow_veh_per_s\n";
  for (int i = 0; i < points; ++i) {
    const double K = fd.jam_density() * i / (points - 1);
    for (const auto& eq : enumerate_equilibria(fd, std::min(K, fd.jam_density()))) {
      fmt::print(os, "{},{},{},{},{},{},{}\n", field(label), real(K), real(eq.k1), real(eq.k2),
                 to_string(eq.stability), to_string(eq.branch), real(network_flow(fd, eq)));
    }
  }
}

void write_replications(std::ostream& os, std::span<const ReplicationLine> lines) {
  os << schema_line("tworing.replications") << '\n';
  os << "replication,seed,ok,max_network_flow_veh_per_s,final_density_ring1,"
        "final_density_ring2,inserted,unserved,overlaps,emergency_brakes,merge_stops,error\n";
  for (const auto& l : lines) {
    fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{}\n", l.replication, l.seed, l.ok,
               real(l.max_network_flow), real(l.final_density_ring1),
               real(l.final_density_ring2), l.inserted, l.unserved, l.overlaps,
               l.emergency_brakes, l.merge_stops, field(l.error));
  }
}

std::vector<SummaryRow> read_bifurcations(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty bifurcation summary");
  if (line != schema_line("tworing.bifurcation")) {
    throw FormatError(fmt::format("unsupported summary schema '{}'", line));
  }
  if (!std::getline(is, line) || line != "scenario,replication,detected,index,k1,k2,K,ratio_to_jam") {
    throw FormatError("bifurcation summary header mismatch");
  }
  std::vector<SummaryRow> rows;
  int lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_row(line);
    if (f.size() != 8) throw FormatError(fmt::format("line {}: expected 8 fields", lineno));
    try {
      SummaryRow r;
      r.scenario = f[0];
      r.replication = std::stoi(f[1]);
      if (f[2] != "true" && f[2] != "false") throw std::invalid_argument("detected");
      r.detected = f[2] == "true";
      if (r.detected) {
        r.index = std::stoi(f[3]);
        r.k1 = std::stod(f[4]);
        r.k2 = std::stod(f[5]);
        r.mean_density = std::stod(f[6]);
        r.ratio_to_jam = std::stod(f[7]);
      }
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError(fmt::format("line {}: malformed row", lineno));
    }
  }
  return rows;
}

}  // namespace tworing::csv
