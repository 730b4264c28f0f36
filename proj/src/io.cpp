#include "kinestat/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kinestat {

namespace {

constexpr const char* kVersionLine = "kinestat-log v1";

const char* kAxes[3] = {"x", "y", "z"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

void append_triplet(std::vector<std::string>& cols, const std::string& base) {
  for (const auto* ax : kAxes) cols.push_back(base + "_" + ax);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_sensor_log(const std::string& path, const SensorLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_sensor_log: cannot open '" + path + "'");
  out << kVersionLine << "\n";

  std::vector<std::string> cols{"t"};
  append_triplet(cols, "omega_m");
  append_triplet(cols, "a_m");
  append_triplet(cols, "p_m");
  append_triplet(cols, "m_m");
  if (log.inter_imu) append_triplet(cols, "a_m2");
  if (log.has_truth) {
    append_triplet(cols, "gt_p");
    append_triplet(cols, "gt_v");
    append_triplet(cols, "gt_att");
    append_triplet(cols, "gt_a");
    append_triplet(cols, "gt_omega");
    append_triplet(cols, "gt_b_a");
    append_triplet(cols, "gt_b_w");
    if (log.inter_imu) {
      append_triplet(cols, "gt_tau");
      append_triplet(cols, "gt_b_a2");
    }
  }
  for (const auto& [name, values] : log.extra_columns) cols.push_back(name);
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";

  auto put3 = [&](const MatrixX3& m, long k) {
    out << "," << format_double(m(k, 0)) << "," << format_double(m(k, 1)) << ","
        << format_double(m(k, 2));
  };
  for (long k = 0; k < log.rows(); ++k) {
    out << format_double(log.t(k));
    put3(log.omega_m, k);
    put3(log.a_m, k);
    if (log.has_pos[k]) {
      put3(log.p_m, k);
      put3(log.m_m, k);
    } else {
      out << ",,,,,,";
    }
    if (log.inter_imu) put3(log.a_m2, k);
    if (log.has_truth) {
      put3(log.gt_p, k);
      put3(log.gt_v, k);
      put3(log.gt_rotvec, k);
      put3(log.gt_a, k);
      put3(log.gt_omega, k);
      put3(log.gt_b_a, k);
      put3(log.gt_b_w, k);
      if (log.inter_imu) {
        put3(log.gt_tau, k);
        put3(log.gt_b_a2, k);
      }
    }
    for (const auto& [name, values] : log.extra_columns)
      out << "," << (k < static_cast<long>(values.size()) ? values[k] : "");
    out << "\n";
  }
}

SensorLog read_sensor_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_sensor_log: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv(line)[0] != kVersionLine)
    throw std::runtime_error("read_sensor_log: missing '" + std::string(kVersionLine) +
                             "' version line");
  if (!std::getline(in, line)) throw std::runtime_error("read_sensor_log: missing header row");
  const std::vector<std::string> header = split_csv(line);

  auto col_index = [&](const std::string& name) -> int {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  auto require = [&](const std::string& name) {
    const int idx = col_index(name);
    if (idx < 0) throw std::runtime_error("read_sensor_log: missing column '" + name + "'");
    return idx;
  };

  SensorLog log;
  log.inter_imu = col_index("a_m2_x") >= 0;
  log.has_truth = col_index("gt_p_x") >= 0;

  std::vector<std::string> known{"t"};
  append_triplet(known, "omega_m");
  append_triplet(known, "a_m");
  append_triplet(known, "p_m");
  append_triplet(known, "m_m");
  if (log.inter_imu) append_triplet(known, "a_m2");
  if (log.has_truth) {
    append_triplet(known, "gt_p");
    append_triplet(known, "gt_v");
    append_triplet(known, "gt_att");
    append_triplet(known, "gt_a");
    append_triplet(known, "gt_omega");
    append_triplet(known, "gt_b_a");
    append_triplet(known, "gt_b_w");
    if (log.inter_imu) {
      append_triplet(known, "gt_tau");
      append_triplet(known, "gt_b_a2");
    }
  }
  std::vector<int> known_idx;
  for (const auto& name : known) known_idx.push_back(require(name));
  std::vector<int> extra_idx;
  for (size_t i = 0; i < header.size(); ++i) {
    bool is_known = false;
    for (int k : known_idx)
      if (k == static_cast<int>(i)) is_known = true;
    if (!is_known) {
      extra_idx.push_back(static_cast<int>(i));
      log.extra_columns.emplace_back(header[i], std::vector<std::string>{});
    }
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != header.size())
      throw std::runtime_error("read_sensor_log: row " + std::to_string(rows.size() + 1) +
                               " has " + std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    rows.push_back(std::move(fields));
  }
  const long n = static_cast<long>(rows.size());
  if (n == 0) throw std::runtime_error("read_sensor_log: no data rows");

  auto parse_cell = [&](long row, const std::string& col_name, const std::string& cell) {
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
      throw std::runtime_error("read_sensor_log: row " + std::to_string(row + 1) + " column '" +
                               col_name + "': cannot parse '" + cell + "'");
    return v;
  };

  log.t.resize(n);
  log.omega_m.resize(n, 3);
  log.a_m.resize(n, 3);
  log.p_m.setZero(n, 3);
  log.m_m.setZero(n, 3);
  log.has_pos.assign(n, 0);
  if (log.inter_imu) log.a_m2.resize(n, 3);
  if (log.has_truth) {
    log.gt_p.resize(n, 3);
    log.gt_v.resize(n, 3);
    log.gt_rotvec.resize(n, 3);
    log.gt_a.resize(n, 3);
    log.gt_omega.resize(n, 3);
    log.gt_b_a.resize(n, 3);
    log.gt_b_w.resize(n, 3);
    if (log.inter_imu) {
      log.gt_tau.resize(n, 3);
      log.gt_b_a2.resize(n, 3);
    }
  }

  for (long k = 0; k < n; ++k) {
    const auto& f = rows[k];
    size_t at = 0;  // walks known_idx in the same order `known` was built
    auto next_cell = [&]() -> const std::string& { return f[known_idx[at]]; };
    auto read1 = [&](double& dst) {
      dst = parse_cell(k, known[at], next_cell());
      ++at;
    };
    auto read3 = [&](MatrixX3& m) {
      for (int i = 0; i < 3; ++i) {
        m(k, i) = parse_cell(k, known[at], next_cell());
        ++at;
      }
    };
    double t = 0;
    read1(t);
    log.t(k) = t;
    read3(log.omega_m);
    read3(log.a_m);
    // p_m/m_m present all-or-none per row
    {
      bool any = false, all = true;
      for (int i = 0; i < 6; ++i) {
        const bool filled = !f[known_idx[at + i]].empty();
        any = any || filled;
        all = all && filled;
      }
      if (any && !all)
        throw std::runtime_error("read_sensor_log: row " + std::to_string(k + 1) +
                                 ": partial p_m/m_m group");
      if (any) {
        log.has_pos[k] = 1;
        read3(log.p_m);
        read3(log.m_m);
      } else {
        at += 6;
      }
    }
    if (log.inter_imu) read3(log.a_m2);
    if (log.has_truth) {
      read3(log.gt_p);
      read3(log.gt_v);
      read3(log.gt_rotvec);
      read3(log.gt_a);
      read3(log.gt_omega);
      read3(log.gt_b_a);
      read3(log.gt_b_w);
      if (log.inter_imu) {
        read3(log.gt_tau);
        read3(log.gt_b_a2);
      }
    }
    for (size_t e = 0; e < extra_idx.size(); ++e)
      log.extra_columns[e].second.push_back(f[extra_idx[e]]);

    if (k > 0 && log.t(k) <= log.t(k - 1))
      throw std::runtime_error("read_sensor_log: non-monotone timestamp at row " +
                               std::to_string(k + 1));
  }
  if (n >= 2) {
    log.imu_dt = log.t(1) - log.t(0);
    for (long k = 2; k < n; ++k)
      if (std::abs((log.t(k) - log.t(k - 1)) - log.imu_dt) > 1e-9 * std::max(1.0, log.t(k)))
        throw std::runtime_error("read_sensor_log: non-uniform timestamp step at row " +
                                 std::to_string(k + 1));
  }
  return log;
}

void write_kv_report(const std::string& path, const std::map<std::string, double>& kv,
                     const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_kv_report: cannot open '" + path + "'");
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  for (const auto& [k, v] : kv) out << k << " = " << format_double(v) << "\n";
}

}  // namespace kinestat
