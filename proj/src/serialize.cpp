#include "wlqc/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace wlqc::io {

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw SolverError(ErrorCode::BadDataFile, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw SolverError(ErrorCode::BadDataFile, "cannot write " + path);
  out << content;
}

namespace {

void append_matrix(std::ostringstream& os, const std::string& name,
                   const Eigen::MatrixXd& m) {
  os << name << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << " ";
      os << fmt17(m(i, j));
    }
    os << "\n";
  }
}

void append_vector(std::ostringstream& os, const std::string& name,
                   const Eigen::VectorXd& v) {
  os << name << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << " ";
    os << fmt17(v(i));
  }
  os << "\n";
}

}  // namespace

std::string dump_finite(const finite_horizon::FiniteSolution& sol, int n,
                        int m, int k) {
  std::ostringstream os;
  os << "wlqc-solution finite\n";
  os << "n " << n << " m " << m << " k " << k << "\n";
  os << "T " << sol.horizon() << "\n";
  os << "lambda " << fmt17(sol.lambda) << "\n";
  os << "assumption_margin " << fmt17(sol.assumption_margin) << "\n";
  for (int t = 0; t <= sol.horizon(); ++t) {
    const auto& v = sol.values[static_cast<size_t>(t)];
    os << "stage " << t << "\n";
    append_matrix(os, "P", v.P);
    append_vector(os, "r", v.r);
    os << "z\n" << fmt17(v.z) << "\n";
    if (t < sol.horizon()) {
      const auto& p = sol.policies[static_cast<size_t>(t)];
      append_matrix(os, "K", p.K);
      append_vector(os, "L", p.L);
    }
  }
  return os.str();
}

std::string dump_steady(const infinite_horizon::SteadySolution& sol, int n,
                        int m, int k) {
  std::ostringstream os;
  os << "wlqc-solution steady\n";
  os << "n " << n << " m " << m << " k " << k << "\n";
  os << "lambda " << fmt17(sol.lambda) << "\n";
  os << "method "
     << (sol.method == infinite_horizon::Method::FixedPoint  ? "fixed-point"
         : sol.method == infinite_horizon::Method::Eigen     ? "eigen"
         : sol.method == infinite_horizon::Method::Both      ? "both"
                                                             : "lqg")
     << "\n";
  append_matrix(os, "P", sol.P);
  append_vector(os, "r", sol.r);
  os << "rho\n" << fmt17(sol.rho) << "\n";
  append_matrix(os, "K", sol.K);
  append_vector(os, "L", sol.L);
  os << "penalty_margin " << fmt17(sol.penalty_margin) << "\n";
  os << "are_residual " << fmt17(sol.are_residual) << "\n";
  os << "closed_loop_spectral_radius "
     << fmt17(sol.closed_loop_spectral_radius) << "\n";
  os << "mean_state_gain_radius " << fmt17(sol.mean_state_gain_radius) << "\n";
  return os.str();
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : columns_(header.size()) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ",";
    body_ += header[i];
  }
  body_ += "\n";
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw SolverError(ErrorCode::BadDataFile, "CSV row width mismatch");
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ",";
    body_ += cells[i];
  }
  body_ += "\n";
}

}  // namespace wlqc::io
