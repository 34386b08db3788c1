#include "gncbench/sim/noise.hpp"

#include "gncbench/common/table.hpp"

#include <fstream>
#include <sstream>

namespace gncbench {

namespace {

template <int N>
void check_covariance(const Eigen::Matrix<double, N, N>& m, const char* name) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument(std::string(name) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(m);
  if (eig.eigenvalues().minCoeff() < -1e-9)
    throw std::invalid_argument(std::string(name) + " is not positive semidefinite");
}

template <int N>
void write_matrix(std::ostream& out, const char* name, const Eigen::Matrix<double, N, N>& m) {
  out << name << ' ' << N << ' ' << N << '\n';
  for (int r = 0; r < N; ++r) {
    for (int c = 0; c < N; ++c) {
      if (c) out << ' ';
      out << format_number(m(r, c));
    }
    out << '\n';
  }
}

template <int N>
Eigen::Matrix<double, N, N> read_matrix(std::istream& in, const std::string& name) {
  std::string tag;
  int rows = 0;
  int cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != name || rows != N || cols != N)
    throw FormatError("expected header '" + name + " " + std::to_string(N) + " " +
                      std::to_string(N) + "'");
  Eigen::Matrix<double, N, N> m;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) {
      std::string tok;
      if (!(in >> tok)) throw FormatError("truncated " + name + " matrix");
      std::istringstream ss(tok);
      ss.imbue(std::locale::classic());
      if (!(ss >> m(r, c))) throw FormatError("bad number in " + name + ": " + tok);
    }
  return m;
}

}  // namespace

void NoiseModel::validate() const {
  check_covariance<3>(q_meas, "Q");
  check_covariance<6>(r_model, "R");
}

void write_noise(std::ostream& out, const NoiseModel& noise) {
  write_matrix<3>(out, "Q", noise.q_meas);
  write_matrix<6>(out, "R", noise.r_model);
}

NoiseModel read_noise(std::istream& in) {
  NoiseModel n;
  n.q_meas = read_matrix<3>(in, "Q");
  n.r_model = read_matrix<6>(in, "R");
  n.validate();
  return n;
}

void save_noise(const std::filesystem::path& path, const NoiseModel& noise) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_noise(out, noise);
}

NoiseModel load_noise(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_noise(in);
}

}  // namespace gncbench
