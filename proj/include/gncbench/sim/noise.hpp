#pragma once

#include "gncbench/dynamics/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <random>

namespace gncbench {

using Rng = std::mt19937_64;

/// Sensor covariance Q (ax, ay, gyro) and model covariance R over the filter
/// state (vx, vy, vpsi, ax, ay, apsi). R is a continuous-time intensity: the
/// filter adds R * dt per prediction step.
struct NoiseModel {
  Mat3 q_meas = Mat3::Zero();
  Mat6 r_model = Mat6::Zero();

  /// Throws std::invalid_argument unless both matrices are symmetric within
  /// 1e-9 and have no eigenvalue below -1e-9.
  void validate() const;
};

/// Draws zero-mean Gaussian vectors with a given (possibly singular) covariance.
template <int N>
class GaussianSampler {
 public:
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  explicit GaussianSampler(const Mat& covariance) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (covariance + covariance.transpose()));
    factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    zero_ = covariance.isZero(0.0);
  }

  Vec draw(Rng& rng) const {
    if (zero_) return Vec::Zero();
    Vec z;
    for (int i = 0; i < N; ++i) z(i) = normal_(rng);
    return factor_ * z;
  }

  bool is_zero() const { return zero_; }

 private:
  Mat factor_;
  bool zero_ = true;
  mutable std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Text form: "Q 3 3" followed by three rows, then "R 6 6" and six rows.
void write_noise(std::ostream& out, const NoiseModel& noise);
NoiseModel read_noise(std::istream& in);
void save_noise(const std::filesystem::path& path, const NoiseModel& noise);
NoiseModel load_noise(const std::filesystem::path& path);

}  // namespace gncbench
