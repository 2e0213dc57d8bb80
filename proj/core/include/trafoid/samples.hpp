#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trafoid/model.hpp"

namespace trafoid {

//! n observations (Y_i, X_i); covariates stored row-major.
class SampleSet
{
public:
  SampleSet() = default;
  SampleSet(std::size_t dim, std::vector<double> y, std::vector<double> x);

  std::size_t size() const { return y_.size(); }
  std::size_t dim() const { return dim_; }
  double y(std::size_t i) const { return y_[i]; }
  std::span<const double> x(std::size_t i) const { return { x_.data() + i * dim_, dim_ }; }
  std::span<const double> ys() const { return y_; }
  std::span<const double> xs() const { return x_; }

  //! Throws DomainError on non-finite entries.
  void check_finite() const;

private:
  std::size_t dim_ = 1;
  std::vector<double> y_;
  std::vector<double> x_;
};

struct SimulationOptions
{
  //! Covariate law: uniform on this box; defaults to the weight support.
  std::optional<Box> covariate_box;
};

/*
 * Draws Y_i = h^{-1}(g(X_i) + sigma(X_i) eps_i) with X_i uniform on the
 * covariate box and eps_i from the error law by inversion. Bit-identical
 * for a given seed.
 */
SampleSet simulate(const TransformationModel& model, std::size_t n, std::uint64_t seed,
                   const Box& covariate_box);

//! CSV with header y,x1,...,xd and 17 significant digits.
std::string samples_to_csv(const SampleSet& samples);
SampleSet samples_from_csv(const std::string& text);
SampleSet read_samples_csv(const std::filesystem::path& path);

//! Shared 17-significant-digit formatting used by every CSV writer.
std::string format_double(double v);

//! 52-bit uniform in (0, 1) from a 64-bit engine output; the largest value is 1 - 2^-53.
inline double to_open_unit(std::uint64_t bits)
{
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

//! SplitMix64 finaliser; used to derive independent per-cell seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace trafoid
