#include "trafoid/samples.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "trafoid/error.hpp"

namespace trafoid {

SampleSet::SampleSet(std::size_t dim, std::vector<double> y, std::vector<double> x)
  : dim_(dim)
  , y_(std::move(y))
  , x_(std::move(x))
{
  if (dim_ == 0)
    throw DomainError("sample covariate dimension must be positive");
  if (x_.size() != y_.size() * dim_)
    throw DomainError("sample covariate block does not match n * d");
}

void SampleSet::check_finite() const
{
  for (std::size_t i = 0; i < size(); ++i) {
    bool ok = std::isfinite(y_[i]);
    for (double v : x(i))
      ok = ok && std::isfinite(v);
    if (!ok) {
      std::ostringstream msg;
      msg << "sample row " << i + 1 << " contains a non-finite entry";
      throw DomainError(msg.str());
    }
  }
}

SampleSet simulate(const TransformationModel& model, std::size_t n, std::uint64_t seed,
                   const Box& covariate_box)
{
  if (n == 0)
    throw DomainError("simulation needs n >= 1");
  if (covariate_box.dim() != model.dim())
    throw DomainError("covariate box dimension does not match the model");

  std::mt19937_64 gen(seed);
  const std::size_t d = model.dim();
  std::vector<double> y(n);
  std::vector<double> x(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> xi(x.data() + i * d, d);
    for (std::size_t k = 0; k < d; ++k)
      xi[k] = covariate_box.lower[k] +
              to_open_unit(gen()) * (covariate_box.upper[k] - covariate_box.lower[k]);
    const double eps = model.error().quantile(to_open_unit(gen()));
    const double z = model.g(xi) + model.sigma(xi) * eps;
    try {
      y[i] = model.h_inverse(z);
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << "simulation row " << i + 1 << ": " << e.what();
      throw NumericalError(msg.str());
    }
  }
  return SampleSet(d, std::move(y), std::move(x));
}

std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string samples_to_csv(const SampleSet& samples)
{
  std::string out = "y";
  for (std::size_t k = 0; k < samples.dim(); ++k)
    out += ",x" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += format_double(samples.y(i));
    for (double v : samples.x(i)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

SampleSet samples_from_csv(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw IoError("sample CSV is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();

  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ','))
      header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "y")
    throw IoError("sample CSV header must be y,x1,...,xd");
  for (std::size_t k = 1; k < header.size(); ++k)
    if (header[k] != "x" + std::to_string(k))
      throw IoError("sample CSV header column " + std::to_string(k + 1) + " must be x" +
                    std::to_string(k));
  const std::size_t d = header.size() - 1;

  std::vector<double> y;
  std::vector<double> x;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw IoError("sample CSV line " + std::to_string(row) + ": cannot parse '" + cell + "'");
      (col == 0 ? y : x).push_back(v);
      ++col;
    }
    if (col != d + 1)
      throw IoError("sample CSV line " + std::to_string(row) + ": expected " +
                    std::to_string(d + 1) + " fields");
  }
  SampleSet s(d, std::move(y), std::move(x));
  s.check_finite();
  return s;
}

SampleSet read_samples_csv(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open sample file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return samples_from_csv(buf.str());
}

} // namespace trafoid
