#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace trafoid::numerics {

//! Least-squares nondecreasing fit (pool-adjacent-violators, unit weights).
inline std::vector<double> isotonic_increasing(std::span<const double> values)
{
  struct Block
  {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({ v, 1 });
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks)
    out.insert(out.end(), b.count, b.mean());
  return out;
}

} // namespace trafoid::numerics
