#pragma once

#include <Eigen/Core>

namespace slicearena {

/// (cpu cores, memory GB, storage GB). Componentwise arithmetic comes from Eigen.
using ResourceVector = Eigen::Array3d;

enum ResourceIndex : Eigen::Index { kCpu = 0, kMemory = 1, kStorage = 2 };

inline ResourceVector make_resources(double cpu, double memory, double storage) {
  return ResourceVector(cpu, memory, storage);
}

/// True iff `demand` fits into `available` in every component.
template <typename DerivedA, typename DerivedB>
bool fits(const Eigen::ArrayBase<DerivedA>& available, const Eigen::ArrayBase<DerivedB>& demand) {
  return (available >= demand).all();
}

template <typename Derived>
bool non_negative(const Eigen::ArrayBase<Derived>& v) {
  return (v >= 0.0).all();
}

} // namespace slicearena
