#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace zrp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define ZRP_DEFINE_ERROR(Name)          \
  struct Name : Error {                 \
    using Error::Error;                 \
  }

// graph-model
ZRP_DEFINE_ERROR(NotIrreducible);
ZRP_DEFINE_ERROR(NotReversible);
ZRP_DEFINE_ERROR(InvalidMeasure);
ZRP_DEFINE_ERROR(OverlappingSets);

// configuration spaces
ZRP_DEFINE_ERROR(IndexOutOfRange);
ZRP_DEFINE_ERROR(EmptySource);
ZRP_DEFINE_ERROR(SpaceTooLarge);

// scales and partitions
ZRP_DEFINE_ERROR(DegenerateScale);
ZRP_DEFINE_ERROR(WellsOverlap);

// solvers
ZRP_DEFINE_ERROR(SolverDiverged);
ZRP_DEFINE_ERROR(InsufficientWells);
ZRP_DEFINE_ERROR(DegenerateRange);

// test functions
ZRP_DEFINE_ERROR(EpsilonOutOfRange);
ZRP_DEFINE_ERROR(ConstraintViolated);

// simulation
ZRP_DEFINE_ERROR(HorizonZero);
ZRP_DEFINE_ERROR(NeverInA);
ZRP_DEFINE_ERROR(NeverInWells);
ZRP_DEFINE_ERROR(TooFewTransitions);

#undef ZRP_DEFINE_ERROR

// Compensated accumulator. Summation order is fixed by the caller, so results
// are deterministic run to run.
class KahanSum {
 public:
  void add(double x) {
    double y = x - carry_;
    double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace zrp
