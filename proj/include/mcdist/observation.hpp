#pragma once

#include <Eigen/Dense>

// Time-stamped molecule counts at the receiver from one realization.

namespace mcdist {

struct ObservationSeries {
  Eigen::ArrayXd times;   // strictly increasing, all > 0, seconds
  Eigen::ArrayXd counts;  // non-negative; integer-valued when produced by a simulator

  Eigen::Index size() const { return times.size(); }

  void validate() const;
};

}  // namespace mcdist
