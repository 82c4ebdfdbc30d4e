#pragma once

#include <doctest.h>

#include <Eigen/Dense>

#include "coolsim/error.hpp"

namespace test {

inline double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Kind of the coolsim::Error thrown by f; fails the test if nothing is thrown.
template <typename F>
coolsim::ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const coolsim::Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return coolsim::ErrorKind::config;
}

}  // namespace test
