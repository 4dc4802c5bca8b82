#pragma once

#include <functional>

#include "gensep/mat.hpp"

namespace gensep {

// Central-difference gradient of a scalar function of a matrix:
// (f(x + h e_i) - f(x - h e_i)) / (2h) per entry. Test-side oracle for
// every analytic gradient in this library; deliberately independent of
// the backward passes it checks.
Mat finite_diff_grad(const std::function<double(const Mat&)>& f, const Mat& x,
                     double h = 1e-5);

// ||a - b||_2 / max(||a||_2, ||b||_2, 1e-12). Gradient-check distance.
double grad_rel_error(const Mat& a, const Mat& b);

}  // namespace gensep
