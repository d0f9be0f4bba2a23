#pragma once

#include "mcpert/chain.hpp"

namespace mcpert {

/// sum_i |mu(i)|.
double total_variation_norm(const RowVector& mu);

/// sum_i |mu(i)| V(i).
double v_norm_measure(const RowVector& mu, const WeightFunction& v);
/// sup_i |x(i)| / V(i).
double v_norm_vector(const Vector& x, const WeightFunction& v);
/// sup_i V(i)^{-1} sum_j |L(i,j)| V(j).
double v_norm_matrix(const Matrix& l, const WeightFunction& v);

/// V-norm with V == 1: the maximum absolute row sum.
double matrix_norm(const Matrix& l);

/// Lambda_1(B) = 1/2 max_{i,j} sum_k |B(i,k) - B(j,k)|.
double ergodicity_coefficient(const Matrix& b);

}  // namespace mcpert
