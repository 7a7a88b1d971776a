#pragma once

#include <cstdint>

#include "chy/grid.hpp"
#include "chy/metric.hpp"

namespace chy {

/// Real k-form on a grid chart. Components are stored against the ascending
/// coordinate basis e_I = e_{a1} ^ ... ^ e_{ak} (a1 < ... < ak), indexed by
/// the position of the bitmask I in form_masks(dim, k).
struct FormField {
    ChartPtr chart;
    int degree = 0;
    std::vector<std::vector<double>> comp;

    FormField() = default;
    FormField(ChartPtr c, int deg);
};

/// Ascending list of all degree-k bitmasks over `dim` coordinates.
const std::vector<std::uint32_t>& form_masks(int dim, int degree);
int form_index(int dim, int degree, std::uint32_t mask);

/// Sign of sorting e_A ^ e_B into ascending order; 0 if the masks overlap.
int merge_sign(std::uint32_t a, std::uint32_t b);

FormField wedge(const FormField& a, const FormField& b);
FormField wedge_power(const FormField& a, int k);

/// Spectral exterior derivative.
FormField exterior_derivative(const FormField& a);

/// Action of the complex structure on forms, (J alpha)(v...) = alpha(Jv...).
/// On the coordinate basis J dx^j = -dy^j, J dy^j = dx^j.
FormField apply_complex_structure(const FormField& a);

/// The fundamental (1,1)-form of a Hermitian metric as a real 2-form:
///   omega(x_i, x_j) = omega(y_i, y_j) = -2 Im h_{i jbar},
///   omega(x_i, y_j) = 2 Re h_{i jbar}.
FormField metric_two_form(const HermitianMetricField& h);

/// i del delbar alpha = -(1/2) d J d alpha for J-invariant alpha (real
/// (p,p)-forms); this is the only case the library needs.
FormField i_del_delbar(const FormField& a);

/// Pointwise multiplication of every component by a scalar field.
FormField scale_form(const FormField& a, const ScalarField& s);

/// L2 norm of the coefficient fields against Lebesgue cell measure.
double l2_norm(const FormField& a);

} // namespace chy
