#pragma once

#include <vector>

namespace sb {

/// \brief Gauss rule on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
    int exactness = 0;  // highest polynomial degree integrated exactly
};

QuadratureRule gauss_legendre(int n);

/// Composite rule over consecutive intervals [edges[k], edges[k+1]].
struct CompositeRule {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<int> element;
};

CompositeRule composite_rule(const std::vector<double>& edges, const QuadratureRule& ref);

}  // namespace sb
