#include "stressbasis/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sb {

QuadratureRule gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    rule.exactness = 2 * n - 1;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) { p1 = t; p0 = 1.0; }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        // final derivative at converged node
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        double w = 2.0 / ((1.0 - t * t) * dp * dp);
        rule.points[i] = -t;
        rule.points[n - 1 - i] = t;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.points[n / 2] = 0.0;
    return rule;
}

CompositeRule composite_rule(const std::vector<double>& edges, const QuadratureRule& ref)
{
    CompositeRule out;
    const std::size_t q = ref.points.size();
    out.x.reserve((edges.size() - 1) * q);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        double a = edges[e], b = edges[e + 1];
        double h = 0.5 * (b - a), c = 0.5 * (a + b);
        for (std::size_t k = 0; k < q; ++k) {
            out.x.push_back(c + h * ref.points[k]);
            out.w.push_back(h * ref.weights[k]);
            out.element.push_back(static_cast<int>(e));
        }
    }
    return out;
}

}  // namespace sb
