#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sqc {

/// A point or direction in R^n. Gradients live here too: the pairing with a
/// direction is always the dot product.
using Vec = std::vector<double>;

enum class Norm { L1, L2, Linf };

Norm parse_norm(std::string_view text);
std::string to_string(Norm p);

double inner(const Vec& a, const Vec& b);
double pnorm(const Vec& a, Norm p = Norm::L2);

/// lambda*x + (1-lambda)*y; the endpoints lambda = 1 and 0 return x and y exactly.
Vec segment_point(const Vec& x, const Vec& y, double lambda);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);

bool all_finite(const Vec& a);
void require_same_dim(const Vec& a, const Vec& b);

}  // namespace sqc
