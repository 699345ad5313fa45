#pragma once

// Low-discrepancy sample clouds for balls, built on the Sobol sequence.

#include "polyflow/lattice.hpp"

#include <boost/random/sobol.hpp>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace polyflow {

/// Points of [0,1)^dim; `skip` drops a prefix of the sequence so different
/// seeds give different but still deterministic clouds.
inline std::vector<std::vector<double>> sobol_points(int dim, std::size_t n, std::uint64_t skip = 0)
{
    boost::random::sobol gen(static_cast<std::size_t>(dim));
    gen.discard(static_cast<boost::uintmax_t>(skip + 1) * dim);  // the first point is the origin
    const double scale = 1.0 / (static_cast<double>(gen.max() - gen.min()) + 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& p : out)
        for (auto& x : p) x = static_cast<double>(gen() - gen.min()) * scale;
    return out;
}

/// n offsets inside the open ball of the given radius (x, y only when dim == 2).
inline std::vector<Vec3<double>> ball_offsets(int dim, double radius, std::size_t n, std::uint64_t skip = 0)
{
    if (radius <= 0) throw std::invalid_argument("radius must be positive");
    std::vector<Vec3<double>> out;
    out.reserve(n);
    std::uint64_t drawn = skip;
    while (out.size() < n) {
        const std::size_t batch = 2 * (n - out.size()) + 16;
        for (const auto& p : sobol_points(dim, batch, drawn)) {
            Vec3<double> q{0, 0, 0};
            double r2 = 0;
            for (int i = 0; i < dim; ++i) {
                q[i] = 2 * p[i] - 1;
                r2 += q[i] * q[i];
            }
            if (r2 >= 1) continue;
            for (auto& c : q) c *= radius;
            out.push_back(q);
            if (out.size() == n) break;
        }
        drawn += batch;
    }
    return out;
}

}  // namespace polyflow
