// Gauss-Hermite quadrature nodes/weights (weight exp(-t^2)).
//
// Nodes are found by Newton iteration on the Hermite recurrence; for the
// orders used here (<= 128) this converges to full double precision and
// needs no external tables.

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pcm/common.hpp"

namespace pcm {

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussHermite gauss_hermite(int n) {
    require(n >= 1 && n <= 256, "gauss_hermite: order out of range");
    GaussHermite q;
    q.nodes.assign(n, 0.0);
    q.weights.assign(n, 0.0);
    const double pim4 = 0.7511255444649425; // pi^{-1/4}
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * q.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * q.nodes[1];
        } else {
            z = 2.0 * z - q.nodes[i - 2];
        }
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        q.nodes[i] = z;
        q.nodes[n - 1 - i] = -z;
        q.weights[i] = 2.0 / (pp * pp);
        q.weights[n - 1 - i] = q.weights[i];
    }
    // Descending nodes from the recurrence; order is irrelevant to the sums.
    return q;
}

// The 64-node rule used for all channel-capacity integrals.
inline const GaussHermite& gh64() {
    static const GaussHermite q = gauss_hermite(64);
    return q;
}

} // namespace pcm
