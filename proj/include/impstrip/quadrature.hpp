#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "impstrip/special.hpp"

namespace impstrip::quad {

struct Rule {
    std::vector<double> x;
    std::vector<double> w;
};

inline void append_panel(Rule& r, const special::GaussRule& g, double lo, double hi) {
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        r.x.push_back(mid + half * g.x[i]);
        r.w.push_back(half * g.w[i]);
    }
}

// Split [lo, hi] into pieces no wider than max_width and append.
inline void append_capped(Rule& r, const special::GaussRule& g, double lo, double hi, double max_width) {
    if (!(hi > lo)) return;
    const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_width)));
    const double h = (hi - lo) / pieces;
    for (int p = 0; p < pieces; ++p) append_panel(r, g, lo + p * h, p + 1 == pieces ? hi : lo + (p + 1) * h);
}

// Composite rule on [lo, hi] with panels halving geometrically toward the
// point c (clamped to the interval) down to width h_min.
inline Rule graded(double lo, double hi, double c, double h_min, double max_width, int nodes = 16) {
    const auto g = special::gauss_legendre(nodes);
    Rule r;
    c = std::clamp(c, lo, hi);
    h_min = std::max(h_min, 1e-15 * (hi - lo));
    auto side = [&](double from, double to) {
        // from = c end, to = far end
        const double len = std::abs(to - from);
        if (len <= 0.0) return;
        const double dir = to > from ? 1.0 : -1.0;
        std::vector<double> br{0.0};
        double h = h_min;
        while (br.back() + h < len) {
            br.push_back(br.back() + h);
            h *= 2.0;
        }
        br.push_back(len);
        for (std::size_t i = 0; i + 1 < br.size(); ++i) {
            double a0 = from + dir * br[i], a1 = from + dir * br[i + 1];
            if (a0 > a1) std::swap(a0, a1);
            append_capped(r, g, a0, a1, max_width);
        }
    };
    side(c, lo);
    side(c, hi);
    return r;
}

inline Rule uniform(double lo, double hi, double max_width, int nodes = 16) {
    const auto g = special::gauss_legendre(nodes);
    Rule r;
    append_capped(r, g, lo, hi, max_width);
    return r;
}

}  // namespace impstrip::quad
