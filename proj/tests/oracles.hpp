#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They favour obviousness over speed and share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mvr/core/grid.hpp"
#include "mvr/core/rng.hpp"

namespace oracle {

inline mvr::BinaryMask random_mask(mvr::Rng& rng, int h, int w, double density) {
    mvr::BinaryMask m(h, w);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) m.set(r, c, rng.uniform() < density);
    }
    return m;
}

/// Random blob-ish mask: a few random rectangles plus salt noise.
inline mvr::BinaryMask random_shape(mvr::Rng& rng, int h, int w) {
    mvr::BinaryMask m(h, w);
    const int boxes = 1 + static_cast<int>(rng.below(3));
    for (int b = 0; b < boxes; ++b) {
        const int r0 = static_cast<int>(rng.below(static_cast<std::size_t>(h)));
        const int c0 = static_cast<int>(rng.below(static_cast<std::size_t>(w)));
        const int r1 = std::min(h, r0 + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(h / 2 + 1))));
        const int c1 = std::min(w, c0 + 1 + static_cast<int>(rng.below(static_cast<std::size_t>(w / 2 + 1))));
        for (int r = r0; r < r1; ++r) {
            for (int c = c0; c < c1; ++c) m.set(r, c, true);
        }
    }
    for (int k = 0; k < h * w / 40; ++k) {
        m.set(static_cast<int>(rng.below(static_cast<std::size_t>(h))),
              static_cast<int>(rng.below(static_cast<std::size_t>(w))), rng.uniform() < 0.5);
    }
    return m;
}

inline bool fg(const mvr::BinaryMask& m, int r, int c) {
    return r >= 0 && c >= 0 && r < m.height() && c < m.width() && m(r, c) != 0;
}

inline std::vector<std::array<int, 2>> boundary(const mvr::BinaryMask& m) {
    std::vector<std::array<int, 2>> out;
    for (int r = 0; r < m.height(); ++r) {
        for (int c = 0; c < m.width(); ++c) {
            if (!fg(m, r, c)) continue;
            if (!fg(m, r - 1, c) || !fg(m, r + 1, c) || !fg(m, r, c - 1) || !fg(m, r, c + 1)) out.push_back({r, c});
        }
    }
    return out;
}

using Volume = std::vector<mvr::BinaryMask>;

inline bool fg(const Volume& v, int z, int r, int c) {
    return z >= 0 && z < static_cast<int>(v.size()) && fg(v[static_cast<std::size_t>(z)], r, c);
}

inline std::vector<std::array<int, 3>> boundary(const Volume& v) {
    std::vector<std::array<int, 3>> out;
    for (int z = 0; z < static_cast<int>(v.size()); ++z) {
        const auto& s = v[static_cast<std::size_t>(z)];
        for (int r = 0; r < s.height(); ++r) {
            for (int c = 0; c < s.width(); ++c) {
                if (!fg(v, z, r, c)) continue;
                if (!fg(v, z - 1, r, c) || !fg(v, z + 1, r, c) || !fg(v, z, r - 1, c) || !fg(v, z, r + 1, c) ||
                    !fg(v, z, r, c - 1) || !fg(v, z, r, c + 1)) {
                    out.push_back({z, r, c});
                }
            }
        }
    }
    return out;
}

/// Inclusive linear interpolation: rank = q/100 * (n - 1).
inline double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double rank = q / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

template <std::size_t D>
double hd95_all_pairs(const std::vector<std::array<int, D>>& a, const std::vector<std::array<int, D>>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    auto directed = [](const auto& from, const auto& to, std::vector<double>& out) {
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) {
                double s = 0.0;
                for (std::size_t d = 0; d < D; ++d) s += static_cast<double>((p[d] - q[d]) * (p[d] - q[d]));
                best = std::min(best, std::sqrt(s));
            }
            out.push_back(best);
        }
    };
    std::vector<double> pooled;
    directed(a, b, pooled);
    directed(b, a, pooled);
    return percentile(pooled, 95.0);
}

inline double hd95(const mvr::BinaryMask& a, const mvr::BinaryMask& b) {
    return hd95_all_pairs(boundary(a), boundary(b));
}

inline double hd95(const Volume& a, const Volume& b) { return hd95_all_pairs(boundary(a), boundary(b)); }

inline double entropy(double p, double eps) { return -p * std::log(p + eps) - (1 - p) * std::log(1 - p + eps); }

/// Direct per-pixel routing loop.
inline mvr::ProbabilityMap fuse(const mvr::ProbabilityMap& lo, const mvr::ProbabilityMap& hi, double tau,
                                double eps) {
    mvr::Grid<float> out(lo.height(), lo.width());
    for (int r = 0; r < lo.height(); ++r) {
        for (int c = 0; c < lo.width(); ++c) {
            const double h = entropy(lo(r, c), eps);
            out(r, c) = h > tau ? hi(r, c) : lo(r, c);
        }
    }
    return mvr::ProbabilityMap(out);
}

/// Literal O(N^2) binary mean field with explicit kernel evaluation per pair,
/// written from the update rule rather than from the library's code.
struct CrfParams {
    double wg, sg, wb, sxy, srgb;
    int iterations;
};

inline mvr::RealGrid mean_field(const mvr::ProbabilityMap& p, const std::vector<float>& rgb, const CrfParams& k) {
    const int h = p.height();
    const int w = p.width();
    const int n = h * w;
    std::vector<double> u1(n), u0(n), q(n);
    for (int i = 0; i < n; ++i) {
        const double pc = std::clamp(static_cast<double>(p[static_cast<std::size_t>(i)]), 1e-6, 1.0 - 1e-6);
        u1[i] = -std::log(pc);
        u0[i] = -std::log(1.0 - pc);
        q[i] = std::exp(-u1[i]) / (std::exp(-u1[i]) + std::exp(-u0[i]));
    }
    std::vector<double> kernel(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double dy = i / w - j / w;
            const double dx = i % w - j % w;
            const double d2 = dy * dy + dx * dx;
            double c2 = 0.0;
            for (int ch = 0; ch < 3; ++ch) {
                const double dc = rgb[static_cast<std::size_t>(i) * 3 + ch] - rgb[static_cast<std::size_t>(j) * 3 + ch];
                c2 += dc * dc;
            }
            kernel[static_cast<std::size_t>(i) * n + j] =
                k.wg * std::exp(-d2 / (2 * k.sg * k.sg)) +
                k.wb * std::exp(-d2 / (2 * k.sxy * k.sxy) - c2 / (2 * k.srgb * k.srgb));
        }
    }
    for (int it = 0; it < k.iterations; ++it) {
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) {
            // Potts: a label pays the kernel mass of neighbours holding the other label.
            double pay1 = 0.0;
            double pay0 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double kij = kernel[static_cast<std::size_t>(i) * n + j];
                pay1 += kij * (1.0 - q[j]);
                pay0 += kij * q[j];
            }
            const double e1 = -u1[i] - pay1;
            const double e0 = -u0[i] - pay0;
            const double m = std::max(e1, e0);
            next[i] = std::exp(e1 - m) / (std::exp(e1 - m) + std::exp(e0 - m));
        }
        q = next;
    }
    return mvr::RealGrid(h, w, q);
}

/// Half-pixel-centre bilinear sample of a row-major grid at output pixel (r, c).
inline double bilinear_at(const std::vector<double>& g, int in_h, int in_w, int out_h, int out_w, int r, int c) {
    auto coord = [](int dst, int in, int out) {
        const double s = (dst + 0.5) * static_cast<double>(in) / out - 0.5;
        return std::clamp(s, 0.0, static_cast<double>(in - 1));
    };
    const double y = coord(r, in_h, out_h);
    const double x = coord(c, in_w, out_w);
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const int y1 = std::min(y0 + 1, in_h - 1);
    const int x1 = std::min(x0 + 1, in_w - 1);
    const double fy = y - y0;
    const double fx = x - x0;
    auto at = [&](int yy, int xx) { return g[static_cast<std::size_t>(yy) * in_w + xx]; };
    return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) + fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
}

/// Per-sample BCE + lambda * soft Dice for a probe given as flat parameters
/// [w1 | b1 | w2 | b2], averaged over the batch. Also reports the smallest
/// |hidden pre-activation| seen, so callers can avoid ReLU kinks.
struct ProbeSample {
    int gh, gw, channels;
    std::vector<double> features;  // gh * gw * channels
    int mh, mw;
    std::vector<int> mask;         // mh * mw
};

inline double probe_loss(const std::vector<double>& theta, int in, int hidden, const std::vector<ProbeSample>& batch,
                         double lambda, double eps, double* min_abs_pre = nullptr) {
    const double* w1 = theta.data();
    const double* b1 = w1 + static_cast<std::size_t>(in) * hidden;
    const double* w2 = b1 + hidden;
    const double b2 = theta.back();
    double total = 0.0;
    for (const auto& s : batch) {
        std::vector<double> logits(static_cast<std::size_t>(s.gh) * s.gw);
        for (int p = 0; p < s.gh * s.gw; ++p) {
            double a = b2;
            for (int j = 0; j < hidden; ++j) {
                double z = b1[j];
                for (int k = 0; k < in; ++k) z += s.features[static_cast<std::size_t>(p) * in + k] * w1[k * hidden + j];
                if (min_abs_pre) *min_abs_pre = std::min(*min_abs_pre, std::abs(z));
                a += w2[j] * std::max(z, 0.0);
            }
            logits[static_cast<std::size_t>(p)] = a;
        }
        const int n = s.mh * s.mw;
        double bce = 0.0, inter = 0.0, psum = 0.0, ysum = 0.0;
        for (int r = 0; r < s.mh; ++r) {
            for (int c = 0; c < s.mw; ++c) {
                const double z = bilinear_at(logits, s.gh, s.gw, s.mh, s.mw, r, c);
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double y = s.mask[static_cast<std::size_t>(r) * s.mw + c];
                const double pc = std::clamp(p, 1e-7, 1.0 - 1e-7);
                bce -= y * std::log(pc) + (1 - y) * std::log(1 - pc);
                inter += p * y;
                psum += p;
                ysum += y;
            }
        }
        total += bce / n + lambda * (1.0 - (2.0 * inter + eps) / (psum + ysum + eps));
    }
    return total / static_cast<double>(batch.size());
}

}  // namespace oracle
