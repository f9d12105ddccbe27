#pragma once

// Brute-force reference implementations. Everything here works from raw
// coefficients and explicit point lists and shares no code paths with the
// library's enumeration kernels.

#include <complex>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rankforge/forms.hpp"
#include "rankforge/shape.hpp"

namespace oracle {

using rankforge::FVec;
using rankforge::Residue;

inline std::vector<FVec> all_vectors(std::uint32_t p, std::size_t n) {
    std::vector<FVec> out{FVec(n, 0)};
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<FVec> next;
        for (const FVec& v : out) {
            for (Residue d = 0; d < p; ++d) {
                FVec w = v;
                w[j] = d;
                next.push_back(w);
            }
        }
        out = std::move(next);
    }
    return out;
}

// All points of the shape in row-major order with x_1 slowest.
inline std::vector<std::vector<FVec>> all_points(const rankforge::Shape& shape) {
    std::vector<std::vector<FVec>> out{{}};
    for (std::size_t i = 0; i < shape.arity(); ++i) {
        const auto vs = all_vectors(shape.p(), shape.dim(i));
        std::vector<std::vector<FVec>> next;
        for (const auto& x : out) {
            for (const auto& v : vs) {
                auto y = x;
                y.push_back(v);
                next.push_back(std::move(y));
            }
        }
        out = std::move(next);
    }
    return out;
}

// Sum over all coefficient positions of coeff * prod_i w_i[j_i], where w_i
// has length ext[i] and ext has one extra trailing output axis.
inline FVec expand(std::uint32_t p, std::span<const Residue> coeffs, const std::vector<std::size_t>& ext,
                   const std::vector<FVec>& w) {
    const std::size_t k = ext.size() - 1;
    const std::size_t m = ext.back();
    std::vector<std::uint64_t> acc(m, 0);
    std::vector<std::size_t> idx(ext.size(), 0);
    for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t a = ext.size(); a-- > 0;) {
            idx[a] = rest % ext[a];
            rest /= ext[a];
        }
        std::uint64_t term = coeffs[flat];
        for (std::size_t i = 0; i < k && term != 0; ++i) term = term * w[i][idx[i]] % p;
        acc[idx[k]] = (acc[idx[k]] + term) % p;
    }
    return {acc.begin(), acc.end()};
}

inline FVec eval(const rankforge::MultilinearMap& f, const std::vector<FVec>& x) {
    std::vector<std::size_t> ext(f.shape().dims().begin(), f.shape().dims().end());
    ext.push_back(f.target_dim());
    return expand(f.p(), f.coeffs(), ext, x);
}

inline FVec eval(const rankforge::MultiaffineMap& f, const std::vector<FVec>& x) {
    std::vector<std::size_t> ext;
    std::vector<FVec> w;
    for (std::size_t i = 0; i < f.arity(); ++i) {
        ext.push_back(f.shape().dim(i) + 1);
        FVec h = x[i];
        h.push_back(1);
        w.push_back(h);
    }
    ext.push_back(f.target_dim());
    return expand(f.p(), f.homogenized(), ext, w);
}

template <class Map>
std::vector<std::uint64_t> histogram(const Map& f) {
    std::vector<std::uint64_t> counts(f.p(), 0);
    for (const auto& x : all_points(f.shape())) ++counts[eval(f, x)[0]];
    return counts;
}

inline std::complex<double> chi(std::uint32_t p, Residue t) {
    return std::polar(1.0, 2.0 * 3.14159265358979323846 * t / p);
}

template <class Map>
std::complex<double> bias(const Map& f) {
    std::complex<double> acc = 0;
    const auto pts = all_points(f.shape());
    for (const auto& x : pts) acc += chi(f.p(), eval(f, x)[0]);
    return acc / static_cast<double>(pts.size());
}

// Rank by plain Gaussian elimination on a copy.
inline std::size_t rank(std::uint32_t p, std::vector<std::vector<std::uint64_t>> rows) {
    std::size_t r = 0;
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t piv = r;
        while (piv < rows.size() && rows[piv][c] % p == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[r]);
        std::uint64_t inv = 1;
        while (rows[r][c] * inv % p != 1) ++inv;
        for (auto& v : rows[r]) v = v * inv % p;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r) continue;
            const std::uint64_t f = rows[i][c] % p;
            for (std::size_t j = 0; j < cols; ++j) rows[i][j] = (rows[i][j] + (p - f) * rows[r][j]) % p;
        }
        ++r;
    }
    return r;
}

// Rank of the n1 x n2 coefficient matrix of a bilinear form.
inline std::size_t bilinear_rank(const rankforge::MultilinearMap& f) {
    const std::size_t n1 = f.shape().dim(0), n2 = f.shape().dim(1);
    std::vector<std::vector<std::uint64_t>> rows(n1, std::vector<std::uint64_t>(n2));
    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b) rows[a][b] = f.coeffs()[a * n2 + b];
    return rank(f.p(), rows);
}

} // namespace oracle

namespace oracle {

// The 2k-fold product average straight from its definition, over explicit
// vector points.
inline std::complex<double> box_average(const rankforge::Shape& shape,
                                        const std::vector<std::vector<std::complex<double>>>& family) {
    const auto pts = all_points(shape);
    const std::size_t k = shape.arity();
    std::complex<double> acc = 0;
    for (const auto& x : pts) {
        for (const auto& y : pts) {
            std::complex<double> prod = 1;
            for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
                std::vector<FVec> z(k);
                std::size_t odd = 0;
                for (std::size_t i = 0; i < k; ++i) {
                    const bool in = (mask >> i) & 1;
                    z[i] = in ? x[i] : y[i];
                    odd ^= in;
                }
                std::size_t pos = 0;
                for (; pos < pts.size(); ++pos)
                    if (pts[pos] == z) break;
                const auto v = family[mask][pos];
                prod *= odd ? std::conj(v) : v;
            }
            acc += prod;
        }
    }
    return acc / static_cast<double>(pts.size() * pts.size());
}

} // namespace oracle

namespace oracle {

// Partition rank of every form on a tiny shape by breadth-first search over
// the whole coefficient space, stepping by rank-one summands. Forms are
// numbered sum_f c_f p^f over their flat coefficient vector.
inline std::vector<int> prank_table(const rankforge::Shape& shape) {
    const std::uint32_t p = shape.p();
    const std::size_t k = shape.arity();
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= shape.dim(i);
    std::size_t states = 1;
    for (std::size_t f = 0; f < total; ++f) states *= p;
    std::vector<std::vector<std::size_t>> idx(total, std::vector<std::size_t>(k));
    for (std::size_t f = 0; f < total; ++f) {
        std::size_t rest = f;
        for (std::size_t i = k; i-- > 0;) {
            idx[f][i] = rest % shape.dim(i);
            rest /= shape.dim(i);
        }
    }
    std::vector<std::vector<Residue>> gens;
    {
        std::vector<bool> seen(states, false);
        for (std::size_t side = 1; side + 1 < (std::size_t{1} << k); side += 2) {
            std::size_t na = 1, nb = 1;
            for (std::size_t i = 0; i < k; ++i) ((side >> i) & 1 ? na : nb) *= shape.dim(i);
            for (const auto& a : all_vectors(p, na)) {
                for (const auto& b : all_vectors(p, nb)) {
                    std::vector<Residue> t(total);
                    std::size_t code = 0, place = 1;
                    for (std::size_t f = 0; f < total; ++f) {
                        std::size_t ra = 0, rb = 0;
                        for (std::size_t i = 0; i < k; ++i) {
                            if ((side >> i) & 1) ra = ra * shape.dim(i) + idx[f][i];
                            else rb = rb * shape.dim(i) + idx[f][i];
                        }
                        t[f] = a[ra] * b[rb] % p;
                        code += t[f] * place;
                        place *= p;
                    }
                    if (code != 0 && !seen[code]) {
                        seen[code] = true;
                        gens.push_back(t);
                    }
                }
            }
        }
    }
    std::vector<int> dist(states, -1);
    std::vector<std::size_t> frontier{0};
    dist[0] = 0;
    for (int d = 1; !frontier.empty(); ++d) {
        std::vector<std::size_t> next;
        for (std::size_t s : frontier) {
            std::vector<Residue> digits(total);
            std::size_t rest = s;
            for (auto& v : digits) {
                v = static_cast<Residue>(rest % p);
                rest /= p;
            }
            for (const auto& g : gens) {
                std::size_t code = 0, place = 1;
                for (std::size_t f = 0; f < total; ++f) {
                    code += (digits[f] + g[f]) % p * place;
                    place *= p;
                }
                if (dist[code] < 0) {
                    dist[code] = d;
                    next.push_back(code);
                }
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

inline std::size_t code_of(const rankforge::MultilinearMap& f) {
    std::size_t code = 0, place = 1;
    for (Residue c : f.coeffs()) {
        code += c * place;
        place *= f.p();
    }
    return code;
}

inline rankforge::MultilinearMap form_of_code(const rankforge::Shape& shape, std::size_t code) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < shape.arity(); ++i) total *= shape.dim(i);
    std::vector<Residue> c(total);
    for (auto& v : c) {
        v = static_cast<Residue>(code % shape.p());
        code /= shape.p();
    }
    return rankforge::MultilinearMap(shape, 1, c);
}

// Points are explicit coordinate lists; two are adjacent when exactly one
// coordinate differs.
inline bool adjacent(const std::vector<FVec>& a, const std::vector<FVec>& b) {
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
    return diff == 1;
}

inline std::size_t find_root(std::vector<std::size_t>& parent, std::size_t u) {
    while (parent[u] != u) u = parent[u] = parent[parent[u]];
    return u;
}

inline std::size_t union_find_components(const std::vector<std::vector<FVec>>& pts) {
    std::vector<std::size_t> parent(pts.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t u = 0; u < pts.size(); ++u)
        for (std::size_t w = u + 1; w < pts.size(); ++w)
            if (adjacent(pts[u], pts[w])) parent[find_root(parent, u)] = find_root(parent, w);
    std::size_t roots = 0;
    for (std::size_t u = 0; u < pts.size(); ++u) roots += find_root(parent, u) == u;
    return roots;
}

// Largest finite distance by BFS from every point over an explicit
// adjacency matrix.
inline std::size_t all_pairs_diameter(const std::vector<std::vector<FVec>>& pts) {
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t w = 0; w < n; ++w)
            if (adjacent(pts[u], pts[w])) adj[u].push_back(w);
    std::size_t best = 0;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::size_t> dist(n, SIZE_MAX);
        std::vector<std::size_t> queue{s};
        dist[s] = 0;
        for (std::size_t h = 0; h < queue.size(); ++h)
            for (std::size_t w : adj[queue[h]])
                if (dist[w] == SIZE_MAX) {
                    dist[w] = dist[queue[h]] + 1;
                    best = std::max(best, dist[w]);
                    queue.push_back(w);
                }
    }
    return best;
}

} // namespace oracle
