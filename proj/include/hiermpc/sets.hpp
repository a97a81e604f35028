#pragma once

#include "hiermpc/linalg.hpp"

#include <optional>
#include <vector>

namespace hiermpc {

/// Centrally symmetric set  {c + G xi : ||xi||_inf <= 1}.
/// An empty generator matrix is a singleton.
struct Zonotope {
    Vec c;
    Mat G;  // n x k

    Zonotope() = default;
    Zonotope(Vec center, Mat generators);

    static Zonotope singleton(Vec center);
    static Zonotope box(const Vec& center, const Vec& half_widths);

    int dim() const { return static_cast<int>(c.size()); }
    int num_generators() const { return static_cast<int>(G.cols()); }

    /// Exact support value  a'c + sum_i |a'g_i|.
    double support(const Vec& a) const;

    bool origin_centered(double tol = 0.0) const;
};

Zonotope linear_map(const Mat& C, const Zonotope& Z);
Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);
Zonotope scale(double t, const Zonotope& Z);

/// LP feasibility of x = c + G xi, ||xi||_inf <= 1, within `tol`.
bool zonotope_contains(const Zonotope& Z, const Vec& x, double tol = 1e-8);

/// Convex polytope {x : F x <= g}. Emptiness is decided by LP on first use
/// and cached.
struct HPolytope {
    Mat F;
    Vec g;

    HPolytope() = default;
    HPolytope(Mat faces, Vec offsets);

    static HPolytope box(const Vec& lo, const Vec& hi);

    int dim() const { return static_cast<int>(F.cols()); }
    int num_faces() const { return static_cast<int>(F.rows()); }

    bool contains(const Vec& x, double tol = 1e-8) const;
    bool is_empty() const;

    /// Scales every row to unit infinity norm; offsets follow.
    HPolytope normalized() const;

  private:
    mutable std::optional<bool> empty_;
};

/// max a'x over P. Returns +inf when unbounded in direction a; throws on
/// empty P.
double support_polytope(const HPolytope& P, const Vec& a);

/// Support-function finiteness along all +/- axis directions.
bool is_bounded(const HPolytope& P);

/// Exact halfspace tightening {x : F x <= g - h_S(F rows)}. The result may
/// be empty; query is_empty() on it.
HPolytope pontryagin_diff(const HPolytope& P, const Zonotope& S);

/// Offsets f' with f'_a = f_a + h_S(E_a); {E y <= f'} outer-approximates
/// O + S, so certifying one face E_a y >= f'_a clears the enlarged obstacle.
Vec enlarge_obstacle(const HPolytope& O, const Zonotope& S);

/// Obstacle in output space with per-mode enlarged offsets (filled when
/// modes are prepared).
struct Obstacle {
    HPolytope base;
    std::vector<Vec> enlarged;  // one offset vector per mode
};

/// Growing error tube E(0) = {0}, E(j+1) = A_K E(j) + W, returned for
/// j = 0..j_max. W must be origin-centered; a non-Schur A_K only warns.
std::vector<Zonotope> error_tube(const Mat& A_K, const Zonotope& W, int j_max);

struct MrpiResult {
    Zonotope Z;
    int s = 0;
    double alpha = 0.0;
};

/// Invariant outer approximation Z = 1/(1-alpha) * sum_{j<s} A_K^j W with
/// the smallest s giving A_K^s W inside alpha*W, alpha <= alpha_target.
/// Containment is tested by support comparison on a fixed direction
/// template (exact for axis-aligned boxes and any planar W).
MrpiResult mrpi_outer(const Mat& A_K, const Zonotope& W, double alpha_target,
                      int max_s = 500);

/// Inner margin D_j with E(j) + D_j inside Z, telescoping under the error
/// recursion. For j <= s this is the exact decomposition
/// sum_{m<j}(beta-1)A^m W + sum_{m=j..s-1} beta A^m W, beta = 1/(1-alpha);
/// beyond s the block repeats scaled by alpha^floor(j/s).
Zonotope tube_margin(const Mat& A_K, const Zonotope& W, int s, double alpha, int j);

/// Directions used by the mRPI containment test: +/- axes, generator
/// directions, and their perpendiculars in the plane.
std::vector<Vec> containment_template(const Zonotope& W);

/// Eight fixed directions for support-function reports.
std::vector<Vec> report_directions(int n);

/// Drops rows certified redundant by LP against the remaining ones.
/// Deterministic single pass in row order.
HPolytope prune_redundant_rows(const HPolytope& P);

}  // namespace hiermpc
