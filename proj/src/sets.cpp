#include "hiermpc/sets.hpp"

#include "hiermpc/optim/lp.hpp"

#include <cmath>
#include <iostream>

namespace hiermpc {

using optim::LinearProgram;
using optim::SolveStatus;

Zonotope::Zonotope(Vec center, Mat generators) : c(std::move(center)), G(std::move(generators)) {
    if (G.size() > 0 && G.rows() != c.size()) {
        throw std::invalid_argument("Zonotope: generator dimension mismatch");
    }
    if (G.size() == 0) {
        G.resize(c.size(), 0);
    }
    if (!c.allFinite() || !G.allFinite()) {
        throw std::invalid_argument("Zonotope: entries must be finite");
    }
}

Zonotope Zonotope::singleton(Vec center) {
    return Zonotope(std::move(center), Mat());
}

Zonotope Zonotope::box(const Vec& center, const Vec& half_widths) {
    if (center.size() != half_widths.size()) {
        throw std::invalid_argument("Zonotope::box: dimension mismatch");
    }
    int k = 0;
    for (int i = 0; i < half_widths.size(); ++i) {
        if (half_widths[i] < 0.0) {
            throw std::invalid_argument("Zonotope::box: half widths must be nonnegative");
        }
        if (half_widths[i] > 0.0) ++k;
    }
    Mat G = Mat::Zero(center.size(), k);
    int col = 0;
    for (int i = 0; i < half_widths.size(); ++i) {
        if (half_widths[i] > 0.0) {
            G(i, col++) = half_widths[i];
        }
    }
    return Zonotope(center, G);
}

double Zonotope::support(const Vec& a) const {
    if (a.size() != c.size()) {
        throw std::invalid_argument("Zonotope::support: dimension mismatch");
    }
    double v = a.dot(c);
    if (G.cols() > 0) {
        v += (G.transpose() * a).cwiseAbs().sum();
    }
    return v;
}

bool Zonotope::origin_centered(double tol) const {
    return c.cwiseAbs().maxCoeff() <= tol;
}

Zonotope linear_map(const Mat& C, const Zonotope& Z) {
    if (C.cols() != Z.dim()) {
        throw std::invalid_argument("linear_map: dimension mismatch");
    }
    return Zonotope(C * Z.c, C * Z.G);
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("minkowski_sum: dimension mismatch");
    }
    Mat G(a.dim(), a.num_generators() + b.num_generators());
    G << a.G, b.G;
    return Zonotope(a.c + b.c, G);
}

Zonotope scale(double t, const Zonotope& Z) {
    if (t < 0.0) {
        throw std::invalid_argument("scale: factor must be nonnegative");
    }
    return Zonotope(t * Z.c, t * Z.G);
}

bool zonotope_contains(const Zonotope& Z, const Vec& x, double tol) {
    if (x.size() != Z.dim()) {
        throw std::invalid_argument("zonotope_contains: dimension mismatch");
    }
    const Vec d = x - Z.c;
    const int n = Z.dim();
    const int k = Z.num_generators();
    if (k == 0) {
        return d.cwiseAbs().maxCoeff() <= tol;
    }
    // min t  s.t. -t <= (G xi - d)_i <= t, ||xi||_inf <= 1, t >= 0
    LinearProgram lp;
    lp.c = Vec::Zero(k + 1);
    lp.c[k] = 1.0;
    lp.G.resize(2 * n, k + 1);
    lp.h.resize(2 * n);
    lp.G.topLeftCorner(n, k) = Z.G;
    lp.G.bottomLeftCorner(n, k) = -Z.G;
    lp.G.topRightCorner(n, 1).setConstant(-1.0);
    lp.G.bottomRightCorner(n, 1).setConstant(-1.0);
    lp.h.head(n) = d;
    lp.h.tail(n) = -d;
    lp.lo = Vec::Constant(k + 1, -1.0);
    lp.hi = Vec::Constant(k + 1, 1.0);
    lp.lo[k] = 0.0;
    lp.hi[k] = kInf;
    auto sol = optim::solve_lp(lp);
    return sol.status == SolveStatus::Optimal && sol.objective <= tol;
}

HPolytope::HPolytope(Mat faces, Vec offsets) : F(std::move(faces)), g(std::move(offsets)) {
    if (F.rows() != g.size()) {
        throw std::invalid_argument("HPolytope: face/offset count mismatch");
    }
    if (F.rows() < 1) {
        throw std::invalid_argument("HPolytope: at least one face required");
    }
    for (int i = 0; i < F.rows(); ++i) {
        if (F.row(i).cwiseAbs().maxCoeff() == 0.0) {
            throw std::invalid_argument("HPolytope: zero face normal");
        }
    }
}

HPolytope HPolytope::box(const Vec& lo, const Vec& hi) {
    const int n = static_cast<int>(lo.size());
    if (hi.size() != n) {
        throw std::invalid_argument("HPolytope::box: dimension mismatch");
    }
    Mat F(2 * n, n);
    Vec g(2 * n);
    F.topRows(n) = Mat::Identity(n, n);
    F.bottomRows(n) = -Mat::Identity(n, n);
    g.head(n) = hi;
    g.tail(n) = -lo;
    return HPolytope(F, g);
}

bool HPolytope::contains(const Vec& x, double tol) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("HPolytope::contains: dimension mismatch");
    }
    return ((F * x - g).array() <= tol).all();
}

bool HPolytope::is_empty() const {
    if (empty_.has_value()) {
        return *empty_;
    }
    LinearProgram lp;
    lp.c = Vec::Zero(dim());
    lp.G = F;
    lp.h = g;
    auto sol = optim::solve_lp(lp);
    empty_ = (sol.status == SolveStatus::Infeasible);
    return *empty_;
}

HPolytope HPolytope::normalized() const {
    Mat Fn = F;
    Vec gn = g;
    for (int i = 0; i < F.rows(); ++i) {
        double s = F.row(i).cwiseAbs().maxCoeff();
        Fn.row(i) /= s;
        gn[i] /= s;
    }
    return HPolytope(Fn, gn);
}

double support_polytope(const HPolytope& P, const Vec& a) {
    if (P.is_empty()) {
        throw std::runtime_error("support_polytope: empty polytope");
    }
    LinearProgram lp;
    lp.c = -a;  // max a'x
    lp.G = P.F;
    lp.h = P.g;
    auto sol = optim::solve_lp(lp);
    if (sol.status == SolveStatus::Unbounded) {
        return kInf;
    }
    if (sol.status != SolveStatus::Optimal) {
        throw std::runtime_error("support_polytope: LP failed");
    }
    return -sol.objective;
}

bool is_bounded(const HPolytope& P) {
    const int n = P.dim();
    for (int i = 0; i < n; ++i) {
        Vec a = Vec::Zero(n);
        for (double sgn : {1.0, -1.0}) {
            a[i] = sgn;
            if (!std::isfinite(support_polytope(P, a))) {
                return false;
            }
        }
        a[i] = 0.0;
    }
    return true;
}

HPolytope pontryagin_diff(const HPolytope& P, const Zonotope& S) {
    if (P.dim() != S.dim()) {
        throw std::invalid_argument("pontryagin_diff: dimension mismatch");
    }
    Vec g(P.num_faces());
    for (int i = 0; i < P.num_faces(); ++i) {
        g[i] = P.g[i] - S.support(P.F.row(i).transpose());
    }
    return HPolytope(P.F, g);
}

Vec enlarge_obstacle(const HPolytope& O, const Zonotope& S) {
    if (O.dim() != S.dim()) {
        throw std::invalid_argument("enlarge_obstacle: dimension mismatch");
    }
    Vec f(O.num_faces());
    for (int i = 0; i < O.num_faces(); ++i) {
        f[i] = O.g[i] + S.support(O.F.row(i).transpose());
    }
    return f;
}

std::vector<Zonotope> error_tube(const Mat& A_K, const Zonotope& W, int j_max) {
    if (A_K.rows() != A_K.cols() || A_K.rows() != W.dim()) {
        throw std::invalid_argument("error_tube: dimension mismatch");
    }
    if (!W.origin_centered(1e-12)) {
        throw std::invalid_argument("error_tube: W must be origin-centered");
    }
    if (spectral_radius(A_K) >= 1.0) {
        std::cerr << "[hiermpc] warning: error_tube called with non-Schur A_K\n";
    }
    std::vector<Zonotope> tubes;
    tubes.reserve(j_max + 1);
    tubes.push_back(Zonotope::singleton(Vec::Zero(W.dim())));
    for (int j = 1; j <= j_max; ++j) {
        tubes.push_back(minkowski_sum(linear_map(A_K, tubes.back()), W));
    }
    return tubes;
}

std::vector<Vec> containment_template(const Zonotope& W) {
    const int n = W.dim();
    std::vector<Vec> dirs;
    for (int i = 0; i < n; ++i) {
        Vec e = Vec::Zero(n);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    for (int j = 0; j < W.num_generators(); ++j) {
        Vec gcol = W.G.col(j);
        double nrm = gcol.norm();
        if (nrm < 1e-14) continue;
        dirs.push_back(gcol / nrm);
        if (n == 2) {
            // facet normals of a planar zonotope are the generator
            // perpendiculars; adding them makes the test exact in 2-D
            Vec perp(2);
            perp << -gcol[1], gcol[0];
            dirs.push_back(perp / nrm);
        }
    }
    return dirs;
}

std::vector<Vec> report_directions(int n) {
    std::vector<Vec> dirs;
    for (int i = 0; i < std::min(n, 2); ++i) {
        Vec e = Vec::Zero(n);
        e[i] = 1.0;
        dirs.push_back(e);
        dirs.push_back(-e);
    }
    Vec ones = Vec::Ones(n) / std::sqrt(double(n));
    dirs.push_back(ones);
    dirs.push_back(-ones);
    Vec alt(n);
    for (int i = 0; i < n; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    alt /= std::sqrt(double(n));
    dirs.push_back(alt);
    dirs.push_back(-alt);
    while (dirs.size() > 8) dirs.pop_back();
    return dirs;
}

MrpiResult mrpi_outer(const Mat& A_K, const Zonotope& W, double alpha_target, int max_s) {
    if (!(alpha_target > 0.0 && alpha_target < 1.0)) {
        throw std::invalid_argument("mrpi_outer: alpha_target must lie in (0,1)");
    }
    if (!W.origin_centered(1e-12)) {
        throw std::invalid_argument("mrpi_outer: W must be origin-centered");
    }
    if (A_K.rows() != A_K.cols() || A_K.rows() != W.dim()) {
        throw std::invalid_argument("mrpi_outer: dimension mismatch");
    }
    if (spectral_radius(A_K) >= 1.0) {
        std::cerr << "[hiermpc] warning: mrpi_outer called with non-Schur A_K\n";
    }
    for (int i = 0; i < W.dim(); ++i) {
        if (W.G.row(i).cwiseAbs().sum() <= 0.0) {
            throw std::invalid_argument(
                "mrpi_outer: W has zero extent in state dimension " + std::to_string(i) +
                "; the scaled-containment construction needs a full-dimensional "
                "disturbance set");
        }
    }
    const auto dirs = containment_template(W);
    std::vector<double> hw(dirs.size());
    for (size_t d = 0; d < dirs.size(); ++d) {
        hw[d] = W.support(dirs[d]);
    }
    Mat As = A_K;  // A_K^s
    for (int s = 1; s <= max_s; ++s) {
        double alpha = 0.0;
        bool ok = true;
        const Zonotope AsW(Vec::Zero(W.dim()), As * W.G);
        for (size_t d = 0; d < dirs.size(); ++d) {
            double num = AsW.support(dirs[d]);
            if (hw[d] <= 1e-14) {
                if (num > 1e-13) {
                    ok = false;
                    break;
                }
                continue;
            }
            alpha = std::max(alpha, num / hw[d]);
        }
        if (ok && alpha <= alpha_target) {
            const double beta = 1.0 / (1.0 - alpha);
            Mat G(W.dim(), W.num_generators() * s);
            Mat Aj = Mat::Identity(W.dim(), W.dim());
            for (int j = 0; j < s; ++j) {
                G.middleCols(j * W.num_generators(), W.num_generators()) = beta * (Aj * W.G);
                Aj = A_K * Aj;
            }
            return MrpiResult{Zonotope(Vec::Zero(W.dim()), G), s, alpha};
        }
        As = As * A_K;
    }
    throw std::runtime_error(
        "mrpi_outer: no s <= " + std::to_string(max_s) +
        " reaches alpha_target; A_K is insufficiently contractive for the target");
}

HPolytope prune_redundant_rows(const HPolytope& P) {
    const int m = P.num_faces();
    const int n = P.dim();
    std::vector<char> keep(m, 1);
    for (int i = 0; i < m; ++i) {
        int others = 0;
        for (int r = 0; r < m; ++r) {
            if (r != i && keep[r]) ++others;
        }
        if (others == 0) continue;
        LinearProgram lp;
        lp.c = -P.F.row(i).transpose();  // max F_i x
        lp.G.resize(others, n);
        lp.h.resize(others);
        int at = 0;
        for (int r = 0; r < m; ++r) {
            if (r == i || !keep[r]) continue;
            lp.G.row(at) = P.F.row(r);
            lp.h[at] = P.g[r];
            ++at;
        }
        auto sol = optim::solve_lp(lp);
        if (sol.status == SolveStatus::Optimal && -sol.objective <= P.g[i] - 1e-9) {
            keep[i] = 0;
        }
    }
    int kept = 0;
    for (char k : keep) kept += k;
    Mat F(kept, n);
    Vec g(kept);
    int at = 0;
    for (int i = 0; i < m; ++i) {
        if (keep[i]) {
            F.row(at) = P.F.row(i);
            g[at] = P.g[i];
            ++at;
        }
    }
    return HPolytope(F, g);
}

Zonotope tube_margin(const Mat& A_K, const Zonotope& W, int s, double alpha, int j) {
    if (j < 0) {
        throw std::invalid_argument("tube_margin: j must be nonnegative");
    }
    if (s < 1 || !(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("tube_margin: need s >= 1 and alpha in [0,1)");
    }
    const double beta = 1.0 / (1.0 - alpha);
    const int q = j / s;
    const int r = j % s;
    const double outer = std::pow(alpha, q);
    const int k = W.num_generators();
    std::vector<double> coef(s);
    for (int m = 0; m < s; ++m) {
        coef[m] = outer * (m < r ? (beta - 1.0) : beta);
    }
    int cols = 0;
    for (int m = 0; m < s; ++m) {
        if (coef[m] != 0.0) cols += k;
    }
    Mat G(W.dim(), cols);
    Mat Aj = Mat::Identity(W.dim(), W.dim());
    int at = 0;
    for (int m = 0; m < s; ++m) {
        if (coef[m] != 0.0) {
            G.middleCols(at, k) = coef[m] * (Aj * W.G);
            at += k;
        }
        Aj = A_K * Aj;
    }
    return Zonotope(Vec::Zero(W.dim()), G);
}

}  // namespace hiermpc
