// Algebra on the 5-dimensional space of symmetric traceless 3x3 tensors:
// construction, invariants, spectral decomposition, biaxiality, frame action.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace qlab {

// ---------------------------------------------------------------------------
// Minimal 3-vector / 3x3-matrix helpers
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    Vec3 operator/(double a) const { return {x / a, y / a, z / a}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double a) { x *= a; y *= a; z *= a; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0 ? *this / n : Vec3{0, 0, 1};
    }
};

inline Vec3 operator*(double a, const Vec3& v) { return v * a; }

struct Mat3 {
    // row-major
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 zero() { return {}; }
    static Mat3 identity() {
        Mat3 r;
        r(0, 0) = r(1, 1) = r(2, 2) = 1;
        return r;
    }
    static Mat3 outer(const Vec3& a, const Vec3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
        return r;
    }
    // symmetric tensor product: (a (x) b + b (x) a)/2
    static Mat3 sym_outer(const Vec3& a, const Vec3& b) {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = 0.5 * (a[i] * b[j] + a[j] * b[i]);
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double a) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = a * m[i];
        return r;
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0;
                for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
    double frob2() const {
        double s = 0;
        for (double v : m) s += v * v;
        return s;
    }
    double frob() const { return std::sqrt(frob2()); }
    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    Vec3 row(int i) const { return {(*this)(i, 0), (*this)(i, 1), (*this)(i, 2)}; }
};

inline Mat3 operator*(double a, const Mat3& M) { return M * a; }

// ---------------------------------------------------------------------------
// QTensor: 5 coefficients in a fixed orthonormal basis of the space of
// symmetric traceless 3x3 matrices (Frobenius inner product).
//
// The basis is frozen because field files store raw coefficients:
//   E1 = diag(-1,-1,2)/sqrt(6)
//   E2 = diag( 1,-1,0)/sqrt(2)
//   E3 = (ex(x)ey + ey(x)ex)/sqrt(2)
//   E4 = (ex(x)ez + ez(x)ex)/sqrt(2)
//   E5 = (ey(x)ez + ez(x)ey)/sqrt(2)
// With these, |Q|_F equals the Euclidean norm of the coefficient vector.
// ---------------------------------------------------------------------------

namespace detail {
inline constexpr double inv_sqrt6 = 0.40824829046386301636;  // 1/sqrt(6)
inline constexpr double inv_sqrt2 = 0.70710678118654752440;  // 1/sqrt(2)
inline constexpr double sqrt2 = 1.41421356237309504880;
inline constexpr double sqrt6 = 2.44948974968401932070;
}  // namespace detail

struct QTensor {
    std::array<double, 5> c{};

    QTensor() = default;
    explicit QTensor(const std::array<double, 5>& coeffs) : c(coeffs) {}

    QTensor operator+(const QTensor& o) const {
        QTensor r;
        for (int i = 0; i < 5; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    QTensor operator-(const QTensor& o) const {
        QTensor r;
        for (int i = 0; i < 5; ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    QTensor operator*(double a) const {
        QTensor r;
        for (int i = 0; i < 5; ++i) r.c[i] = a * c[i];
        return r;
    }
    QTensor operator-() const { return *this * -1.0; }
    QTensor& operator+=(const QTensor& o) {
        for (int i = 0; i < 5; ++i) c[i] += o.c[i];
        return *this;
    }
    QTensor& operator-=(const QTensor& o) {
        for (int i = 0; i < 5; ++i) c[i] -= o.c[i];
        return *this;
    }
    QTensor& operator*=(double a) {
        for (int i = 0; i < 5; ++i) c[i] *= a;
        return *this;
    }

    double dot(const QTensor& o) const {
        double s = 0;
        for (int i = 0; i < 5; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Mat3 matrix() const {
        using namespace detail;
        Mat3 M;
        M(0, 0) = -c[0] * inv_sqrt6 + c[1] * inv_sqrt2;
        M(1, 1) = -c[0] * inv_sqrt6 - c[1] * inv_sqrt2;
        M(2, 2) = 2.0 * c[0] * inv_sqrt6;
        M(0, 1) = M(1, 0) = c[2] * inv_sqrt2;
        M(0, 2) = M(2, 0) = c[3] * inv_sqrt2;
        M(1, 2) = M(2, 1) = c[4] * inv_sqrt2;
        return M;
    }
};

inline QTensor operator*(double a, const QTensor& q) { return q * a; }

// Orthogonal projection of a 3x3 matrix onto the symmetric traceless space,
// expressed in the E1..E5 basis. Exact inverse of QTensor::matrix() on that
// subspace.
inline QTensor q_from_matrix(const Mat3& M) {
    using namespace detail;
    QTensor q;
    const double sxy = 0.5 * (M(0, 1) + M(1, 0));
    const double sxz = 0.5 * (M(0, 2) + M(2, 0));
    const double syz = 0.5 * (M(1, 2) + M(2, 1));
    const double tr3 = M.trace() / 3.0;
    const double dxx = M(0, 0) - tr3;
    const double dyy = M(1, 1) - tr3;
    const double dzz = M(2, 2) - tr3;
    q.c[0] = (-dxx - dyy + 2.0 * dzz) * inv_sqrt6;
    q.c[1] = (dxx - dyy) * inv_sqrt2;
    q.c[2] = sxy * sqrt2;
    q.c[3] = sxz * sqrt2;
    q.c[4] = syz * sqrt2;
    return q;
}

// tr(Q^2), tr(Q^3) of the reconstructed matrix.
inline std::pair<double, double> invariants(const QTensor& q) {
    const Mat3 M = q.matrix();
    const Mat3 M2 = M * M;
    double tr2 = M2.trace();
    double tr3 = (M2 * M).trace();
    return {tr2, tr3};
}

// s (n (x) n - I/3). Throws if n is not a unit vector (tolerance 1e-10).
inline QTensor uniaxial(double s, const Vec3& n) {
    if (std::abs(n.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("uniaxial: director must be a unit vector");
    Mat3 M = Mat3::outer(n, n);
    M(0, 0) -= 1.0 / 3.0;
    M(1, 1) -= 1.0 / 3.0;
    M(2, 2) -= 1.0 / 3.0;
    return q_from_matrix(M * s);
}

// beta = 1 - 6 tr(Q^3)^2 / |Q|^6, clamped to [0,1]; 0 at Q = 0.
// Vanishes exactly on uniaxial and isotropic tensors.
inline double biaxiality(const QTensor& q) {
    auto [x, y] = invariants(q);
    if (x <= 0) return 0.0;
    double b = 1.0 - 6.0 * y * y / (x * x * x);
    return b < 0 ? 0.0 : (b > 1 ? 1.0 : b);
}

// ---------------------------------------------------------------------------
// Frame action
// ---------------------------------------------------------------------------

struct Rotation {
    Mat3 g = Mat3::identity();

    Rotation() = default;
    // Validates g^T g = I and det g = 1 to 1e-12.
    explicit Rotation(const Mat3& m) : g(m) {
        Mat3 gtg = g.transposed() * g;
        Mat3 err = gtg - Mat3::identity();
        if (err.frob() > 1e-12 * 3 || std::abs(g.det() - 1.0) > 1e-12)
            throw std::invalid_argument("Rotation: matrix is not a proper rotation");
    }
    static Rotation identity() { return Rotation{}; }
    static Rotation axis_angle(const Vec3& axis, double angle) {
        Vec3 u = axis.normalized();
        double c = std::cos(angle), s = std::sin(angle);
        Mat3 K;  // cross-product matrix
        K(0, 1) = -u.z; K(0, 2) = u.y;
        K(1, 0) = u.z;  K(1, 2) = -u.x;
        K(2, 0) = -u.y; K(2, 1) = u.x;
        Mat3 R = Mat3::identity() + K * s + (K * K) * (1.0 - c);
        Rotation r;
        r.g = R;
        return r;
    }
    Vec3 apply(const Vec3& v) const { return g * v; }
    Rotation inverse() const {
        Rotation r;
        r.g = g.transposed();
        return r;
    }
};

// rho(g) Q = g Q g^T
inline QTensor rotate(const Rotation& g, const QTensor& q) {
    return q_from_matrix(g.g * q.matrix() * g.g.transposed());
}

// ---------------------------------------------------------------------------
// Spectral decomposition
// ---------------------------------------------------------------------------

enum class Phase : std::uint8_t { Isotropic, Uniaxial, Biaxial };

inline const char* phase_name(Phase p) {
    switch (p) {
        case Phase::Isotropic: return "isotropic";
        case Phase::Uniaxial: return "uniaxial";
        default: return "biaxial";
    }
}

struct SpectralData {
    std::array<double, 3> eigenvalues{};  // sorted descending, sum 0
    double s = 0;                         // scalar order parameter
    Vec3 n{0, 0, 1};                      // director, sign-normalized
    double beta = 0;                      // biaxiality in [0,1]
    Phase phase = Phase::Isotropic;
};

namespace detail {

// Eigenvalues of a symmetric traceless 3x3 matrix: trigonometric solution of
// lambda^3 - j2 lambda - j3 = 0 with j2 = |A|^2/2, j3 = det A. The root with
// the healthiest p'(x) is polished by Newton; the remaining pair comes from
// the exact quadratic factor, so the sum vanishes by construction and the
// double-root branch of the acos never contaminates the simple eigenvalue.
inline std::array<double, 3> eigenvalues_traceless(const Mat3& A) {
    const double j2 = 0.5 * A.frob2();
    const double j3 = A.det();
    if (j2 <= 0) return {0.0, 0.0, 0.0};
    const double mhalf = std::sqrt(j2 / 3.0);          // m/2 with m = 2 sqrt(j2/3)
    double cos3t = j3 / (2.0 * mhalf * mhalf * mhalf); // (3 sqrt3/2) j3 j2^{-3/2}
    cos3t = cos3t < -1 ? -1 : (cos3t > 1 ? 1 : cos3t);
    const double t = std::acos(cos3t) / 3.0;
    constexpr double two_pi_3 = 2.0943951023931954923;
    double anchor = 0, best = -1;
    for (int k = 0; k < 3; ++k) {
        const double x = 2.0 * mhalf * std::cos(t + two_pi_3 * k);
        const double fp = std::abs(3.0 * x * x - j2);
        if (fp > best) { best = fp; anchor = x; }
    }
    for (int it = 0; it < 3; ++it) {
        const double f = anchor * anchor * anchor - j2 * anchor - j3;
        const double fp = 3.0 * anchor * anchor - j2;
        if (std::abs(fp) < 1e-12 * (j2 + anchor * anchor)) break;
        anchor -= f / fp;
    }
    // remaining pair: mu^2 + anchor mu + (anchor^2 - j2) = 0
    const double disc = std::max(0.0, 4.0 * j2 - 3.0 * anchor * anchor);
    const double sq = std::sqrt(disc);
    std::array<double, 3> lam{anchor, 0.5 * (-anchor + sq), 0.5 * (-anchor - sq)};
    if (lam[0] < lam[1]) std::swap(lam[0], lam[1]);
    if (lam[1] < lam[2]) std::swap(lam[1], lam[2]);
    if (lam[0] < lam[1]) std::swap(lam[0], lam[1]);
    return lam;
}

// Eigenvector of A for eigenvalue lam via the largest cross product of rows
// of A - lam I. Well-conditioned when lam is a simple eigenvalue.
inline Vec3 eigenvector_for(const Mat3& A, double lam) {
    Mat3 M = A;
    M(0, 0) -= lam;
    M(1, 1) -= lam;
    M(2, 2) -= lam;
    const Vec3 r0 = M.row(0), r1 = M.row(1), r2 = M.row(2);
    Vec3 cands[3] = {r0.cross(r1), r0.cross(r2), r1.cross(r2)};
    int best = 0;
    double bn = cands[0].norm2();
    for (int i = 1; i < 3; ++i) {
        double n2 = cands[i].norm2();
        if (n2 > bn) { bn = n2; best = i; }
    }
    if (bn <= 0) return {0, 0, 1};
    return cands[best].normalized();
}

// Flip so the first component exceeding 1e-9 in magnitude (x,y,z order) is
// positive; directors are lines, and this fixes a reproducible representative.
inline Vec3 sign_normalize(const Vec3& v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-9) return v[i] < 0 ? -v : v;
    }
    return v;
}

}  // namespace detail

// Spectral decomposition with classification.
//   |q| < tol          -> Isotropic (s = 0, n = ez by convention)
//   biaxiality < tol   -> Uniaxial, n the eigenvector of the simple eigenvalue
//   otherwise          -> Biaxial, n the eigenvector of max-|lambda| eigenvalue
// s is always the closed form 3 tr(Q^3)/|Q|^2.
inline SpectralData decompose(const QTensor& q, double tol = 1e-9) {
    if (!(tol > 0)) throw std::invalid_argument("decompose: tol must be positive");
    SpectralData out;
    const double nq = q.norm();
    if (nq < tol) return out;  // isotropic defaults

    const Mat3 M = q.matrix();
    out.eigenvalues = detail::eigenvalues_traceless(M);
    auto [x, y] = invariants(q);
    out.s = 3.0 * y / x;
    out.beta = biaxiality(q);

    const auto& lam = out.eigenvalues;
    if (out.beta < tol) {
        out.phase = Phase::Uniaxial;
        // the simple eigenvalue is the one across the larger gap
        const double target = (lam[0] - lam[1] > lam[1] - lam[2]) ? lam[0] : lam[2];
        out.n = detail::sign_normalize(detail::eigenvector_for(M, target));
    } else {
        out.phase = Phase::Biaxial;
        // largest |lambda|; ties break toward the larger eigenvalue
        const double target = (std::abs(lam[0]) >= std::abs(lam[2])) ? lam[0] : lam[2];
        out.n = detail::sign_normalize(detail::eigenvector_for(M, target));
    }
    return out;
}

}  // namespace qlab
