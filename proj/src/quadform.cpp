#include "ellipsum/quadform.hpp"

#include "ellipsum/errors.hpp"
#include "ellipsum/numeric.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace ellipsum {

namespace {

std::int64_t to_i64(const BigInt& v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw Error(ErrorCode::BadMatrix, std::string(what) + " does not fit in 64 bits");
    return v.convert_to<std::int64_t>();
}

IntMatrix minor_of(const IntMatrix& A, int r, int c) {
    const int n = static_cast<int>(A.rows());
    IntMatrix out(n - 1, n - 1);
    for (int i = 0, ii = 0; i < n; ++i) {
        if (i == r) continue;
        for (int j = 0, jj = 0; j < n; ++j) {
            if (j == c) continue;
            out(ii, jj++) = A(i, j);
        }
        ++ii;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::string out;
    for (char ch : s)
        if (!std::isspace(static_cast<unsigned char>(ch))) out.push_back(ch);
    return out;
}

Rational parse_rational(const std::string& tok) {
    if (tok.empty()) throw Error(ErrorCode::BadMatrix, "empty matrix entry");
    auto slash = tok.find('/');
    auto parse_int = [&](const std::string& s) {
        if (s.empty()) throw Error(ErrorCode::BadMatrix, "bad matrix entry '" + tok + "'");
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) throw Error(ErrorCode::BadMatrix, "bad matrix entry '" + tok + "'");
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i])))
                throw Error(ErrorCode::BadMatrix, "bad matrix entry '" + tok + "'");
        return BigInt(s[0] == '+' ? s.substr(1) : s);
    };
    if (slash == std::string::npos) return Rational(parse_int(tok));
    BigInt den = parse_int(tok.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::BadMatrix, "zero denominator in '" + tok + "'");
    return Rational(parse_int(tok.substr(0, slash)), den);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

double unit_ball_volume(int n) { return std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

BigInt bareiss_det(const IntMatrix& A) {
    const int n = static_cast<int>(A.rows());
    if (n == 0) return 1;
    std::vector<std::vector<BigInt>> a(n, std::vector<BigInt>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = A(i, j);
    BigInt sign = 1, prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            int p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        }
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

QuadFormCtx build_ctx(const IntMatrix& M) {
    if (M.rows() == 0 || M.cols() == 0) throw Error(ErrorCode::DimensionZero, "matrix has dimension 0");
    if (M.rows() != M.cols()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
    const int n = static_cast<int>(M.rows());
    if (n > kMaxDim) throw Error(ErrorCode::DimensionTooLarge, "dimension " + std::to_string(n) + " exceeds 12");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            if (M(i, j) != M(j, i)) throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
    for (int k = 1; k <= n; ++k) {
        if (bareiss_det(M.topLeftCorner(k, k)) <= 0)
            throw Error(ErrorCode::NotPositiveDefinite, "leading minor of order " + std::to_string(k) + " is not positive");
    }
    QuadFormCtx ctx;
    ctx.n = n;
    ctx.M = M;
    ctx.detM = to_i64(bareiss_det(M), "determinant");
    ctx.adjM.resize(n, n);
    if (n == 1) {
        ctx.adjM(0, 0) = 1;
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                BigInt c = bareiss_det(minor_of(M, j, i));
                if ((i + j) % 2) c = -c;
                ctx.adjM(i, j) = to_i64(c, "adjugate entry");
            }
    }
    // exact check M * adj = det * I
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            BigInt s = 0;
            for (int k = 0; k < n; ++k) s += BigInt(M(i, k)) * ctx.adjM(k, j);
            if (s != (i == j ? BigInt(ctx.detM) : BigInt(0)))
                throw Error(ErrorCode::BadMatrix, "adjugate identity failed");
        }
    Eigen::MatrixXd Md = M.cast<double>();
    Eigen::LLT<Eigen::MatrixXd> llt(Md);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    ctx.chol = llt.matrixL();
    ctx.volume = unit_ball_volume(n) / std::sqrt(static_cast<double>(ctx.detM));
    return ctx;
}

QuadFormCtx adjugate_ctx(const QuadFormCtx& ctx) { return build_ctx(ctx.adjM); }

std::int64_t qform_value(const QuadFormCtx& ctx, const IntVector& m) {
    if (m.size() != ctx.n) throw Error(ErrorCode::DimensionMismatch, "vector length differs from dimension");
    __int128 s = 0;
    for (int i = 0; i < ctx.n; ++i)
        for (int j = 0; j < ctx.n; ++j) s += static_cast<__int128>(ctx.M(i, j)) * m[i] * m[j];
    if (s > std::numeric_limits<std::int64_t>::max()) throw Error(ErrorCode::BadMatrix, "form value overflows");
    return static_cast<std::int64_t>(s);
}

double qform_value(const QuadFormCtx& ctx, const Eigen::VectorXd& x) {
    if (x.size() != ctx.n) throw Error(ErrorCode::DimensionMismatch, "vector length differs from dimension");
    return x.dot(ctx.M.cast<double>() * x);
}

Rational qform_value(const QuadFormCtx& ctx, const Eigen::Matrix<Rational, Eigen::Dynamic, 1>& x) {
    if (x.size() != ctx.n) throw Error(ErrorCode::DimensionMismatch, "vector length differs from dimension");
    Rational s = 0;
    for (int i = 0; i < ctx.n; ++i)
        for (int j = 0; j < ctx.n; ++j) s += Rational(ctx.M(i, j)) * x[i] * x[j];
    return s;
}

Rational dual_norm_sq(const QuadFormCtx& ctx, const IntVector& m) {
    if (m.size() != ctx.n) throw Error(ErrorCode::DimensionMismatch, "vector length differs from dimension");
    BigInt s = 0;
    for (int i = 0; i < ctx.n; ++i)
        for (int j = 0; j < ctx.n; ++j) s += BigInt(ctx.adjM(i, j)) * m[i] * m[j];
    return Rational(s, BigInt(ctx.detM));
}

Rationalized rationalize(const RationalMatrix& Q) {
    if (Q.rows() == 0) throw Error(ErrorCode::DimensionZero, "matrix has dimension 0");
    BigInt c = 1;
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index j = 0; j < Q.cols(); ++j) c = boost::multiprecision::lcm(c, denominator(Q(i, j)));
    IntMatrix M(Q.rows(), Q.cols());
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index j = 0; j < Q.cols(); ++j) {
            Rational v = Q(i, j) * Rational(c);
            M(i, j) = to_i64(numerator(v), "scaled entry");
        }
    Rationalized out;
    out.c = to_i64(c, "denominator lcm");
    out.ctx = build_ctx(M);
    return out;
}

Rationalized parse_matrix(const std::string& spec_in) {
    const std::string spec = trim(spec_in);
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::BadMatrix, "matrix spec needs a kind prefix: '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    const std::string body = spec.substr(colon + 1);
    const bool rational = kind == "qdiag" || kind == "qfull";
    RationalMatrix Q;
    if (kind == "diag" || kind == "qdiag") {
        auto toks = split(body, ',');
        const int n = static_cast<int>(toks.size());
        if (body.empty()) throw Error(ErrorCode::DimensionZero, "empty diagonal");
        if (n > kMaxDim) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds 12");
        Q = RationalMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) Q(i, i) = parse_rational(toks[static_cast<std::size_t>(i)]);
    } else if (kind == "full" || kind == "qfull") {
        if (body.size() < 4 || body.substr(0, 2) != "[[" || body.substr(body.size() - 2) != "]]")
            throw Error(ErrorCode::BadMatrix, "full matrix must look like [[a,b],[c,d]]");
        std::string inner = body.substr(2, body.size() - 4);
        std::vector<std::string> rows;
        std::size_t pos = 0;
        while (true) {
            auto nxt = inner.find("],[", pos);
            rows.push_back(inner.substr(pos, nxt == std::string::npos ? std::string::npos : nxt - pos));
            if (nxt == std::string::npos) break;
            pos = nxt + 3;
        }
        const int n = static_cast<int>(rows.size());
        if (n > kMaxDim) throw Error(ErrorCode::DimensionTooLarge, "dimension exceeds 12");
        Q = RationalMatrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            auto toks = split(rows[static_cast<std::size_t>(i)], ',');
            if (static_cast<int>(toks.size()) != n) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
            for (int j = 0; j < n; ++j) Q(i, j) = parse_rational(toks[static_cast<std::size_t>(j)]);
        }
    } else {
        throw Error(ErrorCode::BadMatrix, "unknown matrix kind '" + kind + "'");
    }
    if (!rational) {
        for (Eigen::Index i = 0; i < Q.rows(); ++i)
            for (Eigen::Index j = 0; j < Q.cols(); ++j)
                if (denominator(Q(i, j)) != 1)
                    throw Error(ErrorCode::BadMatrix, "integer grammar got a fraction; use qdiag:/qfull:");
    }
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (Q(i, j) != Q(j, i)) throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
    return rationalize(Q);
}

std::string matrix_to_string(const IntMatrix& M) {
    std::ostringstream os;
    os << "full:[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        os << (i ? ",[" : "[");
        for (Eigen::Index j = 0; j < M.cols(); ++j) os << (j ? "," : "") << M(i, j);
        os << "]";
    }
    os << "]";
    return os.str();
}

bool is_diagonal(const IntMatrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (i != j && M(i, j) != 0) return false;
    return true;
}

} // namespace ellipsum
