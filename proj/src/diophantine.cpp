#include "ellipsum/diophantine.hpp"

#include "ellipsum/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <limits>

namespace ellipsum {

namespace {

std::vector<std::string> split_tokens(const std::string& spec) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : spec) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
}

bool is_decimal(const std::string& s) {
    // [+-]digits[.digits][e[+-]digits]
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t d0 = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t nd = i - d0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        std::size_t f0 = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        nd += i - f0;
    }
    if (nd == 0) return false;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        if (!all_digits(s.substr(i))) return false;
        i = s.size();
    }
    return i == s.size();
}

template <class Real>
Real eval_token(const std::string& tok_in) {
    using boost::multiprecision::cpp_int;
    if (tok_in.empty()) throw Error(ErrorCode::BadToken, "empty shift token");
    if (is_decimal(tok_in)) return Real(tok_in);
    std::string tok = tok_in;
    bool neg = false;
    if (tok[0] == '-') {
        neg = true;
        tok = tok.substr(1);
    }
    Real v;
    auto slash = tok.find('/');
    if (slash != std::string::npos) {
        const std::string a = tok.substr(0, slash), b = tok.substr(slash + 1);
        if (!all_digits(a) || !all_digits(b)) throw Error(ErrorCode::BadToken, "bad fraction '" + tok_in + "'");
        if (cpp_int(b) == 0) throw Error(ErrorCode::BadToken, "zero denominator in '" + tok_in + "'");
        v = Real(cpp_int(a)) / Real(cpp_int(b));
    } else if (tok == "phi-1") {
        v = (sqrt(Real(5)) - 1) / 2;
    } else if (tok == "e-2") {
        v = exp(Real(1)) - 2;
    } else if (tok == "pi-3") {
        v = boost::math::constants::pi<Real>() - 3;
    } else if (tok.rfind("sqrt", 0) == 0) {
        std::string rest = tok.substr(4);
        auto dash = rest.find('-');
        std::string k = rest.substr(0, dash);
        if (!all_digits(k)) throw Error(ErrorCode::BadToken, "bad sqrt token '" + tok_in + "'");
        v = sqrt(Real(cpp_int(k)));
        if (dash != std::string::npos) {
            std::string off = rest.substr(dash + 1);
            if (!all_digits(off)) throw Error(ErrorCode::BadToken, "bad sqrt offset in '" + tok_in + "'");
            v -= Real(cpp_int(off));
        }
    } else {
        throw Error(ErrorCode::BadToken, "unknown shift token '" + tok_in + "'");
    }
    return neg ? Real(-v) : v;
}

template <class Real>
DioReport scan_type(const std::vector<Real>& a, std::int64_t q_max) {
    if (q_max < 2) throw Error(ErrorCode::InvalidArgument, "q_max must be at least 2");
    DioReport rep;
    rep.q_max = q_max;
    double best = -std::numeric_limits<double>::infinity();
    for (std::int64_t q = 2; q <= q_max; ++q) {
        Real s2 = 0;
        for (const Real& c : a) {
            Real x = c * q;
            Real r = x - round(x);
            s2 += r * r;
        }
        const double d = static_cast<double>(sqrt(s2));
        if (d < kRationalTol) {
            if (!rep.rational_hit) rep.hit_q = q;
            rep.rational_hit = true;
            continue;
        }
        const double k = 1.0 + std::log(kHurwitzC0 / d) / std::log(static_cast<double>(q));
        if (k > best) {
            best = k;
            rep.worst_q = q;
            rep.worst_dist = d;
        }
    }
    rep.kappa_hat = std::max(1.0, best);
    return rep;
}

} // namespace

template <class Real>
std::vector<Real> eval_shift_spec(const std::string& spec) {
    std::vector<Real> out;
    for (const auto& t : split_tokens(spec)) out.push_back(eval_token<Real>(t));
    return out;
}

template std::vector<HighPrec> eval_shift_spec<HighPrec>(const std::string&);
template std::vector<HighPrec100> eval_shift_spec<HighPrec100>(const std::string&);

std::vector<DD> ShiftVector::as_dd() const {
    std::vector<DD> out;
    out.reserve(comps.size());
    for (const auto& c : comps) {
        double hi = static_cast<double>(c);
        double lo = static_cast<double>(c - HighPrec(hi));
        out.push_back(quick_two_sum(hi, lo));
    }
    return out;
}

std::vector<double> ShiftVector::as_double() const {
    std::vector<double> out;
    for (const auto& c : comps) out.push_back(static_cast<double>(c));
    return out;
}

bool ShiftVector::is_zero() const {
    for (const auto& c : comps)
        if (c != 0) return false;
    return true;
}

ShiftVector parse_shift(const std::string& spec, int n) {
    ShiftVector s;
    s.comps = eval_shift_spec<HighPrec>(spec);
    s.n = static_cast<int>(s.comps.size());
    if (n > 0 && s.n != n)
        throw Error(ErrorCode::DimensionMismatch,
                    "shift has " + std::to_string(s.n) + " components, expected " + std::to_string(n));
    for (const auto& c : s.comps)
        if (!isfinite(c)) throw Error(ErrorCode::BadToken, "non-finite shift component");
    s.spec = spec;
    return s;
}

ShiftVector zero_shift(int n) {
    ShiftVector s;
    s.n = n;
    s.comps.assign(static_cast<std::size_t>(n), HighPrec(0));
    for (int i = 0; i < n; ++i) s.spec += (i ? ",0" : "0");
    return s;
}

ShiftVector negated(const ShiftVector& a) {
    ShiftVector s = a;
    std::string spec;
    auto toks = split_tokens(a.spec);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        s.comps[i] = -a.comps[i];
        std::string t = toks[i];
        t = (t[0] == '-') ? t.substr(1) : "-" + t;
        spec += (i ? "," : "") + t;
    }
    s.spec = spec;
    s.dio_meta.reset();
    return s;
}

DioReport estimate_type(const ShiftVector& alpha, std::int64_t q_max) { return scan_type(alpha.comps, q_max); }

DioReport estimate_type_100(const ShiftVector& alpha, std::int64_t q_max) {
    return scan_type(eval_shift_spec<HighPrec100>(alpha.spec), q_max);
}

RelationResult independence_scan(const ShiftVector& alpha, std::int64_t coeff_bound) {
    if (coeff_bound < 1) throw Error(ErrorCode::InvalidArgument, "coeff_bound must be at least 1");
    const int n = alpha.n;
    if (std::pow(static_cast<double>(coeff_bound), n + 1) > 1e9)
        throw Error(ErrorCode::SearchSpaceTooLarge, "bound^(n+1) exceeds 1e9");
    const auto a = alpha.as_dd();
    RelationResult res;
    std::vector<std::int64_t> c(static_cast<std::size_t>(n));
    for (std::int64_t s = 1; s <= coeff_bound; ++s) {
        // lexicographic over [-s, s]^n, keeping the shell max|c_i| = s
        std::fill(c.begin(), c.end(), -s);
        while (true) {
            std::int64_t mx = 0;
            int first = -1;
            for (int i = 0; i < n; ++i) {
                mx = std::max<std::int64_t>(mx, std::llabs(c[i]));
                if (first < 0 && c[i] != 0) first = i;
            }
            if (mx == s && first >= 0 && c[first] > 0) {
                DD dot(0.0);
                for (int i = 0; i < n; ++i) dot += a[i] * static_cast<double>(c[i]);
                const double last = -std::nearbyint(dot.hi);
                if (std::fabs(last) <= static_cast<double>(coeff_bound)) {
                    DD r = dot + DD(last);
                    if (std::fabs(r.to_double()) < 1e-24) {
                        res.found = true;
                        res.witness.assign(c.begin(), c.end());
                        res.witness.push_back(static_cast<std::int64_t>(last));
                        return res;
                    }
                }
            }
            int k = n - 1;
            while (k >= 0 && c[k] == s) c[k--] = -s;
            if (k < 0) break;
            ++c[k];
        }
    }
    return res;
}

} // namespace ellipsum
