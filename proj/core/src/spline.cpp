#include "uuaudit/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "uuaudit/errors.hpp"

namespace uuaudit {
namespace {

// Pooled data on distinct, normalised abscissae.
struct Pooled {
  std::vector<double> t;
  std::vector<double> y;  // weighted mean response at t
  std::vector<double> w;  // number of observations at t
  double within_ss = 0.0; // residual sum of squares inside ties
  double total_weight = 0.0;
};

// Symmetric pentadiagonal matrix: d0 main diagonal, d1 first, d2 second
// off-diagonal.
struct Penta {
  std::vector<double> d0, d1, d2;
};

struct Factor {
  std::vector<double> diag;  // D
  std::vector<double> l1;    // L(i+1, i)
  std::vector<double> l2;    // L(i+2, i)
};

Factor ldlt(const Penta& m) {
  const std::size_t n = m.d0.size();
  Factor f{std::vector<double>(n), std::vector<double>(n, 0.0),
           std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    double d = m.d0[i];
    if (i >= 1) d -= f.l1[i - 1] * f.l1[i - 1] * f.diag[i - 1];
    if (i >= 2) d -= f.l2[i - 2] * f.l2[i - 2] * f.diag[i - 2];
    f.diag[i] = d;
    if (i + 1 < n) {
      double v = m.d1[i];
      if (i >= 1) v -= f.l2[i - 1] * f.l1[i - 1] * f.diag[i - 1];
      f.l1[i] = v / d;
    }
    if (i + 2 < n) f.l2[i] = m.d2[i] / d;
  }
  return f;
}

std::vector<double> solve(const Factor& f, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 1) b[i] -= f.l1[i - 1] * b[i - 1];
    if (i >= 2) b[i] -= f.l2[i - 2] * b[i - 2];
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= f.diag[i];
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) b[k] -= f.l1[k] * b[k + 1];
    if (k + 2 < n) b[k] -= f.l2[k] * b[k + 2];
  }
  return b;
}

// Entries of the inverse inside the band |i - j| <= 2 (Hutchinson & de Hoog).
Penta band_of_inverse(const Factor& f) {
  const std::size_t n = f.diag.size();
  Penta s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
          std::vector<double>(n, 0.0)};
  for (std::size_t k = n; k-- > 0;) {
    const double a = k + 1 < n ? f.l1[k] : 0.0;
    const double b = k + 2 < n ? f.l2[k] : 0.0;
    const double s11 = k + 1 < n ? s.d0[k + 1] : 0.0;
    const double s12 = k + 2 < n ? s.d1[k + 1] : 0.0;
    const double s22 = k + 2 < n ? s.d0[k + 2] : 0.0;
    if (k + 2 < n) s.d2[k] = -a * s12 - b * s22;
    if (k + 1 < n) s.d1[k] = -a * s11 - b * s12;
    s.d0[k] = 1.0 / f.diag[k] - a * s.d1[k] - b * s.d2[k];
  }
  return s;
}

struct Evaluation {
  std::vector<double> values;
  std::vector<double> gamma;  // interior second derivatives
  double rss = 0.0;
  double df = 0.0;
  double gcv = 0.0;
};

class Reinsch {
 public:
  explicit Reinsch(const Pooled& p) : p_(p), m_(p.t.size()) {
    h_.resize(m_ - 1);
    for (std::size_t i = 0; i + 1 < m_; ++i) h_[i] = p.t[i + 1] - p.t[i];
    // Q^T y and the constant matrices R, Q^T W^{-1} Q.
    const std::size_t k = m_ - 2;
    qty_.resize(k);
    r_ = Penta{std::vector<double>(k), std::vector<double>(k, 0.0),
               std::vector<double>(k, 0.0)};
    qwq_ = r_;
    for (std::size_t j = 0; j < k; ++j) {
      const auto col = q_column(j);
      qty_[j] = col[0] * p.y[j] + col[1] * p.y[j + 1] + col[2] * p.y[j + 2];
      r_.d0[j] = (h_[j] + h_[j + 1]) / 3.0;
      if (j + 1 < k) r_.d1[j] = h_[j + 1] / 6.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
      const auto cj = q_column(j);
      qwq_.d0[j] = cj[0] * cj[0] / p.w[j] + cj[1] * cj[1] / p.w[j + 1] +
                   cj[2] * cj[2] / p.w[j + 2];
      if (j + 1 < k) {
        const auto cn = q_column(j + 1);
        qwq_.d1[j] = cj[1] * cn[0] / p.w[j + 1] + cj[2] * cn[1] / p.w[j + 2];
      }
      if (j + 2 < k) {
        const auto cn = q_column(j + 2);
        qwq_.d2[j] = cj[2] * cn[0] / p.w[j + 2];
      }
    }
  }

  Evaluation evaluate(double lambda) const {
    const std::size_t k = m_ - 2;
    Penta m = r_;
    for (std::size_t j = 0; j < k; ++j) {
      m.d0[j] += lambda * qwq_.d0[j];
      m.d1[j] += lambda * qwq_.d1[j];
      m.d2[j] += lambda * qwq_.d2[j];
    }
    const Factor f = ldlt(m);
    Evaluation e;
    e.gamma = solve(f, qty_);
    // g = y - lambda W^{-1} Q gamma
    e.values = p_.y;
    for (std::size_t j = 0; j < k; ++j) {
      const auto col = q_column(j);
      for (std::size_t r = 0; r < 3; ++r) {
        e.values[j + r] -= lambda * col[r] * e.gamma[j] / p_.w[j + r];
      }
    }
    e.rss = p_.within_ss;
    for (std::size_t i = 0; i < m_; ++i) {
      const double r = p_.y[i] - e.values[i];
      e.rss += p_.w[i] * r * r;
    }
    // tr(A) = m - lambda * tr(M^{-1} Q^T W^{-1} Q)
    const Penta s = band_of_inverse(f);
    double tr = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      tr += s.d0[j] * qwq_.d0[j];
      tr += 2.0 * s.d1[j] * qwq_.d1[j];
      tr += 2.0 * s.d2[j] * qwq_.d2[j];
    }
    e.df = static_cast<double>(m_) - lambda * tr;
    const double denom = 1.0 - e.df / p_.total_weight;
    e.gcv = (e.rss / p_.total_weight) / (denom * denom);
    return e;
  }

 private:
  // Nonzeros of column j of Q: rows j, j+1, j+2.
  std::array<double, 3> q_column(std::size_t j) const {
    return {1.0 / h_[j], -1.0 / h_[j] - 1.0 / h_[j + 1], 1.0 / h_[j + 1]};
  }

  const Pooled& p_;
  std::size_t m_;
  std::vector<double> h_;
  std::vector<double> qty_;
  Penta r_;
  Penta qwq_;
};

}  // namespace

SmoothingSpline SmoothingSpline::fit(std::span<const double> x,
                                     std::span<const double> y,
                                     std::optional<double> lambda) {
  if (x.size() != y.size()) throw DimensionError("x and y differ in length");
  if (x.empty()) throw InsufficientDataError("no data to smooth");

  SmoothingSpline s;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  s.x0_ = *lo;
  s.scale_ = *hi > *lo ? *hi - *lo : 1.0;

  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Pooled p;
  p.total_weight = static_cast<double>(x.size());
  for (std::size_t pos = 0; pos < order.size();) {
    const double xv = x[order[pos]];
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t cnt = 0;
    for (; pos < order.size() && x[order[pos]] == xv; ++pos, ++cnt) {
      sum += y[order[pos]];
      sumsq += y[order[pos]] * y[order[pos]];
    }
    const double mean = sum / static_cast<double>(cnt);
    p.t.push_back((xv - s.x0_) / s.scale_);
    p.y.push_back(mean);
    p.w.push_back(static_cast<double>(cnt));
    p.within_ss += std::max(0.0, sumsq - static_cast<double>(cnt) * mean * mean);
  }
  s.knots_ = p.t;
  const std::size_t m = p.t.size();

  if (m < 3) {
    // Too few distinct abscissae for a penalty: weighted least-squares line
    // (or constant).
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sw += p.w[i];
      sx += p.w[i] * p.t[i];
      sy += p.w[i] * p.y[i];
      sxx += p.w[i] * p.t[i] * p.t[i];
      sxy += p.w[i] * p.t[i] * p.y[i];
    }
    const double var = sxx - sx * sx / sw;
    const double slope = var > 0 ? (sxy - sx * sy / sw) / var : 0.0;
    const double icpt = (sy - slope * sx) / sw;
    for (std::size_t i = 0; i < m; ++i) s.values_.push_back(icpt + slope * p.t[i]);
    s.second_.assign(m, 0.0);
    s.df_ = static_cast<double>(m);
    return s;
  }

  const Reinsch solver(p);
  Evaluation best;
  if (lambda) {
    if (!(*lambda >= 0.0)) throw DomainError("smoothing penalty must be >= 0");
    // Penalty is defined on the original x scale; rescale to unit range.
    s.lambda_ = *lambda;
    best = solver.evaluate(*lambda / (s.scale_ * s.scale_ * s.scale_));
  } else {
    // GCV on a log grid, then golden-section refinement around the best cell.
    const double lo_exp = -12.0;
    const double hi_exp = 4.0;
    const int cells = 64;
    auto at = [&](double e) { return solver.evaluate(std::pow(10.0, e)); };
    int best_i = 0;
    double best_score = 0.0;
    for (int i = 0; i <= cells; ++i) {
      const double e = lo_exp + (hi_exp - lo_exp) * i / cells;
      const double g = at(e).gcv;
      if (i == 0 || g < best_score) {
        best_score = g;
        best_i = i;
      }
    }
    const double step = (hi_exp - lo_exp) / cells;
    double a = lo_exp + step * std::max(0, best_i - 1);
    double b = lo_exp + step * std::min(cells, best_i + 1);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double gc = at(c).gcv;
    double gd = at(d).gcv;
    for (int it = 0; it < 40; ++it) {
      if (gc < gd) {
        b = d;
        d = c;
        gd = gc;
        c = b - ratio * (b - a);
        gc = at(c).gcv;
      } else {
        a = c;
        c = d;
        gc = gd;
        d = a + ratio * (b - a);
        gd = at(d).gcv;
      }
    }
    const double e = 0.5 * (a + b);
    best = at(e);
    s.lambda_ = std::pow(10.0, e) * s.scale_ * s.scale_ * s.scale_;
  }
  s.values_ = best.values;
  s.second_.assign(m, 0.0);
  for (std::size_t j = 0; j + 2 < m; ++j) s.second_[j + 1] = best.gamma[j];
  s.gcv_ = best.gcv;
  s.df_ = best.df;
  return s;
}

double SmoothingSpline::operator()(double xv) const {
  const double t = (xv - x0_) / scale_;
  const std::size_t m = knots_.size();
  if (m == 1) return values_[0];
  if (t <= knots_.front() || t >= knots_.back()) {
    // Natural spline: linear beyond the boundary knots.
    const bool left = t <= knots_.front();
    const std::size_t i = left ? 0 : m - 2;
    const double h = knots_[i + 1] - knots_[i];
    const double slope = (values_[i + 1] - values_[i]) / h +
                         (left ? -h * (2.0 * second_[0] + second_[1]) / 6.0
                               : h * (second_[m - 2] + 2.0 * second_[m - 1]) / 6.0);
    const double base = left ? values_.front() : values_.back();
    const double from = left ? knots_.front() : knots_.back();
    return base + slope * (t - from);
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double h = knots_[i + 1] - knots_[i];
  const double dl = t - knots_[i];
  const double dr = knots_[i + 1] - t;
  return (dl * values_[i + 1] + dr * values_[i]) / h -
         dl * dr / 6.0 *
             ((1.0 + dl / h) * second_[i + 1] + (1.0 + dr / h) * second_[i]);
}

}  // namespace uuaudit
