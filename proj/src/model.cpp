#include "hawkes_stein/model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hawkes_stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// Segment of the piecewise-linear table between nodes k and k+1.
struct Segment {
  double x0, x1, y0, y1;
};

// int |y| and int t |y| over a linear segment, splitting at a sign change.
void segment_abs_moments(const Segment& s, double& l1, double& m1) {
  auto same_sign = [](const Segment& q, double& a, double& b) {
    const double h = q.x1 - q.x0;
    const double y0 = std::abs(q.y0), y1 = std::abs(q.y1);
    a += 0.5 * h * (y0 + y1);
    b += h / 6.0 * (2.0 * q.x0 * y0 + q.x0 * y1 + q.x1 * y0 + 2.0 * q.x1 * y1);
  };
  if ((s.y0 >= 0.0 && s.y1 >= 0.0) || (s.y0 <= 0.0 && s.y1 <= 0.0)) {
    same_sign(s, l1, m1);
    return;
  }
  const double xc = s.x0 + (s.x1 - s.x0) * s.y0 / (s.y0 - s.y1);
  same_sign({s.x0, xc, s.y0, 0.0}, l1, m1);
  same_sign({xc, s.x1, 0.0, s.y1}, l1, m1);
}

double segment_integral(const Segment& s, double a, double b) {
  // int_a^b of the linear interpolant, [a, b] inside [x0, x1]
  const double h = s.x1 - s.x0;
  auto y = [&](double x) { return s.y0 + (s.y1 - s.y0) * (x - s.x0) / h; };
  return 0.5 * (b - a) * (y(a) + y(b));
}

}  // namespace

// ---------------------------------------------------------------- Kernel

Kernel Kernel::exponential(double scale, double rate) {
  require(rate > 0.0 && std::isfinite(scale), "exponential kernel: rate must be > 0");
  Kernel k;
  k.family_ = KernelFamily::Exponential;
  k.scale_ = scale;
  k.p1_ = rate;
  k.l1_norm_ = std::abs(scale);
  k.first_moment_ = std::abs(scale) / rate;
  return k;
}

Kernel Kernel::power_law(double scale, double delta, double exponent) {
  require(delta > 0.0 && exponent > 2.0 && std::isfinite(scale),
          "power-law kernel: need delta > 0 and exponent > 2");
  Kernel k;
  k.family_ = KernelFamily::PowerLaw;
  k.scale_ = scale;
  k.p1_ = delta;
  k.p2_ = exponent;
  k.l1_norm_ = std::abs(scale);
  k.first_moment_ = std::abs(scale) * delta / (exponent - 2.0);
  return k;
}

Kernel Kernel::compact_polynomial(double scale, double support, double power) {
  require(support > 0.0 && power >= 0.0 && std::isfinite(scale),
          "compact polynomial kernel: need support > 0 and power >= 0");
  Kernel k;
  k.family_ = KernelFamily::CompactPolynomial;
  k.scale_ = scale;
  k.p1_ = support;
  k.p2_ = power;
  k.l1_norm_ = std::abs(scale);
  k.first_moment_ = std::abs(scale) * support / (power + 2.0);
  return k;
}

Kernel Kernel::tabulated(double dt, std::vector<double> values) {
  require(dt > 0.0 && values.size() >= 2, "tabulated kernel: need dt > 0 and >= 2 nodes");
  for (double v : values) require(std::isfinite(v), "tabulated kernel: non-finite value");
  Kernel k;
  k.family_ = KernelFamily::Tabulated;
  k.p1_ = dt;
  k.table_ = std::move(values);
  double l1 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i + 1 < k.table_.size(); ++i) {
    segment_abs_moments({i * dt, (i + 1) * dt, k.table_[i], k.table_[i + 1]}, l1, m1);
  }
  k.l1_norm_ = l1;
  k.first_moment_ = m1;
  return k;
}

double Kernel::operator()(double t) const {
  if (t < 0.0) return 0.0;
  switch (family_) {
    case KernelFamily::Exponential:
      return scale_ * p1_ * std::exp(-p1_ * t);
    case KernelFamily::PowerLaw:
      return scale_ * (p2_ - 1.0) / p1_ * std::pow(1.0 + t / p1_, -p2_);
    case KernelFamily::CompactPolynomial:
      if (t > p1_) return 0.0;
      return scale_ * (p2_ + 1.0) / p1_ * std::pow(1.0 - t / p1_, p2_);
    case KernelFamily::Tabulated: {
      const double x = t / p1_;
      const auto i = static_cast<std::size_t>(x);
      if (i + 1 >= table_.size()) return i + 1 == table_.size() && x == double(i) ? table_[i] : 0.0;
      const double w = x - static_cast<double>(i);
      return table_[i] + w * (table_[i + 1] - table_[i]);
    }
  }
  return 0.0;
}

std::optional<double> Kernel::support() const {
  if (family_ == KernelFamily::CompactPolynomial) return p1_;
  if (family_ == KernelFamily::Tabulated) return p1_ * static_cast<double>(table_.size() - 1);
  return std::nullopt;
}

bool Kernel::non_negative() const {
  if (family_ == KernelFamily::Tabulated) {
    return std::all_of(table_.begin(), table_.end(), [](double v) { return v >= 0.0; });
  }
  return scale_ >= 0.0;
}

std::optional<ExponentialForm> Kernel::exponential_form() const {
  if (family_ != KernelFamily::Exponential) return std::nullopt;
  return ExponentialForm{scale_ * p1_, p1_};
}

double Kernel::sup_on(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::max(hi, lo);
  if (family_ == KernelFamily::Tabulated) {
    double best = std::max((*this)(lo), (*this)(hi));
    const auto n = table_.size();
    const auto last = p1_ * static_cast<double>(n - 1);
    if (hi > last) best = std::max(best, 0.0);
    for (auto i = static_cast<std::size_t>(std::ceil(lo / p1_)); i < n && i * p1_ <= hi; ++i) {
      best = std::max(best, table_[i]);
    }
    return best;
  }
  // |phi| is non-increasing for the parametric families.
  return scale_ >= 0.0 ? (*this)(lo) : (*this)(hi);
}

double Kernel::inf_on(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::max(hi, lo);
  if (family_ == KernelFamily::Tabulated) {
    double best = std::min((*this)(lo), (*this)(hi));
    const auto n = table_.size();
    const auto last = p1_ * static_cast<double>(n - 1);
    if (hi > last) best = std::min(best, 0.0);
    for (auto i = static_cast<std::size_t>(std::ceil(lo / p1_)); i < n && i * p1_ <= hi; ++i) {
      best = std::min(best, table_[i]);
    }
    return best;
  }
  return scale_ >= 0.0 ? (*this)(hi) : (*this)(lo);
}

double Kernel::integral(double a, double b) const {
  a = std::max(a, 0.0);
  if (!(b > a)) return 0.0;
  switch (family_) {
    case KernelFamily::Exponential:
      return scale_ * (std::exp(-p1_ * a) - std::exp(-p1_ * b));
    case KernelFamily::PowerLaw:
      return scale_ * (std::pow(1.0 + a / p1_, 1.0 - p2_) - std::pow(1.0 + b / p1_, 1.0 - p2_));
    case KernelFamily::CompactPolynomial: {
      auto tail = [&](double x) { return x >= p1_ ? 0.0 : std::pow(1.0 - x / p1_, p2_ + 1.0); };
      return scale_ * (tail(a) - tail(b));
    }
    case KernelFamily::Tabulated: {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
        const Segment seg{i * p1_, (i + 1) * p1_, table_[i], table_[i + 1]};
        const double lo = std::max(a, seg.x0), hi = std::min(b, seg.x1);
        if (hi > lo) s += segment_integral(seg, lo, hi);
      }
      return s;
    }
  }
  return 0.0;
}

double Kernel::tail_l1(double from) const {
  from = std::max(from, 0.0);
  switch (family_) {
    case KernelFamily::Exponential:
      return std::abs(scale_) * std::exp(-p1_ * from);
    case KernelFamily::PowerLaw:
      return std::abs(scale_) * std::pow(1.0 + from / p1_, 1.0 - p2_);
    case KernelFamily::CompactPolynomial:
      return std::abs(integral(from, p1_));
    case KernelFamily::Tabulated: {
      double l1 = 0.0, m1 = 0.0;
      for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
        Segment seg{i * p1_, (i + 1) * p1_, table_[i], table_[i + 1]};
        if (seg.x1 <= from) continue;
        if (seg.x0 < from) {
          seg.y0 = (*this)(from);
          seg.x0 = from;
        }
        segment_abs_moments(seg, l1, m1);
      }
      return l1;
    }
  }
  return 0.0;
}

double Kernel::effective_support(double tolerance) const {
  switch (family_) {
    case KernelFamily::Exponential:
      return std::log(1.0 / tolerance) / p1_;
    case KernelFamily::PowerLaw:
      return p1_ * (std::pow(tolerance, -1.0 / p2_) - 1.0);
    case KernelFamily::CompactPolynomial:
    case KernelFamily::Tabulated:
      return *support();
  }
  return kInf;
}

Kernel Kernel::scaled(double factor) const {
  Kernel k = *this;
  if (family_ == KernelFamily::Tabulated) {
    for (double& v : k.table_) v *= factor;
  } else {
    k.scale_ *= factor;
  }
  k.l1_norm_ *= std::abs(factor);
  k.first_moment_ *= std::abs(factor);
  return k;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  switch (family_) {
    case KernelFamily::Exponential:
      os << "exponential(scale=" << scale_ << ", rate=" << p1_ << ")";
      break;
    case KernelFamily::PowerLaw:
      os << "power_law(scale=" << scale_ << ", delta=" << p1_ << ", exponent=" << p2_ << ")";
      break;
    case KernelFamily::CompactPolynomial:
      os << "compact_polynomial(scale=" << scale_ << ", support=" << p1_ << ", power=" << p2_
         << ")";
      break;
    case KernelFamily::Tabulated:
      os << "tabulated(dt=" << p1_ << ", nodes=" << table_.size() << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- Link

Link Link::identity() { return Link{}; }

Link Link::positive_part() {
  Link h;
  h.family_ = LinkFamily::PositivePart;
  return h;
}

Link Link::affine_clipped(double intercept, double slope, double cap) {
  require(std::isfinite(intercept) && std::isfinite(slope) && cap > 0.0,
          "affine_clipped link: bad parameters");
  Link h;
  h.family_ = LinkFamily::AffineClipped;
  h.a_ = intercept;
  h.b_ = slope;
  h.c_ = cap;
  h.lipschitz_ = std::abs(slope);
  h.monotonicity_ = slope >= 0.0 ? Monotonicity::NonDecreasing : Monotonicity::NonIncreasing;
  return h;
}

Link Link::sigmoid(double scale, double steepness) {
  require(scale > 0.0 && steepness > 0.0, "sigmoid link: scale and steepness must be > 0");
  Link h;
  h.family_ = LinkFamily::Sigmoid;
  h.a_ = scale;
  h.b_ = steepness;
  h.lipschitz_ = scale * steepness / 4.0;
  return h;
}

Link Link::tabulated(double x0, double dx, std::vector<double> values) {
  require(dx > 0.0 && values.size() >= 2, "tabulated link: need dx > 0 and >= 2 nodes");
  bool up = true, down = true;
  double lip = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(values[i] >= 0.0 && std::isfinite(values[i]), "tabulated link: values must be >= 0");
    if (i > 0) {
      const double d = values[i] - values[i - 1];
      up = up && d >= 0.0;
      down = down && d <= 0.0;
      lip = std::max(lip, std::abs(d) / dx);
    }
  }
  Link h;
  h.family_ = LinkFamily::Tabulated;
  h.a_ = x0;
  h.b_ = dx;
  h.table_ = std::move(values);
  h.lipschitz_ = lip;
  h.monotonicity_ = up ? Monotonicity::NonDecreasing
                       : (down ? Monotonicity::NonIncreasing : Monotonicity::None);
  return h;
}

double Link::operator()(double x) const {
  switch (family_) {
    case LinkFamily::Identity:
      return x;
    case LinkFamily::PositivePart:
      return x > 0.0 ? x : 0.0;
    case LinkFamily::AffineClipped:
      return std::clamp(a_ + b_ * x, 0.0, c_);
    case LinkFamily::Sigmoid:
      return a_ / (1.0 + std::exp(-b_ * x));
    case LinkFamily::Tabulated: {
      const double u = (x - a_) / b_;
      if (u <= 0.0) return table_.front();
      const auto i = static_cast<std::size_t>(u);
      if (i + 1 >= table_.size()) return table_.back();
      const double w = u - static_cast<double>(i);
      return table_[i] + w * (table_[i + 1] - table_[i]);
    }
  }
  return 0.0;
}

std::vector<LinearPiece> Link::linear_pieces() const {
  switch (family_) {
    case LinkFamily::Identity:
      return {{-kInf, kInf, 1.0, 0.0}};
    case LinkFamily::PositivePart:
      return {{-kInf, 0.0, 0.0, 0.0}, {0.0, kInf, 1.0, 0.0}};
    case LinkFamily::AffineClipped: {
      if (b_ == 0.0) return {{-kInf, kInf, 0.0, std::clamp(a_, 0.0, c_)}};
      const double x_zero = -a_ / b_;
      const double x_cap = std::isfinite(c_) ? (c_ - a_) / b_ : (b_ > 0 ? kInf : -kInf);
      if (b_ > 0.0) {
        std::vector<LinearPiece> p{{-kInf, x_zero, 0.0, 0.0}, {x_zero, x_cap, b_, a_}};
        if (std::isfinite(x_cap)) p.push_back({x_cap, kInf, 0.0, c_});
        return p;
      }
      std::vector<LinearPiece> p;
      if (std::isfinite(x_cap)) p.push_back({-kInf, x_cap, 0.0, c_});
      p.push_back({std::isfinite(x_cap) ? x_cap : -kInf, x_zero, b_, a_});
      p.push_back({x_zero, kInf, 0.0, 0.0});
      return p;
    }
    case LinkFamily::Sigmoid:
      return {};
    case LinkFamily::Tabulated: {
      std::vector<LinearPiece> p;
      p.push_back({-kInf, a_, 0.0, table_.front()});
      for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
        const double x0 = a_ + i * b_, x1 = a_ + (i + 1) * b_;
        const double slope = (table_[i + 1] - table_[i]) / b_;
        p.push_back({x0, x1, slope, table_[i] - slope * x0});
      }
      p.push_back({a_ + (table_.size() - 1) * b_, kInf, 0.0, table_.back()});
      return p;
    }
  }
  return {};
}

double Link::sup_on(double lo, double hi) const {
  if (monotonicity_ == Monotonicity::NonDecreasing) return (*this)(hi);
  if (monotonicity_ == Monotonicity::NonIncreasing) return (*this)(lo);
  if (family_ == LinkFamily::Tabulated) {
    double best = std::max((*this)(lo), (*this)(hi));
    for (std::size_t i = 0; i < table_.size(); ++i) {
      const double x = a_ + i * b_;
      if (x >= lo && x <= hi) best = std::max(best, table_[i]);
    }
    return best;
  }
  return std::max((*this)(lo), (*this)(hi)) + lipschitz_ * (hi - lo) / 2.0;
}

std::string Link::describe() const {
  std::ostringstream os;
  switch (family_) {
    case LinkFamily::Identity:
      os << "identity";
      break;
    case LinkFamily::PositivePart:
      os << "positive_part";
      break;
    case LinkFamily::AffineClipped:
      os << "affine_clipped(intercept=" << a_ << ", slope=" << b_ << ", cap=" << c_ << ")";
      break;
    case LinkFamily::Sigmoid:
      os << "sigmoid(scale=" << a_ << ", steepness=" << b_ << ")";
      break;
    case LinkFamily::Tabulated:
      os << "tabulated(x0=" << a_ << ", dx=" << b_ << ", nodes=" << table_.size() << ")";
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------- Profile

Profile Profile::constant(double value) { return affine(value, 0.0); }

Profile Profile::affine(double intercept, double slope) {
  Profile p;
  p.intercept_ = intercept;
  p.slope_ = slope;
  p.lipschitz_ = std::abs(slope);
  return p;
}

Profile Profile::callable(std::function<double(double)> f, double lipschitz) {
  require(static_cast<bool>(f) && lipschitz >= 0.0, "callable profile: need f and lipschitz >= 0");
  Profile p;
  p.fn_ = std::move(f);
  p.lipschitz_ = lipschitz;
  return p;
}

double Profile::operator()(double x) const { return fn_ ? fn_(x) : intercept_ + slope_ * x; }

double Profile::sup_on(double lo, double hi) const {
  if (fn_) return std::max(fn_(lo), fn_(hi)) + lipschitz_ * (hi - lo) / 2.0;
  return std::max((*this)(lo), (*this)(hi));
}

double Profile::inf_on(double lo, double hi) const {
  if (fn_) return std::min(fn_(lo), fn_(hi)) - lipschitz_ * (hi - lo) / 2.0;
  return std::min((*this)(lo), (*this)(hi));
}

// ---------------------------------------------------------------- DiscreteKernel

DiscreteKernel DiscreteKernel::finite(std::vector<double> alphas) {
  DiscreteKernel d;
  d.values_ = std::move(alphas);
  for (std::size_t k = 0; k < d.values_.size(); ++k) {
    d.total_ += d.values_[k];
    d.moment_ += static_cast<double>(k + 1) * d.values_[k];
  }
  return d;
}

DiscreteKernel DiscreteKernel::geometric(double first, double ratio) {
  require(ratio >= 0.0 && ratio < 1.0, "geometric discrete kernel: need 0 <= ratio < 1");
  DiscreteKernel d;
  d.geometric_ = true;
  d.first_ = first;
  d.ratio_ = ratio;
  d.total_ = first / (1.0 - ratio);
  d.moment_ = first / ((1.0 - ratio) * (1.0 - ratio));
  return d;
}

DiscreteKernel DiscreteKernel::truncated_geometric(double first, double ratio, int terms) {
  require(terms >= 0, "truncated geometric: terms must be >= 0");
  std::vector<double> v(static_cast<std::size_t>(terms));
  double a = first;
  for (auto& x : v) {
    x = a;
    a *= ratio;
  }
  return finite(std::move(v));
}

double DiscreteKernel::operator()(int k) const {
  if (k < 1) return 0.0;
  if (geometric_) return first_ * std::pow(ratio_, k - 1);
  return static_cast<std::size_t>(k) <= values_.size() ? values_[k - 1] : 0.0;
}

bool DiscreteKernel::non_negative() const {
  if (geometric_) return first_ >= 0.0;
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

// ---------------------------------------------------------------- ModelSpec

std::string variant_name(const ModelSpec& spec) {
  static const char* names[] = {"empty_history", "stationaryized", "locally_stationary", "discrete",
                                "nearly_unstable"};
  return names[spec.index()];
}

namespace {

void check_kernel(const Kernel& k, std::vector<Violation>& out) {
  if (!std::isfinite(k.l1_norm())) out.push_back({"||phi||_1 < inf", k.l1_norm(), "kernel not integrable"});
  if (!std::isfinite(k.first_moment())) {
    out.push_back({"int t|phi(t)|dt < inf", k.first_moment(), "kernel first moment infinite"});
  }
}

void check_nonlinear(double mu, const Kernel& kernel, const Link& link, std::vector<Violation>& out) {
  check_kernel(kernel, out);
  if (!std::isfinite(mu)) out.push_back({"mu finite", mu, "baseline must be finite"});
  const double r = link.lipschitz() * kernel.l1_norm();
  if (!(r < 1.0)) {
    std::ostringstream os;
    os << "alpha*||phi||_1 = " << r << " >= 1";
    out.push_back({"alpha*||phi||_1 < 1", r, os.str()});
  }
  if (link.is_identity() && (!kernel.non_negative() || mu < 0.0)) {
    out.push_back({"identity link needs phi >= 0 and mu >= 0", mu,
                   "identity link with a signed kernel or negative baseline gives negative intensity"});
  }
}

}  // namespace

std::vector<Violation> validate(const ModelSpec& spec) {
  std::vector<Violation> out;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, EmptyHistory>) {
          check_nonlinear(m.mu, m.kernel, m.link, out);
        } else if constexpr (std::is_same_v<M, Stationaryized>) {
          check_nonlinear(m.mu, m.kernel, m.link, out);
          if (!(m.burn_in > 0.0)) out.push_back({"burn_in > 0", m.burn_in, "burn-in must be positive"});
        } else if constexpr (std::is_same_v<M, LocallyStationary>) {
          check_kernel(m.kernel, out);
          const double r = m.gamma_fn.sup() * m.kernel.l1_norm();
          if (!(r < 1.0)) {
            std::ostringstream os;
            os << "||phi||_1 * sup gamma = " << r << " >= 1";
            out.push_back({"||phi||_1 sup|gamma| < 1", r, os.str()});
          }
          if (!m.kernel.non_negative()) out.push_back({"phi >= 0", 0.0, "kernel must be non-negative"});
          if (m.mu_fn.inf() < 0.0) out.push_back({"mu(x) >= 0", m.mu_fn.inf(), "baseline must be >= 0"});
          if (m.gamma_fn.inf() < 0.0) {
            out.push_back({"gamma(x) >= 0", m.gamma_fn.inf(), "reproduction function must be >= 0"});
          }
        } else if constexpr (std::is_same_v<M, Discrete>) {
          if (!(m.alpha0 > 0.0)) out.push_back({"alpha_0 > 0", m.alpha0, "alpha_0 must be positive"});
          if (!m.alphas.non_negative()) out.push_back({"alpha_k >= 0", 0.0, "alpha_k must be >= 0"});
          if (!(m.alphas.total() < 1.0)) {
            std::ostringstream os;
            os << "sum alpha_k = " << m.alphas.total() << " >= 1";
            out.push_back({"sum alpha_k < 1", m.alphas.total(), os.str()});
          }
          if (!std::isfinite(m.alphas.first_moment())) {
            out.push_back({"sum k alpha_k < inf", m.alphas.first_moment(), "first moment infinite"});
          }
        } else if constexpr (std::is_same_v<M, NearlyUnstable>) {
          check_kernel(m.kernel, out);
          if (!(m.mu > 0.0)) out.push_back({"mu > 0", m.mu, "baseline must be positive"});
          if (!(m.horizon_T > 1.0)) out.push_back({"T > 1", m.horizon_T, "need a_T = 1 - 1/T in (0, 1)"});
          if (std::abs(m.kernel.l1_norm() - 1.0) > 1e-9) {
            out.push_back({"||phi||_1 = 1", m.kernel.l1_norm(), "nearly unstable kernel must have unit mass"});
          }
          if (!m.kernel.non_negative()) out.push_back({"phi >= 0", 0.0, "kernel must be non-negative"});
          const double check = m.horizon_T * (1.0 - m.a_T());
          if (std::abs(check - 1.0) > 1e-9) out.push_back({"T(1-a_T) = 1", check, "a_T inconsistent"});
        }
      },
      spec);
  return out;
}

double default_burn_in(const Kernel& kernel, const Link& link, double tolerance) {
  const double alpha = link.lipschitz();
  if (alpha * kernel.l1_norm() < tolerance) return 1.0;
  if (auto s = kernel.support()) return std::max(*s, 1.0);
  double b = 1.0;
  while (alpha * kernel.tail_l1(b) >= tolerance) b *= 2.0;
  double lo = b / 2.0, hi = b;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (alpha * kernel.tail_l1(mid) >= tolerance ? lo : hi) = mid;
  }
  return hi;
}

DerivedConstants derived_constants(const ModelSpec& spec, Normalization normalization) {
  const auto violations = validate(spec);
  if (!violations.empty()) {
    throw std::invalid_argument("derived_constants: invalid spec: " + violations.front().message);
  }
  DerivedConstants out;
  const bool unit_variance = normalization != Normalization::UnitG;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, EmptyHistory> || std::is_same_v<M, Stationaryized>) {
          out.branching_ratio = m.link.lipschitz() * m.kernel.l1_norm();
          out.stationary_mean_bound = m.link(m.mu) / (1.0 - out.branching_ratio);
          if (unit_variance) {
            out.sigma2_target = 1.0;
          } else if (m.link.is_identity() && m.kernel.non_negative()) {
            out.sigma2_target = m.mu / (1.0 - m.kernel.l1_norm());
          } else {
            out.estimate_by_simulation = true;
          }
        } else if constexpr (std::is_same_v<M, LocallyStationary>) {
          const double norm = m.kernel.l1_norm();
          out.branching_ratio = m.gamma_fn.sup() * norm;
          out.stationary_mean_bound = m.mu_fn.sup() / (1.0 - out.branching_ratio);
          if (unit_variance) {
            out.sigma2_target = 1.0;
          } else {
            auto f = [&](double x) { return m.mu_fn(x) / (1.0 - m.gamma_fn(x) * norm); };
            out.sigma2_target =
                boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-13);
          }
        } else if constexpr (std::is_same_v<M, Discrete>) {
          const double a = m.alphas.total();
          const double varsigma2 = m.alpha0 / (1.0 - a);
          out.branching_ratio = a;
          out.stationary_mean_bound = varsigma2;
          out.sigma2_target = unit_variance ? 1.0 : varsigma2;
          out.raw_count_variance = varsigma2 / ((1.0 - a) * (1.0 - a));
        } else if constexpr (std::is_same_v<M, NearlyUnstable>) {
          out.branching_ratio = m.a_T() * m.kernel.l1_norm();
          out.stationary_mean_bound = m.mu / (1.0 - out.branching_ratio);
          if (unit_variance) {
            out.sigma2_target = 1.0;
          } else {
            out.estimate_by_simulation = true;
          }
        }
      },
      spec);
  return out;
}

}  // namespace hawkes_stein
