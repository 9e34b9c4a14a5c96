// Truncated Fourier series on T^n with scalar, vector or matrix values.
//
// Conventions used throughout the library:
//   * a series evaluates as  f(theta) = sum_k  c_k * exp(-i <k, theta>),
//   * |k| always means the l^1 norm of the multi-index,
//   * the weighted majorant norm is  sum_k ||c_k||_op * exp(sigma |k|).
// The sign in the exponent is chosen so that the small-divisor formulas of
// the normal-form solver read  k.omega + (spectral combinations); see
// homological.hpp.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamq {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using MultiIndex = std::vector<int>;

inline int l1_norm(const MultiIndex& k) {
  int s = 0;
  for (int ki : k) s += std::abs(ki);
  return s;
}

inline MultiIndex negated(const MultiIndex& k) {
  MultiIndex m(k);
  for (int& ki : m) ki = -ki;
  return m;
}

// Operator norm of a coefficient value: |.| for scalars, euclidean norm for
// vectors, spectral norm otherwise.
inline double op_norm(const Mat& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  if (m.cols() == 1) return m.norm();
  return m.jacobiSvd().singularValues()(0);
}

struct AnalyticNorm {
  double sigma = 0.0;
  double value = 0.0;
};

class FourierSeries {
 public:
  FourierSeries() = default;
  FourierSeries(int n, int rows, int cols, int k_store)
      : n_(n), rows_(rows), cols_(cols), k_store_(k_store) {
    if (n < 1 || rows < 1 || cols < 1 || k_store < 0)
      throw std::invalid_argument("FourierSeries: bad shape");
  }

  static FourierSeries scalar(int n, int k_store) { return FourierSeries(n, 1, 1, k_store); }
  static FourierSeries vector_valued(int n, int d, int k_store) { return FourierSeries(n, d, 1, k_store); }
  static FourierSeries matrix_valued(int n, int d, int k_store) { return FourierSeries(n, d, d, k_store); }

  int n() const { return n_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int k_store() const { return k_store_; }
  bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
  const std::map<MultiIndex, Mat>& coeffs() const { return coeffs_; }

  bool same_shape(const FourierSeries& o) const {
    return n_ == o.n_ && rows_ == o.rows_ && cols_ == o.cols_;
  }

  void check_index(const MultiIndex& k) const {
    if (static_cast<int>(k.size()) != n_)
      throw std::invalid_argument("FourierSeries: index dimension mismatch");
    if (l1_norm(k) > k_store_)
      throw std::invalid_argument("FourierSeries: |k| exceeds storage cutoff");
  }

  void set_coeff(const MultiIndex& k, const Mat& v) {
    check_index(k);
    if (v.rows() != rows_ || v.cols() != cols_)
      throw std::invalid_argument("FourierSeries: coefficient shape mismatch");
    if (v.isZero(0.0))
      coeffs_.erase(k);
    else
      coeffs_[k] = v;
  }

  void set_coeff(const MultiIndex& k, const Complex& v) {
    Mat m(1, 1);
    m(0, 0) = v;
    set_coeff(k, m);
  }

  void add_to_coeff(const MultiIndex& k, const Mat& v) {
    check_index(k);
    auto it = coeffs_.find(k);
    if (it == coeffs_.end())
      set_coeff(k, v);
    else
      it->second += v;
  }

  Mat coeff(const MultiIndex& k) const {
    auto it = coeffs_.find(k);
    if (it == coeffs_.end()) return Mat::Zero(rows_, cols_);
    return it->second;
  }

  bool has_coeff(const MultiIndex& k) const { return coeffs_.count(k) > 0; }

  // Largest |k| with a stored coefficient.
  int support_radius() const {
    int s = 0;
    for (const auto& [k, v] : coeffs_) s = std::max(s, l1_norm(k));
    return s;
  }

  std::size_t num_coeffs() const { return coeffs_.size(); }

  // f(theta), theta may be complex (used by strip-majorant checks).
  Mat evaluate(const CVec& theta) const {
    if (theta.size() != n_) throw std::invalid_argument("evaluate: theta dimension");
    Mat out = Mat::Zero(rows_, cols_);
    for (const auto& [k, v] : coeffs_) {
      Complex phase(0.0, 0.0);
      for (int t = 0; t < n_; ++t) phase += Complex(k[t]) * theta(t);
      out += v * std::exp(Complex(0.0, -1.0) * phase);
    }
    return out;
  }

  Mat evaluate(const RVec& theta) const { return evaluate(CVec(theta.cast<Complex>())); }

  Complex evaluate_scalar(const RVec& theta) const {
    if (!is_scalar()) throw std::logic_error("evaluate_scalar on non-scalar series");
    return evaluate(theta)(0, 0);
  }

  FourierSeries& operator+=(const FourierSeries& o) {
    if (!same_shape(o)) throw std::invalid_argument("add: shape/dimension mismatch");
    k_store_ = std::max(k_store_, o.k_store_);
    for (const auto& [k, v] : o.coeffs_) add_to_coeff(k, v);
    return *this;
  }

  FourierSeries scaled(const Complex& a) const {
    FourierSeries r(*this);
    for (auto& [k, v] : r.coeffs_) v *= a;
    return r;
  }

  // omega . grad_theta, i.e. the time derivative along theta = omega t.
  // With the exp(-i k.theta) convention each coefficient picks -i (k.omega).
  FourierSeries omega_grad(const RVec& omega) const {
    if (omega.size() != n_) throw std::invalid_argument("omega_grad: omega dimension");
    FourierSeries r(n_, rows_, cols_, k_store_);
    for (const auto& [k, v] : coeffs_) {
      double kw = 0.0;
      for (int t = 0; t < n_; ++t) kw += k[t] * omega(t);
      r.coeffs_[k] = Complex(0.0, -kw) * v;
    }
    r.prune(0.0);
    return r;
  }

  // Pointwise complex conjugate for real theta:  k -> conj(c_{-k}).
  FourierSeries conj_on_real_torus() const {
    FourierSeries r(n_, rows_, cols_, k_store_);
    for (const auto& [k, v] : coeffs_) r.coeffs_[negated(k)] = v.conjugate();
    return r;
  }

  // Pointwise transpose (matrix values).
  FourierSeries transposed() const {
    FourierSeries r(n_, cols_, rows_, k_store_);
    for (const auto& [k, v] : coeffs_) r.coeffs_[k] = v.transpose();
    return r;
  }

  void prune(double abs_tol) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (op_norm(it->second) <= abs_tol)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  // Drop coefficients with ||c_k|| e^{sigma |k|} below tol, i.e. those that
  // cannot contribute more than tol to the sigma-majorant.
  void prune_weighted(double tol, double sigma) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
      if (op_norm(it->second) * std::exp(sigma * l1_norm(it->first)) <= tol)
        it = coeffs_.erase(it);
      else
        ++it;
    }
  }

  bool is_real_on_real_torus(double tol) const {
    for (const auto& [k, v] : coeffs_)
      if ((coeff(negated(k)) - Mat(v.conjugate())).norm() > tol) return false;
    return true;
  }

  bool is_pointwise_hermitian(double tol) const {
    for (const auto& [k, v] : coeffs_)
      if ((coeff(negated(k)) - Mat(v.adjoint())).norm() > tol) return false;
    return true;
  }

  bool is_pointwise_symmetric(double tol) const {
    for (const auto& [k, v] : coeffs_)
      if ((v - Mat(v.transpose())).norm() > tol) return false;
    return true;
  }

  double max_coeff_norm() const {
    double m = 0.0;
    for (const auto& [k, v] : coeffs_) m = std::max(m, op_norm(v));
    return m;
  }

  void set_k_store(int k) {
    if (k < support_radius()) throw std::invalid_argument("set_k_store below support");
    k_store_ = k;
  }

 private:
  int n_ = 1;
  int rows_ = 1;
  int cols_ = 1;
  int k_store_ = 0;
  std::map<MultiIndex, Mat> coeffs_;

  friend FourierSeries add(const FourierSeries&, const FourierSeries&);
};

inline FourierSeries add(const FourierSeries& a, const FourierSeries& b) {
  FourierSeries r(a);
  r += b;
  return r;
}

inline FourierSeries operator+(const FourierSeries& a, const FourierSeries& b) { return add(a, b); }

inline FourierSeries operator-(const FourierSeries& a, const FourierSeries& b) {
  return add(a, b.scaled(-1.0));
}

inline AnalyticNorm analytic_norm(const FourierSeries& a, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("analytic_norm: negative sigma");
  AnalyticNorm r;
  r.sigma = sigma;
  for (const auto& [k, v] : a.coeffs()) r.value += op_norm(v) * std::exp(sigma * l1_norm(k));
  return r;
}

struct ConvolveResult {
  FourierSeries series;
  double tail_mass = 0.0;  // sum ||c_k|| e^{sigma|k|} over the discarded |k| > K_out
};

// Coefficient-space product, (a*b)(k) = sum_{k1+k2=k} a(k1) b(k2), truncated to
// |k| <= K_out.  Shapes must be composable: matrix*matrix, matrix*vector, or a
// scalar on either side.
inline ConvolveResult convolve(const FourierSeries& a, const FourierSeries& b, int K_out,
                               double sigma = 0.0) {
  if (a.n() != b.n()) throw std::invalid_argument("convolve: torus dimension mismatch");
  int rows, cols;
  bool scale_a = a.is_scalar(), scale_b = b.is_scalar();
  if (scale_a) {
    rows = b.rows();
    cols = b.cols();
  } else if (scale_b) {
    rows = a.rows();
    cols = a.cols();
  } else if (a.cols() == b.rows()) {
    rows = a.rows();
    cols = b.cols();
  } else {
    throw std::invalid_argument("convolve: shapes not composable");
  }
  ConvolveResult out;
  out.series = FourierSeries(a.n(), rows, cols, K_out);
  std::map<MultiIndex, Mat> tail;
  for (const auto& [k1, v1] : a.coeffs()) {
    for (const auto& [k2, v2] : b.coeffs()) {
      MultiIndex k(k1);
      for (int t = 0; t < a.n(); ++t) k[t] += k2[t];
      Mat prod;
      if (scale_a)
        prod = v1(0, 0) * v2;
      else if (scale_b)
        prod = v1 * v2(0, 0);
      else
        prod = v1 * v2;
      if (l1_norm(k) <= K_out) {
        out.series.add_to_coeff(k, prod);
      } else {
        auto it = tail.find(k);
        if (it == tail.end())
          tail[k] = prod;
        else
          it->second += prod;
      }
    }
  }
  for (const auto& [k, v] : tail) out.tail_mass += op_norm(v) * std::exp(sigma * l1_norm(k));
  out.series.prune(0.0);
  return out;
}

namespace detail {

// Signed frequency carried by DFT bin b on an M-point grid.
inline int bin_to_freq(int b, int M) { return (b <= M / 2) ? b : b - M; }

inline std::vector<Complex> twiddle_table(int M, double sign) {
  std::vector<Complex> w(M);
  for (int j = 0; j < M; ++j) {
    double ang = sign * 2.0 * M_PI * j / M;
    w[j] = Complex(std::cos(ang), std::sin(ang));
  }
  return w;
}

}  // namespace detail

// Dense tensor grid of M^n values, row-major in the grid index.
class TensorGrid {
 public:
  TensorGrid(int n, int M, int rows, int cols) : n_(n), M_(M), rows_(rows), cols_(cols) {
    std::size_t total = 1;
    for (int t = 0; t < n; ++t) total *= M;
    data_.assign(total, Mat::Zero(rows, cols));
  }
  int n() const { return n_; }
  int M() const { return M_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Mat& at(std::size_t flat) { return data_[flat]; }
  const Mat& at(std::size_t flat) const { return data_[flat]; }

  RVec theta(std::size_t flat) const {
    RVec th(n_);
    for (int t = n_ - 1; t >= 0; --t) {
      th(t) = 2.0 * M_PI * double(flat % M_) / M_;
      flat /= M_;
    }
    return th;
  }

  // In-place DFT along every axis.  sign=-1: analysis (values -> bins, with
  // 1/M normalisation), sign=+1: synthesis (bins -> values).
  void dft_all_axes(double sign) {
    auto w = detail::twiddle_table(M_, sign);
    std::vector<Mat> line(M_), out(M_);
    std::size_t total = data_.size();
    for (int axis = n_ - 1; axis >= 0; --axis) {
      std::size_t stride = 1;
      for (int t = axis + 1; t < n_; ++t) stride *= M_;
      std::size_t block = stride * M_;
      for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < stride; ++off) {
          for (int j = 0; j < M_; ++j) line[j] = data_[base + off + j * stride];
          for (int b = 0; b < M_; ++b) {
            Mat acc = Mat::Zero(rows_, cols_);
            for (int j = 0; j < M_; ++j) acc += line[j] * w[(std::size_t(b) * j) % M_];
            if (sign < 0) acc /= double(M_);
            out[b] = acc;
          }
          for (int j = 0; j < M_; ++j) data_[base + off + j * stride] = out[j];
        }
      }
    }
  }

 private:
  int n_, M_, rows_, cols_;
  std::vector<Mat> data_;
};

struct ExpandResult {
  FourierSeries series;
  double aliasing = 0.0;  // sum of coefficient norms in the band K_out < |k| <= resolvable max
};

// Evaluate a series on the uniform M^n grid.
inline TensorGrid grid_synthesize(const FourierSeries& f, int M) {
  if (M < 2 * f.support_radius() + 2)
    throw std::invalid_argument("grid_synthesize: grid too small for support");
  TensorGrid g(f.n(), M, f.rows(), f.cols());
  for (const auto& [k, v] : f.coeffs()) {
    std::size_t flat = 0;
    for (int t = 0; t < f.n(); ++t) {
      int b = ((k[t] % M) + M) % M;
      flat = flat * M + b;
    }
    g.at(flat) += v;
  }
  // bins -> values; the analysis sign convention makes coefficient k live in
  // bin k mod M with phase exp(-i k theta) = exp(-i 2pi k g / M).
  g.dft_all_axes(-1.0);
  // dft_all_axes(-1) applies exp(-i...)/M per axis; undo the normalisation
  // since synthesis needs no 1/M.
  double scale = std::pow(double(M), f.n());
  for (std::size_t i = 0; i < g.size(); ++i) g.at(i) *= scale;
  return g;
}

// Tensor DFT of grid values, keeping |k| <= K_out.
inline ExpandResult grid_analyze(TensorGrid& g, int K_out) {
  int M = g.M(), n = g.n();
  if (M < 2 * K_out + 2) throw std::invalid_argument("grid_analyze: insufficient grid for K_out");
  g.dft_all_axes(+1.0);
  double scale = std::pow(double(M), -n);
  ExpandResult out;
  out.series = FourierSeries(n, g.rows(), g.cols(), K_out);
  std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    MultiIndex k(n);
    for (int t = n - 1; t >= 0; --t) {
      k[t] = detail::bin_to_freq(int(rem % M), M);
      rem /= M;
    }
    Mat c = g.at(flat) * scale;
    double nm = op_norm(c);
    if (nm == 0.0) continue;
    if (l1_norm(k) <= K_out)
      out.series.set_coeff(k, c);
    else
      out.aliasing += nm;
  }
  return out;
}

// Sample f on the uniform real grid and re-expand as a truncated series.
inline ExpandResult sample_and_expand(const std::function<Mat(const RVec&)>& f, int n, int rows,
                                      int cols, int grid_per_dim, int K_out) {
  if (grid_per_dim < 2 * K_out + 2)
    throw std::invalid_argument("sample_and_expand: grid_per_dim < 2*K_out + 2");
  TensorGrid g(n, grid_per_dim, rows, cols);
  for (std::size_t flat = 0; flat < g.size(); ++flat) g.at(flat) = f(g.theta(flat));
  return grid_analyze(g, K_out);
}

inline ExpandResult sample_and_expand_scalar(const std::function<Complex(const RVec&)>& f, int n,
                                             int grid_per_dim, int K_out) {
  return sample_and_expand(
      [&f](const RVec& th) {
        Mat m(1, 1);
        m(0, 0) = f(th);
        return m;
      },
      n, 1, 1, grid_per_dim, K_out);
}

}  // namespace kamq
