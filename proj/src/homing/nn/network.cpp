#include "homing/nn/network.hpp"

#include "homing/common/error.hpp"

#include <cmath>
#include <string>
#include <type_traits>

namespace homing::nn {

namespace {

using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Offsets of each tensor in the flat parameter vector.
struct Layout {
  std::size_t w1, b1, wg, ug, bg, w3, b3, w4, b4, total;

  explicit Layout(const NetworkShape& s) {
    std::size_t o = 0;
    auto take = [&o](std::size_t n) {
      const std::size_t at = o;
      o += n;
      return at;
    };
    w1 = take(std::size_t(s.h1) * s.obs_dim);
    b1 = take(s.h1);
    wg = take(std::size_t(3 * s.h2) * s.h1);
    ug = take(std::size_t(3 * s.h2) * s.h2);
    bg = take(3 * s.h2);
    w3 = take(std::size_t(s.h3) * s.h2);
    b3 = take(s.h3);
    w4 = take(std::size_t(s.out_dim) * s.h3);
    b4 = take(s.out_dim);
    total = o;
  }
};

template <typename Scalar>
struct Tensors {
  using Mat = Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>;
  using Vec = Map<Eigen::Matrix<double, Eigen::Dynamic, 1>>;
  using CMat = Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>>;
  using CVec = Map<const Eigen::Matrix<double, Eigen::Dynamic, 1>>;
  using M = std::conditional_t<std::is_const_v<Scalar>, CMat, Mat>;
  using V = std::conditional_t<std::is_const_v<Scalar>, CVec, Vec>;

  M w1, wg, ug, w3, w4;
  V b1, bg, b3, b4;

  Tensors(Scalar* p, const NetworkShape& s, const Layout& l)
      : w1(p + l.w1, s.h1, s.obs_dim),
        wg(p + l.wg, 3 * s.h2, s.h1),
        ug(p + l.ug, 3 * s.h2, s.h2),
        w3(p + l.w3, s.h3, s.h2),
        w4(p + l.w4, s.out_dim, s.h3),
        b1(p + l.b1, s.h1),
        bg(p + l.bg, 3 * s.h2),
        b3(p + l.b3, s.h3),
        b4(p + l.b4, s.out_dim) {}
};

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

void check_shape(const NetworkShape& s) {
  if (s.obs_dim <= 0 || s.h1 <= 0 || s.h2 <= 0 || s.h3 <= 0 || s.out_dim <= 0)
    throw Error(ErrorCode::kConfig, "network: all layer sizes must be positive");
}

}  // namespace

std::size_t NetworkShape::num_params() const { return Layout(*this).total; }

NetworkShape policy_shape(int obs_dim, int act_dim) {
  NetworkShape s;
  s.obs_dim = obs_dim;
  s.h1 = 10 * obs_dim;
  s.h3 = 10 * act_dim;
  s.h2 = static_cast<int>(std::lround(std::sqrt(double(s.h1) * s.h3)));
  s.out_dim = 2 * act_dim;
  return s;
}

NetworkShape value_shape(int obs_dim) {
  NetworkShape s;
  s.obs_dim = obs_dim;
  s.h1 = 10 * obs_dim;
  s.h3 = 5;
  s.h2 = static_cast<int>(std::lround(std::sqrt(double(s.h1) * s.h3)));
  s.out_dim = 1;
  return s;
}

RecurrentNet::RecurrentNet(NetworkShape shape)
    : shape_(shape),
      input_scale_(VectorXd::Ones(shape.obs_dim)),
      input_offset_(VectorXd::Zero(shape.obs_dim)) {
  check_shape(shape_);
  params_.assign(shape_.num_params(), 0.0);
}

void RecurrentNet::initialize(Rng& rng) {
  const Layout l(shape_);
  std::fill(params_.begin(), params_.end(), 0.0);
  auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double bound = std::sqrt(1.0 / fan_in);
    for (std::size_t i = 0; i < count; ++i) params_[offset + i] = uniform(rng, -bound, bound);
  };
  fill(l.w1, l.b1 - l.w1, shape_.obs_dim);
  fill(l.wg, l.ug - l.wg, shape_.h1);
  fill(l.ug, l.bg - l.ug, shape_.h2);
  fill(l.w3, l.b3 - l.w3, shape_.h2);
  fill(l.w4, l.b4 - l.w4, shape_.h3);
}

VectorXd RecurrentNet::step(std::span<const double> obs, VectorXd& hidden) const {
  if (obs.size() != static_cast<std::size_t>(shape_.obs_dim))
    throw Error(ErrorCode::kConfig, "network: observation size mismatch");
  if (hidden.size() != shape_.h2) throw Error(ErrorCode::kConfig, "network: hidden size mismatch");
  for (double v : obs)
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumeric, "network: non-finite observation");

  const Layout l(shape_);
  const Tensors<const double> t(params_.data(), shape_, l);
  const int n = shape_.h2;
  const VectorXd x =
      input_scale_.cwiseProduct(Map<const VectorXd>(obs.data(), shape_.obs_dim)) + input_offset_;
  const VectorXd y1 = (t.w1 * x + t.b1).array().tanh();
  const VectorXd gx = t.wg * y1 + t.bg;
  const VectorXd gh = t.ug.topRows(2 * n) * hidden;
  const VectorXd z = (gx.head(n) + gh.head(n)).unaryExpr(&sigmoid);
  const VectorXd r = (gx.segment(n, n) + gh.segment(n, n)).unaryExpr(&sigmoid);
  const VectorXd c =
      (gx.tail(n) + t.ug.bottomRows(n) * r.cwiseProduct(hidden)).array().tanh();
  hidden = (VectorXd::Ones(n) - z).cwiseProduct(hidden) + z.cwiseProduct(c);
  const VectorXd y3 = (t.w3 * hidden + t.b3).array().tanh();
  return t.w4 * y3 + t.b4;
}

SequenceTrace RecurrentNet::forward_sequence(const MatrixXd& obs) const {
  if (obs.rows() != shape_.obs_dim)
    throw Error(ErrorCode::kConfig, "network: observation size mismatch");
  if (!obs.allFinite()) throw Error(ErrorCode::kNumeric, "network: non-finite observation");
  const Layout l(shape_);
  const Tensors<const double> t(params_.data(), shape_, l);
  const int n = shape_.h2;
  const Eigen::Index steps = obs.cols();

  SequenceTrace tr;
  tr.x = (input_scale_.asDiagonal() * obs).colwise() + input_offset_;
  tr.y1 = ((t.w1 * tr.x).colwise() + t.b1).array().tanh();
  // Input-side gate pre-activations for all steps at once.
  const MatrixXd gx = (t.wg * tr.y1).colwise() + t.bg;
  tr.h_prev.resize(n, steps);
  tr.z.resize(n, steps);
  tr.r.resize(n, steps);
  tr.c.resize(n, steps);
  tr.h.resize(n, steps);

  VectorXd h = VectorXd::Zero(n);
  VectorXd gh(2 * n);
  for (Eigen::Index k = 0; k < steps; ++k) {
    tr.h_prev.col(k) = h;
    gh.noalias() = t.ug.topRows(2 * n) * h;
    auto z = tr.z.col(k);
    auto r = tr.r.col(k);
    auto c = tr.c.col(k);
    z = (gx.col(k).head(n) + gh.head(n)).unaryExpr(&sigmoid);
    r = (gx.col(k).segment(n, n) + gh.tail(n)).unaryExpr(&sigmoid);
    c = (gx.col(k).tail(n) + t.ug.bottomRows(n) * r.cwiseProduct(h)).array().tanh();
    h = h + z.cwiseProduct(c - h);
    tr.h.col(k) = h;
  }
  tr.y3 = ((t.w3 * tr.h).colwise() + t.b3).array().tanh();
  tr.out = (t.w4 * tr.y3).colwise() + t.b4;
  return tr;
}

void RecurrentNet::backward(const SequenceTrace& tr, const MatrixXd& d_out,
                            std::span<double> grad) const {
  if (tr.steps() == 0 || tr.h.cols() != tr.x.cols())
    throw Error(ErrorCode::kUsage, "network: backward requires a recorded forward pass");
  if (d_out.rows() != shape_.out_dim || d_out.cols() != tr.steps())
    throw Error(ErrorCode::kConfig, "network: upstream gradient shape mismatch");
  if (grad.size() != params_.size())
    throw Error(ErrorCode::kConfig, "network: gradient buffer size mismatch");

  const Layout l(shape_);
  const Tensors<const double> t(params_.data(), shape_, l);
  Tensors<double> g(grad.data(), shape_, l);
  const int n = shape_.h2;
  const Eigen::Index steps = tr.steps();

  // Output and third layer are not recurrent: batch them over time.
  g.w4.noalias() += d_out * tr.y3.transpose();
  g.b4 += d_out.rowwise().sum();
  const MatrixXd d_a3 =
      (t.w4.transpose() * d_out).cwiseProduct((1.0 - tr.y3.array().square()).matrix());
  g.w3.noalias() += d_a3 * tr.h.transpose();
  g.b3 += d_a3.rowwise().sum();
  const MatrixXd d_h_out = t.w3.transpose() * d_a3;

  MatrixXd d_gates(3 * n, steps);  // [dz; dr; dc] pre-activation gradients
  MatrixXd rh(n, steps);
  VectorXd dh_next = VectorXd::Zero(n);
  VectorXd dh(n), d_rh(n);
  for (Eigen::Index k = steps - 1; k >= 0; --k) {
    const auto h_prev = tr.h_prev.col(k);
    const auto z = tr.z.col(k);
    const auto r = tr.r.col(k);
    const auto c = tr.c.col(k);
    const VectorXd dh_new = d_h_out.col(k) + dh_next;

    auto dz = d_gates.col(k).head(n);
    auto dr = d_gates.col(k).segment(n, n);
    auto dc = d_gates.col(k).tail(n);
    dc = dh_new.cwiseProduct(z).cwiseProduct((1.0 - c.array().square()).matrix());
    d_rh.noalias() = t.ug.bottomRows(n).transpose() * dc;
    dr = d_rh.cwiseProduct(h_prev).cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
    dz = dh_new.cwiseProduct(c - h_prev).cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));

    dh = dh_new.cwiseProduct((1.0 - z.array()).matrix()) + d_rh.cwiseProduct(r);
    dh.noalias() += t.ug.topRows(2 * n).transpose() * d_gates.col(k).head(2 * n);
    dh_next = dh;
    rh.col(k) = r.cwiseProduct(h_prev);
  }

  g.ug.topRows(2 * n).noalias() += d_gates.topRows(2 * n) * tr.h_prev.transpose();
  g.ug.bottomRows(n).noalias() += d_gates.bottomRows(n) * rh.transpose();
  g.wg.noalias() += d_gates * tr.y1.transpose();
  g.bg += d_gates.rowwise().sum();
  const MatrixXd d_a1 =
      (t.wg.transpose() * d_gates).cwiseProduct((1.0 - tr.y1.array().square()).matrix());
  g.w1.noalias() += d_a1 * tr.x.transpose();
  g.b1 += d_a1.rowwise().sum();
}

}  // namespace homing::nn
