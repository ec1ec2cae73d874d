#include "mmassoc/lstm.hpp"

namespace mmassoc {
namespace {

DirectionParams direction_zeros(Index n, Index hidden)
{
  return {Matrix::Zero(4 * hidden, n), Matrix::Zero(4 * hidden, hidden), Vector::Zero(4 * hidden)};
}

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a)
{
  return (1.0 + (-a).exp()).inverse();
}

DirectionCache run_direction(const DirectionParams& p, Matrix x)
{
  const Index T = x.rows();
  const Index H = p.hidden();
  DirectionCache cache;
  cache.i.resize(T, H);
  cache.f.resize(T, H);
  cache.o.resize(T, H);
  cache.g.resize(T, H);
  cache.c.resize(T, H);
  cache.tanh_c.resize(T, H);
  cache.h.resize(T, H);

  // Input projections for every step at once; the recurrence adds w_h h_{t-1}.
  const Matrix pre_x = (x * p.w_x.transpose()).rowwise() + p.b.transpose();
  Vector h_prev = Vector::Zero(H);
  Vector c_prev = Vector::Zero(H);
  Vector pre(4 * H);
  for (Index t = 0; t < T; ++t) {
    pre.noalias() = p.w_h * h_prev;
    pre += pre_x.row(t).transpose();
    auto i = cache.i.row(t).transpose();
    auto f = cache.f.row(t).transpose();
    auto o = cache.o.row(t).transpose();
    auto g = cache.g.row(t).transpose();
    i = sigmoid(pre.segment(0, H).array()).matrix();
    f = sigmoid(pre.segment(H, H).array()).matrix();
    o = sigmoid(pre.segment(2 * H, H).array()).matrix();
    g = pre.segment(3 * H, H).array().tanh().matrix();
    c_prev = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    cache.c.row(t) = c_prev.transpose();
    cache.tanh_c.row(t) = c_prev.array().tanh().matrix().transpose();
    h_prev = o.cwiseProduct(cache.tanh_c.row(t).transpose());
    cache.h.row(t) = h_prev.transpose();
  }
  cache.x = std::move(x);
  return cache;
}

// d_h holds dL/dh_s in processing order.
DirectionParams backprop_direction(const DirectionParams& p, const DirectionCache& cache, const Matrix& d_h)
{
  const Index T = cache.h.rows();
  const Index H = p.hidden();
  Matrix d_pre(T, 4 * H);
  Vector dh_next = Vector::Zero(H);
  Vector dc_next = Vector::Zero(H);
  for (Index t = T - 1; t >= 0; --t) {
    const auto i = cache.i.row(t).transpose().array();
    const auto f = cache.f.row(t).transpose().array();
    const auto o = cache.o.row(t).transpose().array();
    const auto g = cache.g.row(t).transpose().array();
    const auto tc = cache.tanh_c.row(t).transpose().array();

    const Eigen::ArrayXd dh = d_h.row(t).transpose().array() + dh_next.array();
    const Eigen::ArrayXd dc = dh * o * (1.0 - tc.square()) + dc_next.array();
    const Eigen::ArrayXd c_prev =
        t > 0 ? Eigen::ArrayXd(cache.c.row(t - 1).transpose().array()) : Eigen::ArrayXd::Zero(H);

    auto row = d_pre.row(t);
    row.segment(0, H) = (dc * g * i * (1.0 - i)).matrix().transpose();
    row.segment(H, H) = (dc * c_prev * f * (1.0 - f)).matrix().transpose();
    row.segment(2 * H, H) = (dh * tc * o * (1.0 - o)).matrix().transpose();
    row.segment(3 * H, H) = (dc * i * (1.0 - g.square())).matrix().transpose();

    dc_next = (dc * f).matrix();
    dh_next.noalias() = p.w_h.transpose() * row.transpose();
  }

  DirectionParams grad;
  grad.w_x.noalias() = d_pre.transpose() * cache.x;
  grad.w_h = Matrix::Zero(4 * H, H);
  if (T > 1) grad.w_h.noalias() = d_pre.bottomRows(T - 1).transpose() * cache.h.topRows(T - 1);
  grad.b = d_pre.colwise().sum().transpose();
  return grad;
}

} // namespace

std::string_view gate_suffix(Gate g)
{
  switch (g) {
  case Gate::Input: return "i";
  case Gate::Forget: return "f";
  case Gate::Output: return "o";
  case Gate::Candidate: return "c";
  }
  return "?";
}

LstmParams LstmParams::zeros(Index input_size, Index hidden, Index classes)
{
  LstmParams p;
  p.fwd = direction_zeros(input_size, hidden);
  p.rev = direction_zeros(input_size, hidden);
  p.w_out = Matrix::Zero(classes, 2 * hidden);
  p.b_out = Vector::Zero(classes);
  return p;
}

bool LstmParams::same_shape(const LstmParams& other) const
{
  bool same = true;
  for_each_tensor(
      [&](const auto& a, const auto& b) { same = same && a.rows() == b.rows() && a.cols() == b.cols(); }, *this,
      other);
  return same;
}

void LstmParams::set_zero()
{
  for_each_tensor([](auto& t) { t.setZero(); }, *this);
}

LstmParams init_params(Rng& rng, Index input_size, Index hidden, Index concepts)
{
  if (input_size <= 0 || hidden <= 0 || concepts <= 0) throw InvalidArgument("init_params: dims must be positive");
  LstmParams p = LstmParams::zeros(input_size, hidden, concepts + 1);
  auto fill = [&rng](Matrix& m) {
    for (Index k = 0; k < m.size(); ++k) m.data()[k] = rng.uniform(-0.1, 0.1);
  };
  fill(p.fwd.w_x);
  fill(p.fwd.w_h);
  fill(p.rev.w_x);
  fill(p.rev.w_h);
  fill(p.w_out);
  return p;
}

LstmOutput lstm_forward(const LstmParams& params, const Matrix& x)
{
  if (x.rows() < 1) throw InvalidArgument("lstm_forward: empty sequence");
  if (x.cols() != params.input_size()) {
    throw InvalidArgument("lstm_forward: input has " + std::to_string(x.cols()) + " features, network expects " +
                          std::to_string(params.input_size()));
  }
  if (!all_finite(x)) throw InvalidArgument("lstm_forward: non-finite input");

  const Index H = params.hidden();
  LstmOutput out;
  out.cache.fwd = run_direction(params.fwd, x);
  out.cache.rev = run_direction(params.rev, x.colwise().reverse());
  out.cache.h_cat.resize(x.rows(), 2 * H);
  out.cache.h_cat.leftCols(H) = out.cache.fwd.h;
  out.cache.h_cat.rightCols(H) = out.cache.rev.h.colwise().reverse();
  out.cache.logits = (out.cache.h_cat * params.w_out.transpose()).rowwise() + params.b_out.transpose();
  out.z = softmax_rows(out.cache.logits);
  return out;
}

LstmParams lstm_backward(const LstmParams& params, const LstmCache& cache, const Matrix& delta)
{
  const Index H = params.hidden();
  if (cache.h_cat.cols() != 2 * H || cache.fwd.x.cols() != params.input_size() ||
      cache.fwd.h.cols() != H) {
    throw InvalidArgument("lstm_backward: cache does not match parameters");
  }
  if (delta.rows() != cache.h_cat.rows() || delta.cols() != params.outputs()) {
    throw InvalidArgument("lstm_backward: delta shape mismatch");
  }

  LstmParams grad;
  grad.w_out.noalias() = delta.transpose() * cache.h_cat;
  grad.b_out = delta.colwise().sum().transpose();
  const Matrix d_hcat = delta * params.w_out;
  grad.fwd = backprop_direction(params.fwd, cache.fwd, d_hcat.leftCols(H));
  grad.rev = backprop_direction(params.rev, cache.rev, d_hcat.rightCols(H).colwise().reverse());
  return grad;
}

void apply_momentum_sgd(LstmParams& params, const LstmParams& grads, LstmParams& velocity, double learning_rate,
                        double momentum)
{
  if (!params.same_shape(grads) || !params.same_shape(velocity)) {
    throw InvalidArgument("apply_momentum_sgd: shape mismatch");
  }
  for_each_tensor(
      [&](auto& p, const auto& g, auto& v) {
        v = momentum * v - learning_rate * g;
        p += v;
      },
      params, grads, velocity);
}

} // namespace mmassoc
