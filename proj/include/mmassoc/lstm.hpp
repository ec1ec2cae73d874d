#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "mmassoc/numerics.hpp"
#include "mmassoc/rng.hpp"

namespace mmassoc {

/// Gate blocks are stacked in the order input, forget, output, candidate.
enum class Gate : int { Input = 0, Forget = 1, Output = 2, Candidate = 3 };
inline constexpr std::array<Gate, 4> kGates{Gate::Input, Gate::Forget, Gate::Output, Gate::Candidate};
std::string_view gate_suffix(Gate g); // "i", "f", "o", "c"

/// Weights of one recurrent direction. `w_x` is 4H x n, `w_h` is 4H x H and
/// `b` has 4H entries; rows [k*H, (k+1)*H) belong to gate k.
struct DirectionParams
{
  Matrix w_x;
  Matrix w_h;
  Vector b;

  Index hidden() const { return w_h.cols(); }
  auto w_x_gate(Gate g) { return w_x.middleRows(static_cast<int>(g) * hidden(), hidden()); }
  auto w_x_gate(Gate g) const { return w_x.middleRows(static_cast<int>(g) * hidden(), hidden()); }
  auto w_h_gate(Gate g) { return w_h.middleRows(static_cast<int>(g) * hidden(), hidden()); }
  auto w_h_gate(Gate g) const { return w_h.middleRows(static_cast<int>(g) * hidden(), hidden()); }
  auto b_gate(Gate g) { return b.segment(static_cast<int>(g) * hidden(), hidden()); }
  auto b_gate(Gate g) const { return b.segment(static_cast<int>(g) * hidden(), hidden()); }
};

/// Bidirectional LSTM with a shared softmax output layer over C concepts plus
/// the CTC blank (last channel). Gradients use the same type.
struct LstmParams
{
  DirectionParams fwd;
  DirectionParams rev;
  Matrix w_out; // (C+1) x 2H, columns [0,H) read the forward state
  Vector b_out; // C+1

  static LstmParams zeros(Index input_size, Index hidden, Index classes);

  Index input_size() const { return fwd.w_x.cols(); }
  Index hidden() const { return fwd.hidden(); }
  /// Output channels, blank included.
  Index outputs() const { return w_out.rows(); }

  bool same_shape(const LstmParams& other) const;
  void set_zero();
};

/// Visits every tensor of `a` together with the matching tensor of `rest...`.
template <typename F, typename P, typename... Ps>
void for_each_tensor(F&& f, P& a, Ps&... rest)
{
  f(a.fwd.w_x, rest.fwd.w_x...);
  f(a.fwd.w_h, rest.fwd.w_h...);
  f(a.fwd.b, rest.fwd.b...);
  f(a.rev.w_x, rest.rev.w_x...);
  f(a.rev.w_h, rest.rev.w_h...);
  f(a.rev.b, rest.rev.b...);
  f(a.w_out, rest.w_out...);
  f(a.b_out, rest.b_out...);
}

/// Activations of one direction, stored in processing order (the reverse
/// direction's step s corresponds to timestep T-1-s).
struct DirectionCache
{
  Matrix x;     // T x n, processing order
  Matrix i, f, o, g;
  Matrix c;     // cell state
  Matrix tanh_c;
  Matrix h;
};

struct LstmCache
{
  DirectionCache fwd;
  DirectionCache rev;
  Matrix h_cat;  // T x 2H in time order, [h_fwd | h_rev]
  Matrix logits; // T x (C+1), pre-softmax
};

struct LstmOutput
{
  Matrix z; // T x (C+1) class probabilities
  LstmCache cache;
};

/// Uniform(-0.1, 0.1) weights from `rng`, zero biases.
LstmParams init_params(Rng& rng, Index input_size, Index hidden, Index concepts);

LstmOutput lstm_forward(const LstmParams& params, const Matrix& x);

/// Backpropagation through time. `delta` is the loss derivative with respect
/// to the pre-softmax logits (z - y for CTC-style targets).
LstmParams lstm_backward(const LstmParams& params, const LstmCache& cache, const Matrix& delta);

/// velocity <- momentum * velocity - lr * grad; params <- params + velocity.
void apply_momentum_sgd(LstmParams& params, const LstmParams& grads, LstmParams& velocity, double learning_rate,
                        double momentum);

} // namespace mmassoc
