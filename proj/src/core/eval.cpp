#include "core/eval.hpp"

#include <cmath>
#include <cstring>

#include "core/dual.hpp"

namespace ds::ad {

namespace {

inline double exp_t(double x) { return std::exp(x); }
inline Dual exp_t(Dual x) { return exp(x); }
inline double log_t(double x) { return std::log(x); }
inline Dual log_t(Dual x) { return log(x); }

template <class T>
T stable_sigmoid(T x) {
  if (primal(x) >= 0.0) {
    T e = exp_t(T(0.0) - x);
    return T(1.0) / (T(1.0) + e);
  }
  T e = exp_t(x);
  return e / (T(1.0) + e);
}

// y accumulates; fill with bias (or zero) before calling. Loop order puts a
// contiguous output row innermost so the compiler can vectorize stride 1.
template <class T>
void conv3x3_fwd(const T* x, const T* w, T* y, int C, int H, int W, int OC, int s) {
  const int OH = (H + s - 1) / s, OW = (W + s - 1) / s;
  for (int oc = 0; oc < OC; ++oc) {
    T* yc = y + static_cast<size_t>(oc) * OH * OW;
    for (int c = 0; c < C; ++c) {
      const T* xc = x + static_cast<size_t>(c) * H * W;
      const T* wk = w + (static_cast<size_t>(oc) * C + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const T wv = wk[ky * 3 + kx];
          // iy = oy*s + ky - 1 must lie in [0, H)
          int oy_lo = 0;
          while (oy_lo * s + ky - 1 < 0) ++oy_lo;
          int oy_hi = OH;
          while (oy_hi > oy_lo && (oy_hi - 1) * s + ky - 1 >= H) --oy_hi;
          int ox_lo = 0;
          while (ox_lo * s + kx - 1 < 0) ++ox_lo;
          int ox_hi = OW;
          while (ox_hi > ox_lo && (ox_hi - 1) * s + kx - 1 >= W) --ox_hi;
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const T* xr = xc + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
            T* yr = yc + static_cast<size_t>(oy) * OW;
            if (s == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) yr[ox] += wv * xr[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) yr[ox] += wv * xr[2 * ox];
            }
          }
        }
      }
    }
  }
}

// Accumulates input, weight and bias adjoints from the output adjoint gy.
template <class T>
void conv3x3_bwd(const T* x, const T* w, const T* gy, T* gx, T* gw, T* gb, int C, int H, int W, int OC, int s) {
  const int OH = (H + s - 1) / s, OW = (W + s - 1) / s;
  for (int oc = 0; oc < OC; ++oc) {
    const T* gyc = gy + static_cast<size_t>(oc) * OH * OW;
    if (gb) {
      T acc = gb[oc];
      for (int i = 0; i < OH * OW; ++i) acc += gyc[i];
      gb[oc] = acc;
    }
    for (int c = 0; c < C; ++c) {
      const T* xc = x + static_cast<size_t>(c) * H * W;
      T* gxc = gx + static_cast<size_t>(c) * H * W;
      const T* wk = w + (static_cast<size_t>(oc) * C + c) * 9;
      T* gwk = gw + (static_cast<size_t>(oc) * C + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          int oy_lo = 0;
          while (oy_lo * s + ky - 1 < 0) ++oy_lo;
          int oy_hi = OH;
          while (oy_hi > oy_lo && (oy_hi - 1) * s + ky - 1 >= H) --oy_hi;
          int ox_lo = 0;
          while (ox_lo * s + kx - 1 < 0) ++ox_lo;
          int ox_hi = OW;
          while (ox_hi > ox_lo && (ox_hi - 1) * s + kx - 1 >= W) --ox_hi;
          const T wv = wk[ky * 3 + kx];
          T wacc{};
          for (int oy = oy_lo; oy < oy_hi; ++oy) {
            const T* xr = xc + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
            T* gxr = gxc + static_cast<size_t>(oy * s + ky - 1) * W + (kx - 1);
            const T* gyr = gyc + static_cast<size_t>(oy) * OW;
            if (s == 1) {
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                gxr[ox] += wv * gyr[ox];
                wacc += xr[ox] * gyr[ox];
              }
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) {
                gxr[2 * ox] += wv * gyr[ox];
                wacc += xr[2 * ox] * gyr[ox];
              }
            }
          }
          gwk[ky * 3 + kx] += wacc;
        }
      }
    }
  }
}

template <class T>
void check_finite(const std::vector<T>& buf, const Graph& g, int id) {
  for (const T& v : buf) {
    if (!is_finite(v))
      fail(ErrCode::NonFinite,
           std::string("non-finite value produced by node ") + std::to_string(id) + " (" + op_name(g.node(id).op) + ")");
  }
}

template <class T>
std::vector<std::vector<T>> forward_pass(const Graph& g, const Bindings& inputs, const Bindings* seeds) {
  std::vector<std::vector<T>> vals(static_cast<size_t>(g.size()));
  for (int id = 0; id < g.size(); ++id) {
    const Node& n = g.node(id);
    std::vector<T>& out = vals[static_cast<size_t>(id)];
    const int64_t count = numel(n.shape);
    auto arg = [&](int k) -> const std::vector<T>& { return vals[static_cast<size_t>(n.args[static_cast<size_t>(k)])]; };
    switch (n.op) {
      case Op::Input: {
        auto it = inputs.find(n.name);
        if (it == inputs.end()) fail(ErrCode::InvalidArg, "input '" + n.name + "' not bound");
        const Tensor& t = it->second;
        if (t.shape != n.shape)
          fail(ErrCode::Shape, "input '" + n.name + "' bound with shape " + shape_str(t.shape) +
                                   ", declared " + shape_str(n.shape));
        t.require_finite("input '" + n.name + "'");
        out.resize(static_cast<size_t>(count));
        const Tensor* seed = nullptr;
        if constexpr (std::is_same_v<T, Dual>) {
          if (seeds) {
            auto st = seeds->find(n.name);
            if (st != seeds->end()) {
              if (st->second.shape != n.shape)
                fail(ErrCode::Shape, "tangent seed for '" + n.name + "' has shape " + shape_str(st->second.shape) +
                                         ", expected " + shape_str(n.shape));
              seed = &st->second;
            }
          }
          for (int64_t i = 0; i < count; ++i)
            out[static_cast<size_t>(i)] = Dual(t.data[static_cast<size_t>(i)], seed ? seed->data[static_cast<size_t>(i)] : 0.0);
        } else {
          for (int64_t i = 0; i < count; ++i) out[static_cast<size_t>(i)] = t.data[static_cast<size_t>(i)];
        }
        break;
      }
      case Op::Const: {
        const Tensor& t = g.const_value(n.const_id);
        out.assign(t.data.begin(), t.data.end());
        break;
      }
      case Op::Add: {
        const auto &a = arg(0), &b = arg(1);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = a[i] + b[i];
        break;
      }
      case Op::Sub: {
        const auto &a = arg(0), &b = arg(1);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = a[i] - b[i];
        break;
      }
      case Op::Mul: {
        const auto &a = arg(0), &b = arg(1);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = a[i] * b[i];
        break;
      }
      case Op::Div: {
        const auto &a = arg(0), &b = arg(1);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = a[i] / b[i];
        break;
      }
      case Op::ScalarMul: {
        const auto& a = arg(0);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = n.a0 * a[i];
        break;
      }
      case Op::MatMul: {
        const auto &a = arg(0), &b = arg(1);
        const Shape& sa = g.shape_of(n.args[0]);
        const Shape& sb = g.shape_of(n.args[1]);
        int m = sa[0], kk = sa[1];
        int cols = sb.size() == 2 ? sb[1] : 1;
        out.assign(static_cast<size_t>(count), T{});
        for (int i = 0; i < m; ++i)
          for (int q = 0; q < kk; ++q) {
            const T av = a[static_cast<size_t>(i) * kk + q];
            for (int j = 0; j < cols; ++j) out[static_cast<size_t>(i) * cols + j] += av * b[static_cast<size_t>(q) * cols + j];
          }
        break;
      }
      case Op::Conv2d: {
        const auto &x = arg(0), &w = arg(1);
        const Shape& sx = g.shape_of(n.args[0]);
        const int oc = n.shape[0], oh = n.shape[1], ow = n.shape[2];
        out.assign(static_cast<size_t>(count), T{});
        if (n.args.size() == 3) {
          const auto& bias = arg(2);
          for (int c = 0; c < oc; ++c)
            std::fill(out.begin() + static_cast<size_t>(c) * oh * ow, out.begin() + static_cast<size_t>(c + 1) * oh * ow,
                      bias[static_cast<size_t>(c)]);
        }
        conv3x3_fwd(x.data(), w.data(), out.data(), sx[0], sx[1], sx[2], oc, n.stride);
        break;
      }
      case Op::Upsample2x: {
        const auto& a = arg(0);
        const Shape& sa = g.shape_of(n.args[0]);
        const int C = sa[0], H = sa[1], W = sa[2];
        out.resize(static_cast<size_t>(count));
        for (int c = 0; c < C; ++c)
          for (int y = 0; y < 2 * H; ++y) {
            const T* src = a.data() + (static_cast<size_t>(c) * H + y / 2) * W;
            T* dst = out.data() + (static_cast<size_t>(c) * 2 * H + y) * 2 * W;
            for (int x = 0; x < 2 * W; ++x) dst[x] = src[x / 2];
          }
        break;
      }
      case Op::Concat: {
        out.resize(static_cast<size_t>(count));
        size_t off = 0;
        for (size_t k = 0; k < n.args.size(); ++k) {
          const auto& part = vals[static_cast<size_t>(n.args[k])];
          std::copy(part.begin(), part.end(), out.begin() + static_cast<int64_t>(off));
          off += part.size();
        }
        break;
      }
      case Op::Relu: {
        const auto& a = arg(0);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = primal(a[i]) > 0.0 ? a[i] : T(0.0);
        break;
      }
      case Op::Sigmoid: {
        const auto& a = arg(0);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = stable_sigmoid(a[i]);
        break;
      }
      case Op::Clamp: {
        const auto& a = arg(0);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) {
          double p = primal(a[i]);
          out[i] = p < n.a0 ? T(n.a0) : (p > n.a1 ? T(n.a1) : a[i]);
        }
        break;
      }
      case Op::Log: {
        const auto& a = arg(0);
        out.resize(static_cast<size_t>(count));
        for (int64_t i = 0; i < count; ++i) out[i] = log_t(a[i]);
        break;
      }
      case Op::Sum: {
        const auto& a = arg(0);
        T acc{};
        for (const T& v : a) acc += v;
        out.assign(1, acc);
        break;
      }
      case Op::Mean: {
        const auto& a = arg(0);
        T acc{};
        for (const T& v : a) acc += v;
        out.assign(1, (1.0 / static_cast<double>(a.size())) * acc);
        break;
      }
      case Op::L1Norm: {
        const auto& a = arg(0);
        T acc{};
        for (const T& v : a) {
          double p = primal(v);
          if (p > 0.0)
            acc += v;
          else if (p < 0.0)
            acc -= v;
        }
        out.assign(1, acc);
        break;
      }
    }
    check_finite(out, g, id);
  }
  return vals;
}

template <class T>
std::vector<std::vector<T>> backward_pass(const Graph& g, const std::vector<std::vector<T>>& vals, int out_id) {
  std::vector<std::vector<T>> adj(static_cast<size_t>(g.size()));
  for (int id = 0; id < g.size(); ++id) adj[static_cast<size_t>(id)].assign(vals[static_cast<size_t>(id)].size(), T{});
  adj[static_cast<size_t>(out_id)][0] = T(1.0);
  for (int id = out_id; id >= 0; --id) {
    const Node& n = g.node(id);
    const auto& gn = adj[static_cast<size_t>(id)];
    auto val = [&](int k) -> const std::vector<T>& { return vals[static_cast<size_t>(n.args[static_cast<size_t>(k)])]; };
    auto gad = [&](int k) -> std::vector<T>& { return adj[static_cast<size_t>(n.args[static_cast<size_t>(k)])]; };
    switch (n.op) {
      case Op::Input:
      case Op::Const:
        break;
      case Op::Add: {
        auto &ga = gad(0), &gb = gad(1);
        for (size_t i = 0; i < gn.size(); ++i) { ga[i] += gn[i]; gb[i] += gn[i]; }
        break;
      }
      case Op::Sub: {
        auto &ga = gad(0), &gb = gad(1);
        for (size_t i = 0; i < gn.size(); ++i) { ga[i] += gn[i]; gb[i] -= gn[i]; }
        break;
      }
      case Op::Mul: {
        const auto &a = val(0), &b = val(1);
        auto &ga = gad(0), &gb = gad(1);
        for (size_t i = 0; i < gn.size(); ++i) { ga[i] += gn[i] * b[i]; gb[i] += gn[i] * a[i]; }
        break;
      }
      case Op::Div: {
        const auto& b = val(1);
        const auto& vn = vals[static_cast<size_t>(id)];
        auto &ga = gad(0), &gb = gad(1);
        for (size_t i = 0; i < gn.size(); ++i) {
          ga[i] += gn[i] / b[i];
          gb[i] -= gn[i] * vn[i] / b[i];
        }
        break;
      }
      case Op::ScalarMul: {
        auto& ga = gad(0);
        for (size_t i = 0; i < gn.size(); ++i) ga[i] += n.a0 * gn[i];
        break;
      }
      case Op::MatMul: {
        const auto &a = val(0), &b = val(1);
        auto &ga = gad(0), &gb = gad(1);
        const Shape& sa = g.shape_of(n.args[0]);
        const Shape& sb = g.shape_of(n.args[1]);
        int m = sa[0], kk = sa[1];
        int cols = sb.size() == 2 ? sb[1] : 1;
        for (int i = 0; i < m; ++i)
          for (int q = 0; q < kk; ++q) {
            T acc{};
            for (int j = 0; j < cols; ++j) acc += gn[static_cast<size_t>(i) * cols + j] * b[static_cast<size_t>(q) * cols + j];
            ga[static_cast<size_t>(i) * kk + q] += acc;
          }
        for (int q = 0; q < kk; ++q)
          for (int j = 0; j < cols; ++j) {
            T acc{};
            for (int i = 0; i < m; ++i) acc += a[static_cast<size_t>(i) * kk + q] * gn[static_cast<size_t>(i) * cols + j];
            gb[static_cast<size_t>(q) * cols + j] += acc;
          }
        break;
      }
      case Op::Conv2d: {
        const Shape& sx = g.shape_of(n.args[0]);
        conv3x3_bwd(val(0).data(), val(1).data(), gn.data(), gad(0).data(), gad(1).data(),
                    n.args.size() == 3 ? gad(2).data() : nullptr, sx[0], sx[1], sx[2], n.shape[0], n.stride);
        break;
      }
      case Op::Upsample2x: {
        auto& ga = gad(0);
        const Shape& sa = g.shape_of(n.args[0]);
        const int C = sa[0], H = sa[1], W = sa[2];
        for (int c = 0; c < C; ++c)
          for (int y = 0; y < 2 * H; ++y) {
            T* dst = ga.data() + (static_cast<size_t>(c) * H + y / 2) * W;
            const T* src = gn.data() + (static_cast<size_t>(c) * 2 * H + y) * 2 * W;
            for (int x = 0; x < 2 * W; ++x) dst[x / 2] += src[x];
          }
        break;
      }
      case Op::Concat: {
        size_t off = 0;
        for (size_t k = 0; k < n.args.size(); ++k) {
          auto& ga = adj[static_cast<size_t>(n.args[k])];
          for (size_t i = 0; i < ga.size(); ++i) ga[i] += gn[off + i];
          off += ga.size();
        }
        break;
      }
      case Op::Relu: {
        const auto& a = val(0);
        auto& ga = gad(0);
        for (size_t i = 0; i < gn.size(); ++i)
          if (primal(a[i]) > 0.0) ga[i] += gn[i];
        break;
      }
      case Op::Sigmoid: {
        const auto& s = vals[static_cast<size_t>(id)];
        auto& ga = gad(0);
        for (size_t i = 0; i < gn.size(); ++i) ga[i] += gn[i] * s[i] * (T(1.0) - s[i]);
        break;
      }
      case Op::Clamp: {
        const auto& a = val(0);
        auto& ga = gad(0);
        for (size_t i = 0; i < gn.size(); ++i) {
          double p = primal(a[i]);
          if (p >= n.a0 && p <= n.a1) ga[i] += gn[i];
        }
        break;
      }
      case Op::Log: {
        const auto& a = val(0);
        auto& ga = gad(0);
        for (size_t i = 0; i < gn.size(); ++i) ga[i] += gn[i] / a[i];
        break;
      }
      case Op::Sum: {
        auto& ga = gad(0);
        const T go = gn[0];
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += go;
        break;
      }
      case Op::Mean: {
        auto& ga = gad(0);
        const T go = (1.0 / static_cast<double>(ga.size())) * gn[0];
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += go;
        break;
      }
      case Op::L1Norm: {
        const auto& a = val(0);
        auto& ga = gad(0);
        const T go = gn[0];
        for (size_t i = 0; i < ga.size(); ++i) {
          double p = primal(a[i]);
          if (p > 0.0)
            ga[i] += go;
          else if (p < 0.0)
            ga[i] -= go;
        }
        break;
      }
    }
  }
  return adj;
}

void require_scalar(const Graph& g, int out) {
  if (out < 0 || out >= g.size()) fail(ErrCode::InvalidArg, "output node id out of range");
  if (g.shape_of(out) != Shape{1})
    fail(ErrCode::InvalidArg, "output node " + std::to_string(out) + " is not scalar: shape " + shape_str(g.shape_of(out)));
}

int require_input(const Graph& g, const std::string& name) {
  int id = g.find_input(name);
  if (id < 0) fail(ErrCode::InvalidArg, "variable '" + name + "' is not an input on this tape");
  return id;
}

} // namespace

Tensor forward_eval(const Graph& g, const Bindings& inputs, int out) {
  if (out < 0 || out >= g.size()) fail(ErrCode::InvalidArg, "output node id out of range");
  auto vals = forward_pass<double>(g, inputs, nullptr);
  return Tensor(g.shape_of(out), std::move(vals[static_cast<size_t>(out)]));
}

GradResult grad(const Graph& g, const Bindings& inputs, int out, const std::vector<std::string>& wrt) {
  require_scalar(g, out);
  std::vector<int> ids;
  ids.reserve(wrt.size());
  for (const auto& name : wrt) ids.push_back(require_input(g, name));
  auto vals = forward_pass<double>(g, inputs, nullptr);
  auto adj = backward_pass<double>(g, vals, out);
  GradResult res;
  res.value = vals[static_cast<size_t>(out)][0];
  for (size_t k = 0; k < wrt.size(); ++k) {
    Tensor t(g.shape_of(ids[k]), std::move(adj[static_cast<size_t>(ids[k])]));
    t.require_finite("gradient of '" + wrt[k] + "'");
    res.grads.emplace(wrt[k], std::move(t));
  }
  return res;
}

SecondOrderResult second_order(const Graph& g, const Bindings& inputs, int out, const Bindings& seeds,
                               const std::vector<std::string>& wrt) {
  require_scalar(g, out);
  for (const auto& [name, t] : seeds) {
    int id = require_input(g, name);
    if (t.shape != g.shape_of(id))
      fail(ErrCode::Shape, "seed for '" + name + "' has shape " + shape_str(t.shape) + ", expected " +
                               shape_str(g.shape_of(id)));
  }
  std::vector<int> ids;
  ids.reserve(wrt.size());
  for (const auto& name : wrt) ids.push_back(require_input(g, name));
  auto vals = forward_pass<Dual>(g, inputs, &seeds);
  auto adj = backward_pass<Dual>(g, vals, out);
  SecondOrderResult res;
  res.value = vals[static_cast<size_t>(out)][0].v;
  res.dvalue = vals[static_cast<size_t>(out)][0].t;
  for (size_t k = 0; k < wrt.size(); ++k) {
    const auto& a = adj[static_cast<size_t>(ids[k])];
    Tensor t(g.shape_of(ids[k]));
    for (size_t i = 0; i < a.size(); ++i) t.data[i] = a[i].t;
    t.require_finite("second-order product for '" + wrt[k] + "'");
    res.products.emplace(wrt[k], std::move(t));
  }
  return res;
}

Tensor hvp(const Graph& g, const Bindings& inputs, int out, const std::string& w, const Tensor& v) {
  Bindings seeds;
  seeds.emplace(w, v);
  auto res = second_order(g, inputs, out, seeds, {w});
  return std::move(res.products.at(w));
}

Tensor mixed_vjp(const Graph& g, const Bindings& inputs, int out, const std::string& w, const std::string& p,
                 const Tensor& lambda) {
  Bindings seeds;
  seeds.emplace(w, lambda);
  auto res = second_order(g, inputs, out, seeds, {p});
  return std::move(res.products.at(p));
}

} // namespace ds::ad
