/*
 * Copyright 2026 The Sesnet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sesnet/ndcore/ops.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sesnet/common/errors.h"

namespace sesnet::nd {
namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

std::string two_shapes(const Var& a, const Var& b) {
  return shape_string(a.shape()) + " vs " + shape_string(b.shape());
}

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw ValidationError("operation on an empty variable");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw ValidationError("operands recorded on different tapes");
  }
  return *a.tape();
}

void require_matrix(const char* op, const Var& x) {
  if (x.shape().size() != 2) {
    shape_error(op, "expected a matrix, got " + shape_string(x.shape()));
  }
}

// Elementwise unary op with derivative expressed through the output value.
template <typename Fwd, typename Deriv>
Var unary(OpKind kind, Var x, Fwd fwd, Deriv deriv_from_output) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = fwd(in[i]);
  Tape& tape = tape_of(x);
  const std::size_t out_id = tape.size();
  return tape.record(
      kind, {x}, std::move(out),
      [&tape, out_id, deriv_from_output](const Tensor& g,
                                         std::span<Tensor*> grads) {
        const Tensor& y = tape.value(out_id);
        Tensor& gx = *grads[0];
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx[i] += g[i] * deriv_from_output(y[i]);
        }
      });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  require_matrix("matmul", a);
  require_matrix("matmul", b);
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    shape_error("matmul", "inner dimensions differ " + two_shapes(a, b));
  }
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      if (s == 0.0) continue;
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
    }
  }
  const std::size_t a_id = a.id(), b_id = b.id();
  return tape.record(
      OpKind::kMatMul, {a, b}, std::move(out),
      [&tape, a_id, b_id, m, k, n](const Tensor& g, std::span<Tensor*> grads) {
        const Tensor& av = tape.value(a_id);
        const Tensor& bv = tape.value(b_id);
        if (Tensor* ga = grads[0]) {
          // dA = G . B^T
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = g.data() + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const double* brow = bv.data() + p * n;
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              (*ga)[i * k + p] += acc;
            }
          }
        }
        if (Tensor* gb = grads[1]) {
          // dB = A^T . G
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = g.data() + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const double s = av[i * k + p];
              if (s == 0.0) continue;
              double* gbrow = gb->data() + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += s * grow[j];
            }
          }
        }
      });
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("add", "shape mismatch " + two_shapes(a, b));
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape.record(OpKind::kAdd, {a, b}, std::move(out),
                     [](const Tensor& g, std::span<Tensor*> grads) {
                       for (Tensor* gi : grads) {
                         if (!gi) continue;
                         for (std::size_t i = 0; i < g.size(); ++i) (*gi)[i] += g[i];
                       }
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("sub", "shape mismatch " + two_shapes(a, b));
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape.record(OpKind::kSub, {a, b}, std::move(out),
                     [](const Tensor& g, std::span<Tensor*> grads) {
                       if (grads[0]) {
                         for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
                       }
                       if (grads[1]) {
                         for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] -= g[i];
                       }
                     });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("mul", "shape mismatch " + two_shapes(a, b));
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t a_id = a.id(), b_id = b.id();
  return tape.record(
      OpKind::kMul, {a, b}, std::move(out),
      [&tape, a_id, b_id](const Tensor& g, std::span<Tensor*> grads) {
        const Tensor& av = tape.value(a_id);
        const Tensor& bv = tape.value(b_id);
        if (grads[0]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i] * bv[i];
        }
        if (grads[1]) {
          for (std::size_t i = 0; i < g.size(); ++i) (*grads[1])[i] += g[i] * av[i];
        }
      });
}

Var add_bias(Var x, Var bias) {
  Tape& tape = tape_of(x, bias);
  const std::size_t n = bias.value().size();
  const std::size_t cols = x.value().cols();
  if (x.shape().size() < 2 || cols != n) {
    shape_error("add_bias", "bias length does not match columns " +
                                two_shapes(x, bias));
  }
  Tensor out = x.value();
  const Tensor& bv = bias.value();
  const std::size_t rows = out.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += bv[j];
  }
  return tape.record(OpKind::kAddBias, {x, bias}, std::move(out),
                     [rows, n](const Tensor& g, std::span<Tensor*> grads) {
                       if (grads[0]) {
                         for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
                       }
                       if (grads[1]) {
                         for (std::size_t r = 0; r < rows; ++r) {
                           for (std::size_t j = 0; j < n; ++j) {
                             (*grads[1])[j] += g[r * n + j];
                           }
                         }
                       }
                     });
}

Var scale(Var x, double factor) {
  Tape& tape = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  return tape.record(OpKind::kScale, {x}, std::move(out),
                     [factor](const Tensor& g, std::span<Tensor*> grads) {
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         (*grads[0])[i] += factor * g[i];
                       }
                     });
}

Var sigmoid(Var x) {
  return unary(
      OpKind::kSigmoid, x,
      [](double v) {
        // Branches keep exp() from overflowing for large |v|.
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary(
      OpKind::kTanh, x, [](double v) { return std::tanh(v); },
      [](double y) { return 1.0 - y * y; });
}

Var sum(Var x) {
  Tape& tape = tape_of(x);
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape.record(OpKind::kSum, {x}, Tensor::scalar(total),
                     [](const Tensor& g, std::span<Tensor*> grads) {
                       for (double& v : grads[0]->values()) v += g[0];
                     });
}

Var mean(Var x) {
  Tape& tape = tape_of(x);
  const double n = static_cast<double>(x.value().size());
  double total = 0.0;
  for (double v : x.value().values()) total += v;
  return tape.record(OpKind::kMean, {x}, Tensor::scalar(total / n),
                     [n](const Tensor& g, std::span<Tensor*> grads) {
                       for (double& v : grads[0]->values()) v += g[0] / n;
                     });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(x);
  require_matrix("slice_cols", x);
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (begin >= end || end > cols) {
    shape_error("slice_cols", "range [" + std::to_string(begin) + ", " +
                                  std::to_string(end) + ") invalid for " +
                                  shape_string(x.shape()));
  }
  const std::size_t width = end - begin;
  Tensor out({rows, width});
  const Tensor& xv = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data() + r * cols + begin, width, out.data() + r * width);
  }
  return tape.record(OpKind::kSliceCols, {x}, std::move(out),
                     [rows, cols, begin, width](const Tensor& g,
                                                std::span<Tensor*> grads) {
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t j = 0; j < width; ++j) {
                           (*grads[0])[r * cols + begin + j] += g[r * width + j];
                         }
                       }
                     });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) shape_error("concat_cols", "no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    if (p.shape().size() != 2 || p.shape()[0] != rows) {
      shape_error("concat_cols", "row count mismatch " + two_shapes(parts[0], p));
    }
    widths.push_back(p.shape()[1]);
    total += p.shape()[1];
  }
  Tensor out({rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data() + r * widths[k], widths[k],
                  out.data() + r * total + offset);
    }
    offset += widths[k];
  }
  return tape.record(
      OpKind::kConcatCols, std::vector<Var>(parts.begin(), parts.end()),
      std::move(out),
      [rows, total, widths](const Tensor& g, std::span<Tensor*> grads) {
        std::size_t offset = 0;
        for (std::size_t k = 0; k < grads.size(); ++k) {
          if (Tensor* gk = grads[k]) {
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t j = 0; j < widths[k]; ++j) {
                (*gk)[r * widths[k] + j] += g[r * total + offset + j];
              }
            }
          }
          offset += widths[k];
        }
      });
}

Var gather_rows(Var table, std::span<const int> indices) {
  Tape& tape = tape_of(table);
  require_matrix("gather_rows", table);
  const std::size_t n = table.shape()[0], d = table.shape()[1];
  if (indices.empty()) shape_error("gather_rows", "no indices");
  for (int idx : indices) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw ValidationError("gather_rows: index " + std::to_string(idx) +
                            " out of range [0, " + std::to_string(n) + ")");
    }
  }
  Tensor out({indices.size(), d});
  const Tensor& tv = table.value();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(tv.data() + static_cast<std::size_t>(indices[i]) * d, d,
                out.data() + i * d);
  }
  std::vector<int> idx(indices.begin(), indices.end());
  return tape.record(OpKind::kGatherRows, {table}, std::move(out),
                     [idx = std::move(idx), d](const Tensor& g,
                                               std::span<Tensor*> grads) {
                       for (std::size_t i = 0; i < idx.size(); ++i) {
                         double* row = grads[0]->data() +
                                       static_cast<std::size_t>(idx[i]) * d;
                         for (std::size_t j = 0; j < d; ++j) row[j] += g[i * d + j];
                       }
                     });
}

Var conv1d(Var input, Var kernel, Var bias) {
  Tape& tape = tape_of(input, kernel);
  tape_of(input, bias);
  if (input.shape().size() != 3 || kernel.shape().size() != 3) {
    shape_error("conv1d", "expected rank-3 input and kernel, got " +
                              two_shapes(input, kernel));
  }
  const std::size_t batch = input.shape()[0], cin = input.shape()[1],
                    len = input.shape()[2];
  const std::size_t cout = kernel.shape()[0], width = kernel.shape()[2];
  if (kernel.shape()[1] != cin) {
    shape_error("conv1d", "channel mismatch " + two_shapes(input, kernel));
  }
  if (bias.value().size() != cout) {
    shape_error("conv1d", "bias length mismatch " + two_shapes(kernel, bias));
  }
  if (width > len) {
    shape_error("conv1d", "kernel width " + std::to_string(width) +
                              " exceeds input length " + std::to_string(len));
  }
  const std::size_t out_len = len - width + 1;
  Tensor out({batch, cout, out_len});
  const Tensor& x = input.value();
  const Tensor& w = kernel.value();
  const Tensor& bv = bias.value();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      double* dst = out.data() + (b * cout + o) * out_len;
      std::fill_n(dst, out_len, bv[o]);
      for (std::size_t c = 0; c < cin; ++c) {
        const double* src = x.data() + (b * cin + c) * len;
        const double* wk = w.data() + (o * cin + c) * width;
        for (std::size_t k = 0; k < width; ++k) {
          const double wv = wk[k];
          for (std::size_t t = 0; t < out_len; ++t) dst[t] += wv * src[t + k];
        }
      }
    }
  }
  const std::size_t in_id = input.id(), w_id = kernel.id();
  return tape.record(
      OpKind::kConv1d, {input, kernel, bias}, std::move(out),
      [&tape, in_id, w_id, batch, cin, len, cout, width, out_len](
          const Tensor& g, std::span<Tensor*> grads) {
        const Tensor& x = tape.value(in_id);
        const Tensor& w = tape.value(w_id);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t o = 0; o < cout; ++o) {
            const double* go = g.data() + (b * cout + o) * out_len;
            if (grads[2]) {
              double acc = 0.0;
              for (std::size_t t = 0; t < out_len; ++t) acc += go[t];
              (*grads[2])[o] += acc;
            }
            for (std::size_t c = 0; c < cin; ++c) {
              const double* src = x.data() + (b * cin + c) * len;
              const std::size_t wbase = (o * cin + c) * width;
              for (std::size_t k = 0; k < width; ++k) {
                if (grads[1]) {
                  double acc = 0.0;
                  for (std::size_t t = 0; t < out_len; ++t) acc += go[t] * src[t + k];
                  (*grads[1])[wbase + k] += acc;
                }
                if (grads[0]) {
                  double* gx = grads[0]->data() + (b * cin + c) * len;
                  const double wv = w[wbase + k];
                  for (std::size_t t = 0; t < out_len; ++t) gx[t + k] += go[t] * wv;
                }
              }
            }
          }
        }
      });
}

Var reshape(Var x, Shape shape) {
  Tape& tape = tape_of(x);
  if (shape_size(shape) != x.value().size()) {
    shape_error("reshape", "cannot view " + shape_string(x.shape()) + " as " +
                               shape_string(shape));
  }
  return tape.record(OpKind::kReshape, {x}, x.value().reshaped(std::move(shape)),
                     [](const Tensor& g, std::span<Tensor*> grads) {
                       for (std::size_t i = 0; i < g.size(); ++i) (*grads[0])[i] += g[i];
                     });
}

Var bce_loss(Var probabilities, std::span<const double> targets) {
  Tape& tape = tape_of(probabilities);
  const Tensor& p = probabilities.value();
  if (p.size() != targets.size()) {
    shape_error("bce_loss", "got " + std::to_string(p.size()) +
                                " probabilities for " +
                                std::to_string(targets.size()) + " targets");
  }
  for (double y : targets) {
    if (y != 0.0 && y != 1.0) {
      throw ValidationError("bce_loss: target " + std::to_string(y) +
                            " is not 0 or 1");
    }
  }
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= targets[i] * std::log(pc) + (1.0 - targets[i]) * std::log(1.0 - pc);
  }
  std::vector<double> y(targets.begin(), targets.end());
  const std::size_t p_id = probabilities.id();
  return tape.record(
      OpKind::kBinaryCrossEntropy, {probabilities}, Tensor::scalar(total / n),
      [&tape, p_id, y = std::move(y), n](const Tensor& g,
                                         std::span<Tensor*> grads) {
        const Tensor& p = tape.value(p_id);
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (p[i] < kProbabilityClamp || p[i] > 1.0 - kProbabilityClamp) continue;
          const double d = -y[i] / p[i] + (1.0 - y[i]) / (1.0 - p[i]);
          (*grads[0])[i] += g[0] * d / n;
        }
      });
}

}  // namespace sesnet::nd
