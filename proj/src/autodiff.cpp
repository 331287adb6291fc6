#include "resop/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "resop/error.hpp"

namespace resop::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ContractError(std::string(op) + ": " + detail);
}

std::string shape_str(int r, int c) {
  return "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

}  // namespace

// --- ParameterStore ---

int ParameterStore::add(const std::string& name, int rows, int cols, int fan_in, Rng& rng) {
  if (fan_in < 1) throw ContractError("ParameterStore::add: fan_in must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> values(static_cast<size_t>(rows) * cols);
  for (auto& v : values) v = rng.uniform(-bound, bound);
  return add_values(name, rows, cols, std::move(values));
}

int ParameterStore::add_values(const std::string& name, int rows, int cols,
                               std::vector<double> values) {
  if (values.size() != static_cast<size_t>(rows) * cols)
    throw ContractError("ParameterStore::add_values: value count does not match shape");
  if (find(name) >= 0) throw ContractError("duplicate parameter name: " + name);
  Param p;
  p.name = name;
  p.rows = rows;
  p.cols = cols;
  p.values = std::move(values);
  p.grad.assign(p.values.size(), 0.0);
  params_.push_back(std::move(p));
  return static_cast<int>(params_.size()) - 1;
}

int ParameterStore::find(const std::string& name) const {
  for (size_t k = 0; k < params_.size(); ++k)
    if (params_[k].name == name) return static_cast<int>(k);
  return -1;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

bool ParameterStore::values_finite() const {
  for (const auto& p : params_)
    for (double v : p.values)
      if (!std::isfinite(v)) return false;
  return true;
}

size_t ParameterStore::total_values() const {
  size_t n = 0;
  for (const auto& p : params_) n += p.values.size();
  return n;
}

std::vector<double> ParameterStore::snapshot_values() const {
  std::vector<double> flat;
  flat.reserve(total_values());
  for (const auto& p : params_) flat.insert(flat.end(), p.values.begin(), p.values.end());
  return flat;
}

void ParameterStore::restore_values(const std::vector<double>& flat) {
  if (flat.size() != total_values())
    throw ContractError("ParameterStore::restore_values: size mismatch");
  size_t off = 0;
  for (auto& p : params_) {
    std::copy(flat.begin() + off, flat.begin() + off + p.values.size(), p.values.begin());
    off += p.values.size();
  }
}

void ParameterStore::save(std::ostream& os, const std::map<std::string, std::string>& meta) const {
  os << "resop-checkpoint v1\n";
  for (const auto& [k, v] : meta) os << "meta " << k << " " << v << "\n";
  os << std::setprecision(17);
  for (const auto& p : params_) {
    os << "tensor " << p.name << " " << p.rows << " " << p.cols << "\n";
    for (size_t k = 0; k < p.values.size(); ++k) os << (k ? " " : "") << p.values[k];
    os << "\n";
  }
}

std::pair<ParameterStore, std::map<std::string, std::string>> ParameterStore::load(
    std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header != "resop-checkpoint v1")
    throw DataError("checkpoint: missing 'resop-checkpoint v1' header");
  ParameterStore store;
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(value.begin());
      meta[key] = value;
    } else if (tag == "tensor") {
      std::string name;
      int rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols)) throw DataError("checkpoint: bad tensor line: " + line);
      std::string values_line;
      if (!std::getline(is, values_line)) throw DataError("checkpoint: truncated tensor " + name);
      std::istringstream vs(values_line);
      std::vector<double> values(static_cast<size_t>(rows) * cols);
      for (auto& v : values)
        if (!(vs >> v)) throw DataError("checkpoint: too few values for tensor " + name);
      store.add_values(name, rows, cols, std::move(values));
    } else {
      throw DataError("checkpoint: unknown line: " + line);
    }
  }
  return {std::move(store), std::move(meta)};
}

// --- GradBuffer ---

GradBuffer::GradBuffer(const ParameterStore& store) {
  grads_.resize(store.count());
  for (int k = 0; k < store.count(); ++k) grads_[k].assign(store.at(k).values.size(), 0.0);
}

void GradBuffer::clear() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void GradBuffer::add_into(ParameterStore& store) const {
  if (static_cast<int>(grads_.size()) != store.count())
    throw ContractError("GradBuffer::add_into: store layout mismatch");
  for (int k = 0; k < store.count(); ++k) {
    auto& dst = store.at(k).grad;
    const auto& src = grads_[k];
    for (size_t n = 0; n < dst.size(); ++n) dst[n] += src[n];
  }
}

void GradBuffer::add_from(const GradBuffer& other) {
  if (grads_.size() != other.grads_.size())
    throw ContractError("GradBuffer::add_from: layout mismatch");
  for (size_t k = 0; k < grads_.size(); ++k)
    for (size_t n = 0; n < grads_[k].size(); ++n) grads_[k][n] += other.grads_[k][n];
}

// --- Tensor ---

int Tensor::rows() const { return graph_->node(*this).rows; }
int Tensor::cols() const { return graph_->node(*this).cols; }
const std::vector<double>& Tensor::values() const { return graph_->node(*this).value; }
double Tensor::scalar() const {
  const auto& n = graph_->node(*this);
  if (n.rows * n.cols != 1) throw ContractError("Tensor::scalar: tensor is not a single element");
  return n.value[0];
}

// --- Graph ---

void Graph::check_same_graph(Tensor t, const char* op) const {
  if (t.graph_ != this) throw ContractError(std::string(op) + ": tensor belongs to another graph");
}

Tensor Graph::constant(int rows, int cols, std::vector<double> values) {
  if (values.size() != static_cast<size_t>(rows) * cols)
    shape_error("constant", "value count does not match shape");
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.value = std::move(values);
  return push(std::move(n));
}

Tensor Graph::row(const std::vector<double>& values) {
  return constant(1, static_cast<int>(values.size()), values);
}

Tensor Graph::param(int param_id) {
  if (!store_) throw ContractError("Graph::param: graph has no bound ParameterStore");
  const auto& p = store_->at(param_id);
  Node n;
  n.rows = p.rows;
  n.cols = p.cols;
  n.value = p.values;  // snapshot; the store stays read-only during the episode
  n.needs_grad = true;
  n.param_id = param_id;
  return push(std::move(n));
}

Tensor Graph::matmul(Tensor a, Tensor b) {
  check_same_graph(a, "matmul");
  check_same_graph(b, "matmul");
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cols != nb.rows)
    shape_error("matmul", "inner dimensions differ: " + shape_str(na.rows, na.cols) + " x " +
                              shape_str(nb.rows, nb.cols));
  const int m = na.rows, k = na.cols, n = nb.cols;
  Node out;
  out.rows = m;
  out.cols = n;
  out.value.assign(static_cast<size_t>(m) * n, 0.0);
  {
    const auto& av = na.value;
    const auto& bv = nb.value;
    for (int r = 0; r < m; ++r)
      for (int q = 0; q < k; ++q) {
        const double arq = av[static_cast<size_t>(r) * k + q];
        if (arq == 0.0) continue;
        const size_t brow = static_cast<size_t>(q) * n;
        const size_t orow = static_cast<size_t>(r) * n;
        for (int c = 0; c < n; ++c) out.value[orow + c] += arq * bv[brow + c];
      }
  }
  out.needs_grad = na.needs_grad || nb.needs_grad;
  const int ia = a.node_, ib = b.node_;
  out.backward_fn = [ia, ib, m, k, n](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    Node& pb = g.node(ib);
    if (pa.needs_grad) {
      // dA += dC * B^T
      for (int r = 0; r < m; ++r)
        for (int q = 0; q < k; ++q) {
          double acc = 0.0;
          for (int c = 0; c < n; ++c)
            acc += self.grad[static_cast<size_t>(r) * n + c] * pb.value[static_cast<size_t>(q) * n + c];
          pa.grad[static_cast<size_t>(r) * k + q] += acc;
        }
    }
    if (pb.needs_grad) {
      // dB += A^T * dC
      for (int q = 0; q < k; ++q)
        for (int c = 0; c < n; ++c) {
          double acc = 0.0;
          for (int r = 0; r < m; ++r)
            acc += pa.value[static_cast<size_t>(r) * k + q] * self.grad[static_cast<size_t>(r) * n + c];
          pb.grad[static_cast<size_t>(q) * n + c] += acc;
        }
    }
  };
  return push(std::move(out));
}

Tensor Graph::transpose(Tensor a) {
  check_same_graph(a, "transpose");
  const Node& na = node(a);
  Node out;
  out.rows = na.cols;
  out.cols = na.rows;
  out.value.resize(na.value.size());
  for (int r = 0; r < na.rows; ++r)
    for (int c = 0; c < na.cols; ++c)
      out.value[static_cast<size_t>(c) * na.rows + r] = na.value[static_cast<size_t>(r) * na.cols + c];
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  const int rows = na.rows, cols = na.cols;
  out.backward_fn = [ia, rows, cols](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        pa.grad[static_cast<size_t>(r) * cols + c] += self.grad[static_cast<size_t>(c) * rows + r];
  };
  return push(std::move(out));
}

Tensor Graph::add(Tensor a, Tensor b) {
  check_same_graph(a, "add");
  check_same_graph(b, "add");
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    shape_error("add", "shapes differ: " + shape_str(na.rows, na.cols) + " vs " +
                           shape_str(nb.rows, nb.cols));
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = na.value[i] + nb.value[i];
  out.needs_grad = na.needs_grad || nb.needs_grad;
  const int ia = a.node_, ib = b.node_;
  out.backward_fn = [ia, ib](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    Node& pb = g.node(ib);
    if (pa.needs_grad)
      for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    if (pb.needs_grad)
      for (size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] += self.grad[i];
  };
  return push(std::move(out));
}

Tensor Graph::add_rowvec(Tensor a, Tensor b) {
  check_same_graph(a, "add_rowvec");
  check_same_graph(b, "add_rowvec");
  const Node& na = node(a);
  const Node& nb = node(b);
  if (nb.rows != 1 || nb.cols != na.cols)
    shape_error("add_rowvec", "bias must be [1," + std::to_string(na.cols) + "], got " +
                                  shape_str(nb.rows, nb.cols));
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (int r = 0; r < na.rows; ++r)
    for (int c = 0; c < na.cols; ++c)
      out.value[static_cast<size_t>(r) * na.cols + c] =
          na.value[static_cast<size_t>(r) * na.cols + c] + nb.value[c];
  out.needs_grad = na.needs_grad || nb.needs_grad;
  const int ia = a.node_, ib = b.node_;
  const int rows = na.rows, cols = na.cols;
  out.backward_fn = [ia, ib, rows, cols](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    Node& pb = g.node(ib);
    if (pa.needs_grad)
      for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i];
    if (pb.needs_grad)
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) pb.grad[c] += self.grad[static_cast<size_t>(r) * cols + c];
  };
  return push(std::move(out));
}

Tensor Graph::concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: no inputs");
  const int rows = node(parts[0]).rows;
  int total_cols = 0;
  bool needs = false;
  for (const Tensor& p : parts) {
    check_same_graph(p, "concat_cols");
    const Node& np = node(p);
    if (np.rows != rows)
      shape_error("concat_cols", "row counts differ: " + std::to_string(rows) + " vs " +
                                     std::to_string(np.rows));
    total_cols += np.cols;
    needs = needs || np.needs_grad;
  }
  Node out;
  out.rows = rows;
  out.cols = total_cols;
  out.value.assign(static_cast<size_t>(rows) * total_cols, 0.0);
  int off = 0;
  std::vector<std::pair<int, int>> layout;  // node index, column offset
  layout.reserve(parts.size());
  for (const Tensor& p : parts) {
    const Node& np = node(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < np.cols; ++c)
        out.value[static_cast<size_t>(r) * total_cols + off + c] =
            np.value[static_cast<size_t>(r) * np.cols + c];
    layout.push_back({p.node_, off});
    off += np.cols;
  }
  out.needs_grad = needs;
  out.backward_fn = [layout, rows, total_cols](Graph& g, Node& self) {
    for (const auto& [idx, column_offset] : layout) {
      Node& p = g.node(idx);
      if (!p.needs_grad) continue;
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < p.cols; ++c)
          p.grad[static_cast<size_t>(r) * p.cols + c] +=
              self.grad[static_cast<size_t>(r) * total_cols + column_offset + c];
    }
  };
  return push(std::move(out));
}

Tensor Graph::relu(Tensor a) {
  check_same_graph(a, "relu");
  const Node& na = node(a);
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = na.value[i] > 0.0 ? na.value[i] : 0.0;
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  out.backward_fn = [ia](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i)
      if (pa.value[i] > 0.0) pa.grad[i] += self.grad[i];
  };
  return push(std::move(out));
}

Tensor Graph::tanh_op(Tensor a) {
  check_same_graph(a, "tanh");
  const Node& na = node(a);
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = std::tanh(na.value[i]);
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  out.backward_fn = [ia](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i)
      pa.grad[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
  };
  return push(std::move(out));
}

Tensor Graph::softmax_rows(Tensor a) {
  check_same_graph(a, "softmax");
  const Node& na = node(a);
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (int r = 0; r < na.rows; ++r) {
    const size_t base = static_cast<size_t>(r) * na.cols;
    double mx = na.value[base];
    for (int c = 1; c < na.cols; ++c) mx = std::max(mx, na.value[base + c]);
    double denom = 0.0;
    for (int c = 0; c < na.cols; ++c) {
      const double e = std::exp(na.value[base + c] - mx);
      out.value[base + c] = e;
      denom += e;
    }
    for (int c = 0; c < na.cols; ++c) out.value[base + c] /= denom;
  }
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  const int cols = na.cols;
  out.backward_fn = [ia, cols](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (int r = 0; r < self.rows; ++r) {
      const size_t base = static_cast<size_t>(r) * cols;
      double dot = 0.0;
      for (int c = 0; c < cols; ++c) dot += self.grad[base + c] * self.value[base + c];
      for (int c = 0; c < cols; ++c)
        pa.grad[base + c] += self.value[base + c] * (self.grad[base + c] - dot);
    }
  };
  return push(std::move(out));
}

Tensor Graph::log_op(Tensor a) {
  check_same_graph(a, "log");
  const Node& na = node(a);
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = std::log(na.value[i]);
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  out.backward_fn = [ia](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] / pa.value[i];
  };
  return push(std::move(out));
}

Tensor Graph::sum_all(Tensor a) {
  check_same_graph(a, "sum");
  const Node& na = node(a);
  Node out;
  out.rows = 1;
  out.cols = 1;
  double s = 0.0;
  for (double v : na.value) s += v;
  out.value = {s};
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  out.backward_fn = [ia](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t i = 0; i < pa.grad.size(); ++i) pa.grad[i] += self.grad[0];
  };
  return push(std::move(out));
}

Tensor Graph::mean_all(Tensor a) {
  const Node& na = node(a);
  const double inv = 1.0 / static_cast<double>(na.value.size());
  return scale(sum_all(a), inv);
}

Tensor Graph::scale(Tensor a, double factor) {
  check_same_graph(a, "scale");
  const Node& na = node(a);
  Node out;
  out.rows = na.rows;
  out.cols = na.cols;
  out.value.resize(na.value.size());
  for (size_t i = 0; i < out.value.size(); ++i) out.value[i] = na.value[i] * factor;
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  out.backward_fn = [ia, factor](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) pa.grad[i] += self.grad[i] * factor;
  };
  return push(std::move(out));
}

Tensor Graph::gather_rows(Tensor a, std::vector<int> indices) {
  check_same_graph(a, "gather_rows");
  const Node& na = node(a);
  for (int idx : indices)
    if (idx < 0 || idx >= na.rows)
      shape_error("gather_rows", "row index " + std::to_string(idx) + " outside [0," +
                                     std::to_string(na.rows) + ")");
  Node out;
  out.rows = static_cast<int>(indices.size());
  out.cols = na.cols;
  out.value.resize(indices.size() * static_cast<size_t>(na.cols));
  for (size_t r = 0; r < indices.size(); ++r)
    for (int c = 0; c < na.cols; ++c)
      out.value[r * na.cols + c] = na.value[static_cast<size_t>(indices[r]) * na.cols + c];
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  const int cols = na.cols;
  out.backward_fn = [ia, cols, indices](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    for (size_t r = 0; r < indices.size(); ++r)
      for (int c = 0; c < cols; ++c)
        pa.grad[static_cast<size_t>(indices[r]) * cols + c] += self.grad[r * cols + c];
  };
  return push(std::move(out));
}

Tensor Graph::pick(Tensor a, int row, int col) {
  check_same_graph(a, "pick");
  const Node& na = node(a);
  if (row < 0 || row >= na.rows || col < 0 || col >= na.cols)
    shape_error("pick", "(" + std::to_string(row) + "," + std::to_string(col) + ") outside " +
                            shape_str(na.rows, na.cols));
  Node out;
  out.rows = 1;
  out.cols = 1;
  out.value = {na.value[static_cast<size_t>(row) * na.cols + col]};
  out.needs_grad = na.needs_grad;
  const int ia = a.node_;
  const int cols = na.cols;
  out.backward_fn = [ia, row, col, cols](Graph& g, Node& self) {
    Node& pa = g.node(ia);
    if (!pa.needs_grad) return;
    pa.grad[static_cast<size_t>(row) * cols + col] += self.grad[0];
  };
  return push(std::move(out));
}

template <class Sink>
void Graph::run_backward(Tensor loss, Sink&& sink) {
  check_same_graph(loss, "backward");
  const Node& ln = node(loss);
  if (ln.rows * ln.cols != 1) throw ContractError("backward: loss must be a scalar tensor");

  // Node gradients are scratch for this call; parameter gradients accumulate
  // in the sink.
  for (int idx = 0; idx <= loss.node_; ++idx) {
    Node& n = nodes_[idx];
    if (n.needs_grad)
      n.grad.assign(n.value.size(), 0.0);
  }
  if (!nodes_[loss.node_].needs_grad) return;  // loss unreachable from any parameter
  nodes_[loss.node_].grad[0] = 1.0;
  for (int idx = loss.node_; idx >= 0; --idx) {
    Node& n = nodes_[idx];
    if (!n.needs_grad) continue;
    if (n.backward_fn) n.backward_fn(*this, n);
    if (n.param_id >= 0) sink(n.param_id, n.grad);
  }
}

void Graph::backward(Tensor loss, GradBuffer& buffer) {
  run_backward(loss, [&buffer](int pid, const std::vector<double>& grad) {
    auto& dst = buffer[pid];
    for (size_t i = 0; i < grad.size(); ++i) dst[i] += grad[i];
  });
}

void Graph::backward(Tensor loss, ParameterStore& store) {
  if (&store != store_) throw ContractError("backward: store is not the one bound to this graph");
  run_backward(loss, [&store](int pid, const std::vector<double>& grad) {
    auto& dst = store.at(pid).grad;
    for (size_t i = 0; i < grad.size(); ++i) dst[i] += grad[i];
  });
}

// --- Adam ---

void Adam::step(ParameterStore& store, double lr) {
  if (m_.empty()) {
    m_.resize(store.count());
    v_.resize(store.count());
    for (int k = 0; k < store.count(); ++k) {
      m_[k].assign(store.at(k).values.size(), 0.0);
      v_[k].assign(store.at(k).values.size(), 0.0);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (int k = 0; k < store.count(); ++k) {
    auto& p = store.at(k);
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < p.values.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.values[i] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

}  // namespace resop::ad
