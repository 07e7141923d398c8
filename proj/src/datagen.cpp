#include "twiqrnn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twiqrnn {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cosine_value(double t) { return (std::cos(kPi * t / 5.0) + 1.0) / 2.0; }

}  // namespace

Sequence cosine_sequence(int steps) {
  if (steps < 1) throw std::invalid_argument("cosine_sequence: need steps >= 1");
  Sequence seq;
  seq.source = "cosine";
  seq.x0 = cosine_value(0.0);
  seq.samples.reserve(steps);
  seq.times.reserve(steps);
  for (int t = 1; t <= steps; ++t) {
    seq.samples.push_back(cosine_value(static_cast<double>(t)));
    seq.times.push_back(static_cast<double>(t));
  }
  return seq;
}

Sequence linear_warp_hold(const std::function<double(int)>& source, double a,
                          int steps, double x0,
                          const std::string& source_name) {
  const WarpSpec warp = WarpSpec::linear(a);  // validates 1/a integer
  Sequence seq;
  seq.source = source_name;
  seq.warp = "linear(" + std::to_string(a) + ")";
  seq.x0 = x0;
  seq.samples.reserve(steps);
  seq.times.reserve(steps);
  for (int t = 1; t <= steps; ++t) {
    const int src_index =
        static_cast<int>(std::ceil(static_cast<double>(t) * warp.a - 1e-12));
    seq.samples.push_back(source(src_index));
    seq.times.push_back(static_cast<double>(src_index));
  }
  return seq;
}

Sequence linear_warp_hold(const Sequence& base, double a) {
  return linear_warp_hold(
      [&base](int k) {
        if (k < 1 || k > static_cast<int>(base.samples.size())) {
          throw std::invalid_argument("linear_warp_hold: source index out of range");
        }
        return base.samples[k - 1];
      },
      a, static_cast<int>(base.samples.size()), base.x0, base.source);
}

ComplexMatrix LindbladSpec::hamiltonian() const {
  const std::size_t dim = std::size_t{1} << n_qubits;
  ComplexMatrix h(dim, dim);
  const ComplexMatrix x = pauli_x();
  const ComplexMatrix y = pauli_y();
  const ComplexMatrix z = pauli_z();
  for (int k = 0; k < n_qubits; ++k) {
    h -= 0.5 * field * embed_single_qubit(z, k, n_qubits);
  }
  for (int k = 0; k + 1 < n_qubits; ++k) {
    const ComplexMatrix xx =
        embed_single_qubit(x, k, n_qubits) * embed_single_qubit(x, k + 1, n_qubits);
    const ComplexMatrix yy =
        embed_single_qubit(y, k, n_qubits) * embed_single_qubit(y, k + 1, n_qubits);
    const ComplexMatrix zz =
        embed_single_qubit(z, k, n_qubits) * embed_single_qubit(z, k + 1, n_qubits);
    h -= 0.5 * coupling * (xx + yy + zz);
  }
  return h;
}

std::vector<ComplexMatrix> LindbladSpec::jump_operators() const {
  std::vector<ComplexMatrix> ops;
  ops.reserve(n_qubits);
  const ComplexMatrix x = pauli_x();
  const ComplexMatrix y = pauli_y();
  for (int k = 0; k < n_qubits; ++k) {
    ops.push_back(cdouble(dissipation, 0.0) *
                  (embed_single_qubit(x, k, n_qubits) +
                   embed_single_qubit(y, k, n_qubits)));
  }
  return ops;
}

DensityMatrix LindbladSpec::initial_state() const {
  const std::size_t dim = std::size_t{1} << n_qubits;
  ComplexMatrix m(dim, dim);
  const double amp = 1.0 / static_cast<double>(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = amp;
  }
  return DensityMatrix(std::move(m));
}

namespace {

class LindbladRhs {
 public:
  explicit LindbladRhs(const LindbladSpec& spec)
      : h_(spec.hamiltonian()), jumps_(spec.jump_operators()) {
    for (const auto& c : jumps_) products_.push_back(c.dagger() * c);
  }

  ComplexMatrix operator()(const ComplexMatrix& sigma) const {
    const cdouble minus_i(0.0, -1.0);
    ComplexMatrix out = minus_i * (h_ * sigma - sigma * h_);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const ComplexMatrix c_sigma = jumps_[k] * sigma;
      out += c_sigma * jumps_[k].dagger();
      ComplexMatrix anti = sigma * products_[k] + products_[k] * sigma;
      anti *= cdouble(0.5, 0.0);
      out -= anti;
    }
    return out;
  }

 private:
  ComplexMatrix h_;
  std::vector<ComplexMatrix> jumps_;
  std::vector<ComplexMatrix> products_;
};

void rk4_step(const LindbladRhs& rhs, ComplexMatrix& sigma, double h) {
  const ComplexMatrix k1 = rhs(sigma);
  ComplexMatrix tmp = sigma;
  tmp += cdouble(h / 2.0, 0.0) * k1;
  const ComplexMatrix k2 = rhs(tmp);
  tmp = sigma;
  tmp += cdouble(h / 2.0, 0.0) * k2;
  const ComplexMatrix k3 = rhs(tmp);
  tmp = sigma;
  tmp += cdouble(h, 0.0) * k3;
  const ComplexMatrix k4 = rhs(tmp);
  ComplexMatrix incr = k1;
  incr += k4;
  incr += 2.0 * (k2 + k3);
  incr *= cdouble(h / 6.0, 0.0);
  sigma += incr;
}

}  // namespace

std::vector<DensityMatrix> lindblad_rk4(const LindbladSpec& spec,
                                        const std::vector<double>& t_grid) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0 || (i > 0 && t_grid[i] <= t_grid[i - 1])) {
      throw std::invalid_argument("lindblad_rk4: grid must be increasing and >= 0");
    }
  }
  const LindbladRhs rhs(spec);
  ComplexMatrix sigma = spec.initial_state().matrix();
  double t = 0.0;
  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  for (double target : t_grid) {
    while (target - t > spec.rk_step + 1e-12) {
      rk4_step(rhs, sigma, spec.rk_step);
      t += spec.rk_step;
    }
    const double rem = target - t;
    if (rem > 1e-12) {
      rk4_step(rhs, sigma, rem);
      t = target;
    }
    const double drift = std::abs(sigma.trace() - cdouble(1.0, 0.0));
    if (drift > 1e-6) {
      throw NumericalError("lindblad_rk4: trace drift " + std::to_string(drift));
    }
    out.emplace_back(sigma);
  }
  return out;
}

Sequence spin_observable_sequence(const WarpSpec& warp, int steps,
                                  const LindbladSpec& spec) {
  std::vector<double> grid(steps);
  for (int k = 1; k <= steps; ++k) {
    grid[k - 1] = warp.warp(static_cast<double>(k) * spec.sample_dt);
  }
  const std::vector<DensityMatrix> states = lindblad_rk4(spec, grid);
  const ComplexMatrix z1 = embed_single_qubit(pauli_z(), 0, spec.n_qubits);

  Sequence seq;
  seq.source = "spin";
  seq.warp = warp.kind == WarpKind::identity ? "identity"
             : warp.kind == WarpKind::linear ? "linear"
                                             : "sqrt";
  seq.x0 = 0.0;  // <Z_1> of |+><+|^{x3}
  seq.samples.reserve(steps);
  seq.times = grid;
  for (const auto& state : states) {
    const cdouble v = (state.matrix() * z1).trace();
    seq.samples.push_back(v.real());
  }
  return seq;
}

Discretized discretize(std::span<const double> x, int n_levels, double lo,
                       double hi) {
  if (n_levels < 2) throw std::invalid_argument("discretize: need >= 2 levels");
  if (!(hi > lo)) throw std::invalid_argument("discretize: empty range");
  Discretized out;
  out.levels.resize(n_levels);
  const double spacing = (hi - lo) / (n_levels - 1);
  for (int k = 0; k < n_levels; ++k) out.levels[k] = lo + spacing * k;
  out.symbols.reserve(x.size());
  out.level_values.reserve(x.size());
  for (double v : x) {
    // Nearest level; exact midpoints round down.
    int k = static_cast<int>(std::ceil((v - lo) / spacing - 0.5 - 1e-12));
    k = std::clamp(k, 0, n_levels - 1);
    out.symbols.push_back(k);
    out.level_values.push_back(out.levels[k]);
  }
  return out;
}

std::vector<double> make_targets(TaskKind task, std::span<const double> x,
                                 double x0) {
  if (x.size() < 2) throw std::invalid_argument("make_targets: need >= 2 samples");
  std::vector<double> targets;
  if (task == TaskKind::remember) {
    targets.reserve(x.size());
    targets.push_back(x0);
    for (std::size_t t = 1; t < x.size(); ++t) targets.push_back(x[t - 1]);
  } else {
    targets.reserve(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) targets.push_back(x[t + 1]);
  }
  return targets;
}

}  // namespace twiqrnn
