#include "twiqrnn/models.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "twiqrnn/linalg.hpp"

namespace twiqrnn {

namespace {

void require_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("gate probability must lie in [0, 1]");
  }
}

ComplexMatrix build_prefactor(const CircuitParams& params,
                              const ComplexMatrix& evolution,
                              const QubitPartition& part) {
  if (params.theta.size() != params.rotation_targets.size()) {
    throw std::invalid_argument("circuit params: angle/target count mismatch");
  }
  ComplexMatrix m = evolution;
  for (std::size_t k = 0; k < params.theta.size(); ++k) {
    apply_rotation_right(m, params.rotation_axis, params.theta[k],
                         params.rotation_targets[k], part.total());
  }
  return m;
}

}  // namespace

StepEngine::StepEngine(const CircuitParams& params, const FixedHamiltonian& ham,
                       const QubitPartition& part, Observable obs)
    : StepEngine(params, hermitian_expm(ham.matrix(), ham.delta_t), part,
                 std::move(obs)) {
  if (ham.n_qubits != part.total()) {
    throw std::invalid_argument("StepEngine: Hamiltonian/register size mismatch");
  }
}

StepEngine::StepEngine(const CircuitParams& params, ComplexMatrix evolution,
                       const QubitPartition& part, Observable obs)
    : part_(part), obs_(std::move(obs)), evolution_(std::move(evolution)) {
  if (evolution_.rows() != part_.dim() || evolution_.cols() != part_.dim()) {
    throw std::invalid_argument("StepEngine: evolution dimension mismatch");
  }
  if (obs_.matrix().rows() != part_.output_dim()) {
    throw std::invalid_argument("StepEngine: observable must act on the output register");
  }
  prefactor_ = build_prefactor(params, evolution_, part_);
  vacuum_zexp_ = obs_.vacuum_expectation();
}

const ComplexMatrix& StepEngine::v_slice(double x) const {
  const uint64_t key = std::bit_cast<uint64_t>(x);
  auto it = v_cache_.find(key);
  if (it != v_cache_.end()) return it->second;

  const std::size_t dim = part_.dim();
  const std::size_t da = part_.memory_dim();
  const std::size_t db = part_.output_dim();
  const std::vector<cdouble> col = encoding_column0(x, part_.n_output);
  ComplexMatrix v(dim, da);
  for (std::size_t r = 0; r < dim; ++r) {
    const cdouble* row = &prefactor_(r, 0);
    for (std::size_t k = 0; k < da; ++k) {
      cdouble acc = 0.0;
      for (std::size_t rb = 0; rb < db; ++rb) acc += row[k * db + rb] * col[rb];
      v(r, k) = acc;
    }
  }
  return v_cache_.emplace(key, std::move(v)).first->second;
}

StepEngine::Reduced StepEngine::apply(const ComplexMatrix& memory,
                                      double x) const {
  const std::size_t da = part_.memory_dim();
  const std::size_t db = part_.output_dim();
  if (memory.rows() != da || memory.cols() != da) {
    throw std::invalid_argument("StepEngine::apply: memory dimension mismatch");
  }
  const ComplexMatrix& v = v_slice(x);
  const ComplexMatrix w = v * memory;  // dim x da

  Reduced out;
  out.next_memory = ComplexMatrix(da, da);
  for (std::size_t ib = 0; ib < db; ++ib) {
    for (std::size_t ia = 0; ia < da; ++ia) {
      const cdouble* wrow = &w(ia * db + ib, 0);
      for (std::size_t ja = 0; ja < da; ++ja) {
        const cdouble* vrow = &v(ja * db + ib, 0);
        cdouble acc = 0.0;
        for (std::size_t k = 0; k < da; ++k) acc += wrow[k] * std::conj(vrow[k]);
        out.next_memory(ia, ja) += acc;
      }
    }
  }

  out.born.assign(db, 0.0);
  const ComplexMatrix& o = obs_.matrix();
  cdouble zacc = 0.0;
  ComplexMatrix block(db, db);  // joint output block at fixed memory index
  for (std::size_t ia = 0; ia < da; ++ia) {
    for (std::size_t ib = 0; ib < db; ++ib) {
      const cdouble* wrow = &w(ia * db + ib, 0);
      for (std::size_t jb = 0; jb < db; ++jb) {
        const cdouble* vrow = &v(ia * db + jb, 0);
        cdouble acc = 0.0;
        for (std::size_t k = 0; k < da; ++k) acc += wrow[k] * std::conj(vrow[k]);
        block(ib, jb) = acc;
      }
    }
    for (std::size_t ib = 0; ib < db; ++ib) {
      out.born[ib] += block(ib, ib).real();
      for (std::size_t jb = 0; jb < db; ++jb) {
        zacc += block(ib, jb) * o(jb, ib);
      }
    }
  }
  if (std::abs(zacc.imag()) > 1e-10) {
    throw NumericalError("step expectation has imaginary residue " +
                         std::to_string(zacc.imag()));
  }
  out.zexp = zacc.real();
  for (double& p : out.born) {
    if (p < 0.0) {
      if (p < -1e-10) {
        throw NumericalError("step born probability " + std::to_string(p));
      }
      p = 0.0;
    }
  }
  return out;
}

ComplexMatrix StepEngine::joint(const ComplexMatrix& memory, double x) const {
  const std::size_t dim = part_.dim();
  const std::size_t da = part_.memory_dim();
  const ComplexMatrix& v = v_slice(x);
  const ComplexMatrix w = v * memory;
  ComplexMatrix out(dim, dim);
  for (std::size_t r = 0; r < dim; ++r) {
    const cdouble* wrow = &w(r, 0);
    for (std::size_t s = 0; s < dim; ++s) {
      const cdouble* vrow = &v(s, 0);
      cdouble acc = 0.0;
      for (std::size_t k = 0; k < da; ++k) acc += wrow[k] * std::conj(vrow[k]);
      out(r, s) = acc;
    }
  }
  return out;
}

ComplexMatrix StepEngine::collapse_outcome(const ComplexMatrix& memory,
                                           double x, int outcome,
                                           double prob) const {
  const std::size_t da = part_.memory_dim();
  const std::size_t db = part_.output_dim();
  if (prob <= 1e-14) {
    throw NumericalError("collapse onto outcome with probability " +
                         std::to_string(prob));
  }
  const std::size_t y = static_cast<std::size_t>(outcome);
  const ComplexMatrix& v = v_slice(x);
  const ComplexMatrix w = v * memory;
  ComplexMatrix out(da, da);
  for (std::size_t ia = 0; ia < da; ++ia) {
    const cdouble* wrow = &w(ia * db + y, 0);
    for (std::size_t ja = 0; ja < da; ++ja) {
      const cdouble* vrow = &v(ja * db + y, 0);
      cdouble acc = 0.0;
      for (std::size_t k = 0; k < da; ++k) acc += wrow[k] * std::conj(vrow[k]);
      out(ia, ja) = acc / prob;
    }
  }
  return out;
}

ComplexMatrix StepEngine::step_unitary(double x) const {
  const ComplexMatrix enc =
      kron(ComplexMatrix::identity(part_.memory_dim()),
           build_encoding(x, EncodingSpec{part_.n_output}));
  return prefactor_ * enc;
}

QrnnStepResult qrnn_step(const QrnnState& state, double x,
                         const CircuitParams& params,
                         const FixedHamiltonian& ham,
                         const QubitPartition& part, const Observable& obs) {
  StepEngine engine(params, ham, part, obs);
  const ComplexMatrix& rho = state.memory.matrix();
  ComplexMatrix joint = engine.joint(rho, x);
  StepEngine::Reduced red = engine.apply(rho, x);
  return QrnnStepResult{DensityMatrix(std::move(joint)),
                        QrnnState{DensityMatrix(std::move(red.next_memory)),
                                  state.step + 1},
                        red.zexp};
}

QrnnStepResult twi_step_exact(const QrnnState& state, double x, double alpha,
                              const CircuitParams& params,
                              const FixedHamiltonian& ham,
                              const QubitPartition& part,
                              const Observable& obs) {
  require_alpha(alpha);
  StepEngine engine(params, ham, part, obs);
  const ComplexMatrix& rho = state.memory.matrix();
  const std::size_t da = part.memory_dim();
  const std::size_t db = part.output_dim();

  ComplexMatrix joint = engine.joint(rho, x);
  joint *= cdouble(alpha, 0.0);
  // Identity branch: rho x |0><0| sits on the (ib = jb = 0) sublattice.
  for (std::size_t ia = 0; ia < da; ++ia) {
    for (std::size_t ja = 0; ja < da; ++ja) {
      joint(ia * db, ja * db) += (1.0 - alpha) * rho(ia, ja);
    }
  }
  StepEngine::Reduced red = engine.apply(rho, x);
  ComplexMatrix memory = red.next_memory;
  memory *= cdouble(alpha, 0.0);
  for (std::size_t i = 0; i < da; ++i) {
    for (std::size_t j = 0; j < da; ++j) {
      memory(i, j) += (1.0 - alpha) * rho(i, j);
    }
  }
  const double zexp =
      (1.0 - alpha) * engine.vacuum_zexp() + alpha * red.zexp;
  return QrnnStepResult{
      DensityMatrix(std::move(joint)),
      QrnnState{DensityMatrix(std::move(memory)), state.step + 1}, zexp};
}

std::vector<double> qrnn_forward(std::span<const double> inputs,
                                 const CircuitParams& params,
                                 const FixedHamiltonian& ham,
                                 const QubitPartition& part,
                                 const OutputMap& map) {
  StepEngine engine(params, ham, part, map.observable);
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<double> z;
  z.reserve(inputs.size());
  for (double x : inputs) {
    StepEngine::Reduced red = engine.apply(rho, x);
    z.push_back(map.scale * red.zexp);
    rho = std::move(red.next_memory);
  }
  return z;
}

std::vector<double> twi_forward_exact(std::span<const double> inputs,
                                      std::span<const double> alphas,
                                      const CircuitParams& params,
                                      const FixedHamiltonian& ham,
                                      const QubitPartition& part,
                                      const OutputMap& map) {
  if (inputs.size() != alphas.size()) {
    throw std::invalid_argument("twi_forward_exact: input/alpha length mismatch");
  }
  StepEngine engine(params, ham, part, map.observable);
  const std::size_t da = part.memory_dim();
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<double> z;
  z.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double alpha = alphas[t];
    require_alpha(alpha);
    StepEngine::Reduced red = engine.apply(rho, inputs[t]);
    z.push_back(map.scale * ((1.0 - alpha) * engine.vacuum_zexp() +
                             alpha * red.zexp));
    for (std::size_t i = 0; i < da; ++i) {
      for (std::size_t j = 0; j < da; ++j) {
        rho(i, j) = (1.0 - alpha) * rho(i, j) + alpha * red.next_memory(i, j);
      }
    }
  }
  return z;
}

std::vector<double> twi_forward_sampled(std::span<const double> inputs,
                                        std::span<const uint8_t> bits,
                                        const CircuitParams& params,
                                        const FixedHamiltonian& ham,
                                        const QubitPartition& part,
                                        const OutputMap& map) {
  if (inputs.size() != bits.size()) {
    throw std::invalid_argument("twi_forward_sampled: input/bit length mismatch");
  }
  StepEngine engine(params, ham, part, map.observable);
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<double> z;
  z.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (bits[t]) {
      StepEngine::Reduced red = engine.apply(rho, inputs[t]);
      z.push_back(map.scale * red.zexp);
      rho = std::move(red.next_memory);
    } else {
      z.push_back(map.scale * engine.vacuum_zexp());
    }
  }
  return z;
}

std::vector<std::vector<double>> sqrnn_marginals(std::span<const double> inputs,
                                                 const CircuitParams& params,
                                                 const FixedHamiltonian& ham,
                                                 const QubitPartition& part) {
  StepEngine engine(params, ham, part, Observable::mean_z(part.n_output));
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (double x : inputs) {
    StepEngine::Reduced red = engine.apply(rho, x);
    rows.push_back(std::move(red.born));
    rho = std::move(red.next_memory);
  }
  return rows;
}

std::vector<std::vector<double>> twi_sqrnn_marginals(
    std::span<const double> inputs, std::span<const double> alphas,
    const CircuitParams& params, const FixedHamiltonian& ham,
    const QubitPartition& part) {
  if (inputs.size() != alphas.size()) {
    throw std::invalid_argument("twi_sqrnn_marginals: input/alpha length mismatch");
  }
  StepEngine engine(params, ham, part, Observable::mean_z(part.n_output));
  const std::size_t da = part.memory_dim();
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    const double alpha = alphas[t];
    require_alpha(alpha);
    StepEngine::Reduced red = engine.apply(rho, inputs[t]);
    std::vector<double> born(red.born.size(), 0.0);
    for (std::size_t y = 0; y < born.size(); ++y) born[y] = alpha * red.born[y];
    born[0] += 1.0 - alpha;
    rows.push_back(std::move(born));
    for (std::size_t i = 0; i < da; ++i) {
      for (std::size_t j = 0; j < da; ++j) {
        rho(i, j) = (1.0 - alpha) * rho(i, j) + alpha * red.next_memory(i, j);
      }
    }
  }
  return rows;
}

std::vector<std::vector<double>> twi_sqrnn_marginals_sampled(
    std::span<const double> inputs, std::span<const uint8_t> bits,
    const CircuitParams& params, const FixedHamiltonian& ham,
    const QubitPartition& part) {
  if (inputs.size() != bits.size()) {
    throw std::invalid_argument(
        "twi_sqrnn_marginals_sampled: input/bit length mismatch");
  }
  StepEngine engine(params, ham, part, Observable::mean_z(part.n_output));
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (bits[t]) {
      StepEngine::Reduced red = engine.apply(rho, inputs[t]);
      rows.push_back(std::move(red.born));
      rho = std::move(red.next_memory);
    } else {
      std::vector<double> born(part.output_dim(), 0.0);
      born[0] = 1.0;
      rows.push_back(std::move(born));
    }
  }
  return rows;
}

std::vector<int> sqrnn_sample(std::span<const double> inputs,
                              const CircuitParams& params,
                              const FixedHamiltonian& ham,
                              const QubitPartition& part, Rng& rng) {
  StepEngine engine(params, ham, part, Observable::mean_z(part.n_output));
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<int> symbols;
  symbols.reserve(inputs.size());
  for (double x : inputs) {
    StepEngine::Reduced red = engine.apply(rho, x);
    const int y = rng.discrete(red.born);
    rho = engine.collapse_outcome(rho, x, y, red.born[y]);
    symbols.push_back(y);
  }
  return symbols;
}

std::vector<int> twi_sqrnn_sample(std::span<const double> inputs,
                                  std::span<const double> alphas,
                                  const CircuitParams& params,
                                  const FixedHamiltonian& ham,
                                  const QubitPartition& part, Rng& rng) {
  if (inputs.size() != alphas.size()) {
    throw std::invalid_argument("twi_sqrnn_sample: input/alpha length mismatch");
  }
  StepEngine engine(params, ham, part, Observable::mean_z(part.n_output));
  ComplexMatrix rho = DensityMatrix::ground_state(part.n_memory).matrix();
  std::vector<int> symbols;
  symbols.reserve(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    require_alpha(alphas[t]);
    if (rng.bernoulli(alphas[t])) {
      StepEngine::Reduced red = engine.apply(rho, inputs[t]);
      const int y = rng.discrete(red.born);
      rho = engine.collapse_outcome(rho, inputs[t], y, red.born[y]);
      symbols.push_back(y);
    } else {
      // Identity branch: output register stays in |0...0>.
      symbols.push_back(0);
    }
  }
  return symbols;
}

namespace {

struct GlobalRegister {
  int n_total;
  std::vector<int> block_qubits(const QubitPartition& part, int t) const {
    std::vector<int> targets;
    for (int q = 0; q < part.n_memory; ++q) targets.push_back(q);
    const int base = part.n_memory + t * part.n_output;
    for (int q = 0; q < part.n_output; ++q) targets.push_back(base + q);
    return targets;
  }
};

ComplexMatrix run_global_register(std::span<const double> inputs,
                                  const CircuitParams& params,
                                  const FixedHamiltonian& ham,
                                  const QubitPartition& part, int* n_total) {
  const int steps = static_cast<int>(inputs.size());
  if (steps < 1) throw std::invalid_argument("global register: empty input");
  const int nt = part.n_memory + steps * part.n_output;
  if (nt > 12) {
    throw std::invalid_argument("global register exceeds 12 qubits");
  }
  *n_total = nt;
  if (ham.n_qubits != part.total()) {
    throw std::invalid_argument("global register: Hamiltonian size mismatch");
  }

  const ComplexMatrix evolution = hermitian_expm(ham.matrix(), ham.delta_t);
  const ComplexMatrix prefactor = build_prefactor(params, evolution, part);
  const std::size_t dim = std::size_t{1} << nt;
  ComplexMatrix rho(dim, dim);
  rho(0, 0) = 1.0;
  GlobalRegister reg{nt};
  for (int t = 0; t < steps; ++t) {
    const ComplexMatrix u =
        prefactor * kron(ComplexMatrix::identity(part.memory_dim()),
                         build_encoding(inputs[t], EncodingSpec{part.n_output}));
    rho = apply_local_unitary(rho, u, reg.block_qubits(part, t), nt);
  }
  return rho;
}

}  // namespace

std::vector<double> dissipative_forward(std::span<const double> inputs,
                                        const CircuitParams& params,
                                        const FixedHamiltonian& ham,
                                        const QubitPartition& part,
                                        const OutputMap& map) {
  int nt = 0;
  const ComplexMatrix rho = run_global_register(inputs, params, ham, part, &nt);
  const int steps = static_cast<int>(inputs.size());
  const std::size_t dim = std::size_t{1} << nt;
  const std::size_t db = part.output_dim();
  const ComplexMatrix& o = map.observable.matrix();

  std::vector<double> z;
  z.reserve(inputs.size());
  for (int t = 0; t < steps; ++t) {
    const int shift = nt - (part.n_memory + (t + 1) * part.n_output);
    const std::size_t mask = (db - 1) << shift;
    cdouble acc = 0.0;
    for (std::size_t r = 0; r < dim; ++r) {
      const std::size_t yr = (r & mask) >> shift;
      for (std::size_t ys = 0; ys < db; ++ys) {
        const std::size_t s = (r & ~mask) | (ys << shift);
        acc += rho(r, s) * o(ys, yr);
      }
    }
    if (std::abs(acc.imag()) > 1e-10) {
      throw NumericalError("global-register expectation has imaginary residue");
    }
    z.push_back(map.scale * acc.real());
  }
  return z;
}

std::vector<std::vector<double>> dissipative_output_marginals(
    std::span<const double> inputs, const CircuitParams& params,
    const FixedHamiltonian& ham, const QubitPartition& part) {
  int nt = 0;
  const ComplexMatrix rho = run_global_register(inputs, params, ham, part, &nt);
  const int steps = static_cast<int>(inputs.size());
  const std::size_t dim = std::size_t{1} << nt;
  const std::size_t db = part.output_dim();

  std::vector<std::vector<double>> rows;
  rows.reserve(inputs.size());
  for (int t = 0; t < steps; ++t) {
    const int shift = nt - (part.n_memory + (t + 1) * part.n_output);
    const std::size_t mask = (db - 1) << shift;
    std::vector<double> probs(db, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      probs[(r & mask) >> shift] += rho(r, r).real();
    }
    rows.push_back(std::move(probs));
  }
  return rows;
}

}  // namespace twiqrnn
