#include "pilotwave/wavefunction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "pilotwave/errors.hpp"
#include "pilotwave/text.hpp"

namespace pilotwave {

namespace {

// pi^(-1/4)
const double kGroundNorm = std::pow(std::numbers::pi, -0.25);

void check_order(int m) {
  if (m < 0 || m > kMaxOrder) throw UnsupportedOrder(m);
}

double reduce_phase(double phase) {
  double r = std::fmod(phase, kPeriod);
  if (r < 0.0) r += kPeriod;
  r = canonical_number(r);
  if (r >= kPeriod) r = 0.0;
  return r;
}

}  // namespace

UnsupportedOrder::UnsupportedOrder(int order)
    : Error("eigenstate order " + std::to_string(order) + " outside [0, " +
            std::to_string(kMaxOrder) + "]"),
      order_(order) {}

NodeProximity::NodeProximity(double q1, double q2, double t, double density)
    : Error("velocity requested at a wave-function node: q=(" + format_point(q1, q2) +
            "), t=" + format_number(t) + ", |psi|^2=" + format_number(density)),
      q1_(q1),
      q2_(q2),
      t_(t),
      density_(density) {}

std::string to_string(Mode mode) { return std::to_string(mode.m) + ":" + std::to_string(mode.n); }

Mode parse_mode(std::string_view text) {
  auto parts = split(text, ':');
  if (parts.size() != 2) throw ParseError("expected mode 'm:n', got '" + std::string(text) + "'");
  auto m = parse_integer(parts[0]);
  auto n = parse_integer(parts[1]);
  if (m < 0 || n < 0 || m > kMaxOrder || n > kMaxOrder) {
    throw ParseError("mode out of range: '" + std::string(text) + "'");
  }
  return {static_cast<int>(m), static_cast<int>(n)};
}

double hermite(int m, double x) {
  check_order(m);
  if (m == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < m; ++k) {
    double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void eigenstate_table(double q, std::span<double> phi, std::span<double> dphi) {
  const int count = static_cast<int>(phi.size());
  if (count == 0) return;
  check_order(count - 1);
  phi[0] = kGroundNorm * std::exp(-0.5 * q * q);
  if (count > 1) phi[1] = std::numbers::sqrt2 * q * phi[0];
  for (int k = 1; k + 1 < count; ++k) {
    phi[k + 1] = std::sqrt(2.0 / (k + 1)) * q * phi[k] - std::sqrt(double(k) / (k + 1)) * phi[k - 1];
  }
  if (dphi.empty()) return;
  dphi[0] = -q * phi[0];
  for (int k = 1; k < count; ++k) dphi[k] = std::sqrt(2.0 * k) * phi[k - 1] - q * phi[k];
}

double eigenstate(int m, double q) {
  check_order(m);
  std::array<double, kMaxOrder + 1> phi{};
  eigenstate_table(q, std::span(phi.data(), m + 1), {});
  return phi[m];
}

double eigenstate_derivative(int m, double q) {
  check_order(m);
  std::array<double, kMaxOrder + 1> phi{};
  std::array<double, kMaxOrder + 1> dphi{};
  eigenstate_table(q, std::span(phi.data(), m + 1), std::span(dphi.data(), m + 1));
  return dphi[m];
}

Superposition::Superposition(std::vector<std::pair<Mode, Complex>> components)
    : components_(std::move(components)) {
  for (const auto& [mode, c] : components_) {
    check_order(mode.m);
    check_order(mode.n);
    max_m_ = std::max(max_m_, mode.m);
    max_n_ = std::max(max_n_, mode.n);
    max_energy_ = std::max(max_energy_, mode.energy());
  }
}

FieldPoint Superposition::evaluate(double q1, double q2, double t) const {
  std::array<double, kMaxOrder + 1> phi1{}, dphi1{}, phi2{}, dphi2{};
  eigenstate_table(q1, std::span(phi1.data(), max_m_ + 1), std::span(dphi1.data(), max_m_ + 1));
  eigenstate_table(q2, std::span(phi2.data(), max_n_ + 1), std::span(dphi2.data(), max_n_ + 1));

  // exp(-i E t) for every integer energy, by powers of exp(-i t).
  std::array<Complex, 2 * kMaxOrder + 2> rot{};
  const Complex step = std::polar(1.0, -t);
  rot[1] = step;
  for (int e = 2; e <= max_energy_; ++e) rot[e] = rot[e - 1] * step;

  FieldPoint out{};
  for (const auto& [mode, c] : components_) {
    const Complex w = c * rot[mode.energy()];
    out.psi += w * (phi1[mode.m] * phi2[mode.n]);
    out.d1 += w * (dphi1[mode.m] * phi2[mode.n]);
    out.d2 += w * (phi1[mode.m] * dphi2[mode.n]);
  }
  return out;
}

FlowSample Superposition::flow(double q1, double q2, double t, double node_guard) const {
  const FieldPoint f = evaluate(q1, q2, t);
  const double rho = f.density();
  if (!(rho >= node_guard)) throw NodeProximity(q1, q2, t, rho);
  const Complex conj_psi = std::conj(f.psi);
  return {{(f.d1 * conj_psi).imag() / rho, (f.d2 * conj_psi).imag() / rho}, rho};
}

WaveFunctionSpec::WaveFunctionSpec(std::vector<Term> terms) : terms_(std::move(terms)) {
  std::set<Mode> seen;
  int ground_terms = 0;
  double norm_sq = 0.0;
  for (auto& term : terms_) {
    if (term.mode.m < 0 || term.mode.n < 0 || term.mode.m > kMaxOrder || term.mode.n > kMaxOrder) {
      throw InvalidSpec("mode " + to_string(term.mode) + " out of range");
    }
    if (!seen.insert(term.mode).second) throw InvalidSpec("duplicate mode " + to_string(term.mode));
    if (!std::isfinite(term.amplitude) || term.amplitude < 0.0 || term.amplitude > 1.0) {
      throw InvalidSpec("amplitude of mode " + to_string(term.mode) + " outside [0,1]");
    }
    if (!std::isfinite(term.phase)) throw InvalidSpec("non-finite phase for mode " + to_string(term.mode));
    if (term.mode == Mode{0, 0}) {
      ++ground_terms;
      if (term.amplitude != 1.0) throw InvalidSpec("ground-state amplitude must be exactly 1");
    }
    term.amplitude = canonical_number(term.amplitude);
    term.phase = reduce_phase(term.phase);
    norm_sq += term.amplitude * term.amplitude;
  }
  if (ground_terms != 1) throw InvalidSpec("spec needs exactly one ground-state (0:0) term");
  normalization_ = 1.0 / std::sqrt(norm_sq);

  std::vector<std::pair<Mode, Complex>> components;
  components.reserve(terms_.size());
  for (const auto& term : terms_) {
    components.emplace_back(term.mode, normalization_ * std::polar(term.amplitude, term.phase));
  }
  field_ = Superposition(std::move(components));
}

WaveFunctionSpec WaveFunctionSpec::ground_state() { return WaveFunctionSpec({Term{{0, 0}, 1.0, 0.0}}); }

WaveFunctionSpec WaveFunctionSpec::homogeneous(std::span<const Mode> excited, double epsilon,
                                               std::span<const double> phases) {
  if (phases.size() != excited.size() + 1) {
    throw InvalidSpec("need one phase for the ground state plus one per excited mode");
  }
  std::vector<Term> terms;
  terms.push_back({{0, 0}, 1.0, phases[0]});
  for (std::size_t k = 0; k < excited.size(); ++k) terms.push_back({excited[k], epsilon, phases[k + 1]});
  return WaveFunctionSpec(std::move(terms));
}

WaveFunctionSpec WaveFunctionSpec::with_phase_shift(double delta) const {
  auto shifted = terms_;
  for (auto& term : shifted) term.phase += delta;
  return WaveFunctionSpec(std::move(shifted));
}

std::string WaveFunctionSpec::serialize() const {
  std::string modes, eps, theta;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    const char* sep = k == 0 ? "" : " ";
    modes += sep + to_string(terms_[k].mode);
    eps += sep + format_number(terms_[k].amplitude);
    theta += sep + format_number(terms_[k].phase);
  }
  return "modes = " + modes + "\nepsilon = " + eps + "\ntheta = " + theta + "\n";
}

WaveFunctionSpec WaveFunctionSpec::parse(std::string_view text) {
  auto doc = KeyValueText::parse(text);
  auto modes = split_ws(doc.at("modes"));
  auto eps = split_ws(doc.at("epsilon"));
  auto theta = split_ws(doc.at("theta"));
  if (modes.size() != eps.size() || modes.size() != theta.size()) {
    throw InvalidSpec("modes, epsilon and theta must have equal length");
  }
  std::vector<Term> terms;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    terms.push_back({parse_mode(modes[k]), parse_number(eps[k]), parse_number(theta[k])});
  }
  return WaveFunctionSpec(std::move(terms));
}

std::string WaveFunctionSpec::fingerprint() const { return fnv1a_hex(serialize()); }

Complex psi(const WaveFunctionSpec& spec, double q1, double q2, double t) {
  return spec.field().evaluate(q1, q2, t).psi;
}

std::pair<Complex, Complex> grad_psi(const WaveFunctionSpec& spec, double q1, double q2, double t) {
  auto f = spec.field().evaluate(q1, q2, t);
  return {f.d1, f.d2};
}

double born_density(const WaveFunctionSpec& spec, double q1, double q2, double t) {
  return spec.field().evaluate(q1, q2, t).density();
}

Velocity velocity(const WaveFunctionSpec& spec, double q1, double q2, double t, double node_guard) {
  return spec.field().flow(q1, q2, t, node_guard).velocity;
}

}  // namespace pilotwave
