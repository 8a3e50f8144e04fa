#include "lgdm/groupoid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lgdm/finite_difference.hpp"

namespace lgdm {

namespace {

double max_abs(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

Vector flatten(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

void require_in_domain(const GroupoidChart& chart, const Vector& x,
                       const Vector& u, const char* what) {
  if (x.size() != chart.base_dim() || u.size() != chart.fiber_dim()) {
    std::ostringstream os;
    os << what << ": expected (n, m) = (" << chart.base_dim() << ", "
       << chart.fiber_dim() << "), got (" << x.size() << ", " << u.size() << ")";
    throw OutOfChartError(os.str());
  }
  if (!chart.in_domain(x, u)) {
    throw OutOfChartError(std::string(what) + ": point outside chart " +
                          chart.name());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Default derivatives

Matrix GroupoidChart::target_jacobian_u(const Vector& x, const Vector& u) const {
  return fd::jacobian([&](const Vector& a) { return target_map(x, a); }, u);
}

Matrix GroupoidChart::target_jacobian_x(const Vector& x, const Vector& u) const {
  return fd::jacobian([&](const Vector& a) { return target_map(a, u); }, x);
}

Matrix GroupoidChart::product_jacobian_u(const Vector& x, const Vector& u,
                                         const Vector& v) const {
  return fd::jacobian([&](const Vector& a) { return product_map(x, a, v); }, u);
}

Matrix GroupoidChart::product_jacobian_v(const Vector& x, const Vector& u,
                                         const Vector& v) const {
  return fd::jacobian([&](const Vector& a) { return product_map(x, u, a); }, v);
}

Matrix GroupoidChart::inversion_jacobian_u(const Vector& x,
                                           const Vector& u) const {
  return fd::jacobian([&](const Vector& a) { return inversion_map(x, a); }, u);
}

Matrix GroupoidChart::inversion_jacobian_x(const Vector& x,
                                           const Vector& u) const {
  return fd::jacobian([&](const Vector& a) { return inversion_map(a, u); }, x);
}

Matrix GroupoidChart::anchor(const Vector& x) const {
  return target_jacobian_u(x, zero_fiber());
}

Matrix GroupoidChart::left_transport(const Vector& x, const Vector& u) const {
  return product_jacobian_v(x, u, zero_fiber());
}

Matrix GroupoidChart::right_transport(const Vector& x, const Vector& v) const {
  return product_jacobian_u(x, zero_fiber(), v);
}

std::vector<Matrix> GroupoidChart::right_transport_derivative(
    const Vector& x, const Vector& v) const {
  const int m = fiber_dim();
  const Matrix d = fd::jacobian(
      [&](const Vector& a) { return flatten(right_transport(x, a)); }, v);
  std::vector<Matrix> out;
  out.reserve(m);
  for (int k = 0; k < m; ++k) {
    out.emplace_back(Eigen::Map<const Matrix>(d.col(k).data(), m, m));
  }
  return out;
}

std::vector<Matrix> GroupoidChart::structure_constants(const Vector& x) const {
  const int m = fiber_dim();
  // dL[mu] = dL/du^mu at (x, 0)
  const Matrix d = fd::jacobian(
      [&](const Vector& a) { return flatten(left_transport(x, a)); },
      zero_fiber());
  std::vector<Matrix> c(m, Matrix::Zero(m, m));
  for (int g = 0; g < m; ++g) {
    for (int mu = 0; mu < m; ++mu) {
      for (int nu = 0; nu < m; ++nu) {
        // column-major: L(g, nu) sits at g + m * nu
        c[g](mu, nu) = d(g + m * nu, mu) - d(g + m * mu, nu);
      }
    }
  }
  return c;
}

FunctionChart::FunctionChart(ChartFunctions fns) : fns_(std::move(fns)) {
  if (!fns_.target || !fns_.product || !fns_.inversion) {
    throw ConfigurationError("FunctionChart: structure functions are required");
  }
  if (fns_.base_dim < 0 || fns_.fiber_dim < 1) {
    throw ConfigurationError("FunctionChart: invalid dimensions");
  }
}

// ---------------------------------------------------------------------------
// Checked operations

ChartPoint identity(const GroupoidChart& chart, const Vector& x) {
  return {x, chart.zero_fiber()};
}

Vector target(const GroupoidChart& chart, const ChartPoint& g) {
  require_in_domain(chart, g.x, g.u, "target");
  return chart.target_map(g.x, g.u);
}

Vector product(const GroupoidChart& chart, const ChartPoint& g,
               const Vector& v) {
  require_in_domain(chart, g.x, g.u, "product");
  const Vector y = chart.target_map(g.x, g.u);
  require_in_domain(chart, y, v, "product");
  Vector w = chart.product_map(g.x, g.u, v);
  if (!chart.in_enclosing(g.x, w)) {
    throw OutOfChartError("product: composite leaves the enclosing neighborhood");
  }
  return w;
}

ChartPoint inverse(const GroupoidChart& chart, const ChartPoint& g) {
  require_in_domain(chart, g.x, g.u, "inverse");
  return {chart.target_map(g.x, g.u), chart.inversion_map(g.x, g.u)};
}

StructureTensors structure_tensors(const GroupoidChart& chart, const Vector& x,
                                   const Vector& u, const Vector& v) {
  require_in_domain(chart, x, u, "structure_tensors");
  require_in_domain(chart, x, v, "structure_tensors");
  return {chart.anchor(x), chart.left_transport(x, u),
          chart.right_transport(x, v), chart.structure_constants(x)};
}

std::vector<TangentVector> left_invariant_basis(const GroupoidChart& chart,
                                                const ChartPoint& g) {
  require_in_domain(chart, g.x, g.u, "left_invariant_basis");
  const Matrix l = chart.left_transport(g.x, g.u);
  std::vector<TangentVector> out;
  for (int c = 0; c < chart.fiber_dim(); ++c) {
    out.push_back({Vector::Zero(chart.base_dim()), l.col(c)});
  }
  return out;
}

std::vector<TangentVector> right_invariant_basis(const GroupoidChart& chart,
                                                 const ChartPoint& g) {
  require_in_domain(chart, g.x, g.u, "right_invariant_basis");
  const Matrix rho = chart.anchor(g.x);
  const Matrix r = chart.right_transport(g.x, g.u);
  std::vector<TangentVector> out;
  for (int c = 0; c < chart.fiber_dim(); ++c) {
    out.push_back({-rho.col(c), r.col(c)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Axiom checking

bool AxiomReport::passed() const {
  return std::all_of(axioms.begin(), axioms.end(),
                     [](const AxiomResult& a) { return a.passed; });
}

const AxiomResult* AxiomReport::find(const std::string& name) const {
  for (const auto& a : axioms) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::vector<std::string> AxiomReport::failed() const {
  std::vector<std::string> out;
  for (const auto& a : axioms) {
    if (!a.passed) out.push_back(a.name);
  }
  return out;
}

AxiomReport check_axioms(const GroupoidChart& chart, const AxiomSampler& sampler,
                         int count, double tol, std::uint64_t seed) {
  const int n = chart.base_dim();
  const int m = chart.fiber_dim();
  const bool analytic = chart.derivative_mode() == DerivativeMode::kAnalytic;
  const double dtol = analytic ? tol : std::max(tol, 1e-6);
  const Matrix id = Matrix::Identity(m, m);

  AxiomReport report;
  auto add = [&](const char* name, double t) {
    report.axioms.push_back({name, 0.0, t, true});
    return report.axioms.size() - 1;
  };
  const auto k_identity_target = add("identity_target", tol);
  const auto k_right_unit = add("right_unit", tol);
  const auto k_left_unit = add("left_unit", tol);
  const auto k_target_compat = add("target_compatibility", tol);
  const auto k_assoc = add("associativity", tol);
  const auto k_inv_identity = add("inverse_of_identity", tol);
  const auto k_inversion = add("inversion", tol);
  const auto k_double_inv = add("double_inversion", tol);
  const auto k_symmetric = add("symmetric_domain", 0.0);
  const auto k_inv_deriv = add("inversion_derivative", dtol);
  const auto k_pd_u = add("product_derivative_u", dtol);
  const auto k_pd_v = add("product_derivative_v", dtol);
  const auto k_transport = add("transport_at_identity", dtol);
  const auto k_antisym = add("structure_constant_antisymmetry", dtol);

  auto record = [&](std::size_t k, double violation) {
    auto& a = report.axioms[k];
    if (!(violation <= a.max_violation)) a.max_violation = violation;
  };

  std::mt19937_64 rng(seed);
  const int max_attempts = 20 * count + 1000;
  int attempts = 0;
  while (report.samples < count) {
    if (attempts++ >= max_attempts) {
      std::ostringstream os;
      os << "check_axioms: sampler produced only " << report.samples << " of "
         << count << " in-domain samples";
      throw SamplingError(os.str());
    }
    const AxiomSample s = sampler(rng);
    if (s.x.size() != n || s.u.size() != m || s.v.size() != m ||
        s.w.size() != m) {
      throw SamplingError("check_axioms: sampler returned wrong dimensions");
    }
    if (!chart.in_domain(s.x, s.u)) {
      ++report.rejected;
      continue;
    }
    const Vector y = chart.target_map(s.x, s.u);
    if (!chart.in_domain(y, s.v)) {
      ++report.rejected;
      continue;
    }
    const Vector z = chart.target_map(y, s.v);
    if (!chart.in_domain(z, s.w)) {
      ++report.rejected;
      continue;
    }
    const Vector uv = chart.product_map(s.x, s.u, s.v);
    const Vector vw = chart.product_map(y, s.v, s.w);
    if (!chart.in_enclosing(s.x, uv) || !chart.in_enclosing(y, vw)) {
      ++report.rejected;
      continue;
    }
    ++report.samples;

    const Vector zero = chart.zero_fiber();
    record(k_identity_target, max_abs(chart.target_map(s.x, zero) - s.x));
    record(k_right_unit, max_abs(chart.product_map(s.x, s.u, zero) - s.u));
    record(k_left_unit, max_abs(chart.product_map(s.x, zero, s.v) - s.v));
    record(k_target_compat, max_abs(z - chart.target_map(s.x, uv)));
    record(k_assoc, max_abs(chart.product_map(s.x, uv, s.w) -
                            chart.product_map(s.x, s.u, vw)));
    record(k_inv_identity, max_abs(chart.inversion_map(s.x, zero)));

    const Vector iu = chart.inversion_map(s.x, s.u);
    record(k_inversion, max_abs(chart.product_map(s.x, s.u, iu)));
    const bool sym = chart.in_domain(y, iu);
    record(k_symmetric, sym ? 0.0 : 1.0);
    if (sym) {
      const Vector back_x = chart.target_map(y, iu);
      const Vector back_u = chart.inversion_map(y, iu);
      record(k_double_inv,
             std::max(max_abs(back_x - s.x), max_abs(back_u - s.u)));
    }

    record(k_inv_deriv, max_abs(chart.inversion_jacobian_u(s.x, zero) + id));
    record(k_pd_u, max_abs(chart.product_jacobian_u(s.x, s.u, zero) - id));
    record(k_pd_v, max_abs(chart.product_jacobian_v(s.x, zero, s.v) - id));
    record(k_transport, std::max(max_abs(chart.left_transport(s.x, zero) - id),
                                 max_abs(chart.right_transport(s.x, zero) - id)));
    const auto c = chart.structure_constants(s.x);
    double anti = 0.0;
    for (const auto& cg : c) anti = std::max(anti, max_abs(cg + cg.transpose()));
    record(k_antisym, anti);
  }

  for (auto& a : report.axioms) a.passed = a.max_violation <= a.tolerance;
  return report;
}

AxiomSampler box_sampler(int base_dim, int fiber_dim, double base_radius,
                         double fiber_radius) {
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> bx(-base_radius, base_radius);
    std::uniform_real_distribution<double> fb(-fiber_radius, fiber_radius);
    auto draw = [&](int len, auto& dist) {
      Vector v(len);
      for (int i = 0; i < len; ++i) v(i) = dist(rng);
      return v;
    };
    AxiomSample s;
    s.x = draw(base_dim, bx);
    s.u = draw(fiber_dim, fb);
    s.v = draw(fiber_dim, fb);
    s.w = draw(fiber_dim, fb);
    return s;
  };
}

AxiomSampler dyadic_sampler(int base_dim, int fiber_dim, double base_radius,
                            double fiber_radius, int bits) {
  const double quantum = std::ldexp(1.0, -bits);
  return [=](std::mt19937_64& rng) {
    auto draw = [&](int len, double radius) {
      const auto steps = static_cast<long long>(std::floor(radius / quantum));
      std::uniform_int_distribution<long long> dist(-steps, steps);
      Vector v(len);
      for (int i = 0; i < len; ++i) v(i) = static_cast<double>(dist(rng)) * quantum;
      return v;
    };
    AxiomSample s;
    s.x = draw(base_dim, base_radius);
    s.u = draw(fiber_dim, fiber_radius);
    s.v = draw(fiber_dim, fiber_radius);
    s.w = draw(fiber_dim, fiber_radius);
    return s;
  };
}

}  // namespace lgdm
