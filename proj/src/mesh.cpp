#include "nehari/mesh.hpp"

#include <cmath>
#include <numbers>

#include "nehari/errors.hpp"

namespace nehari {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::SingularLinearization: return "SINGULAR_LINEARIZATION";
    case ErrorCode::NoRoot: return "NO_ROOT";
    case ErrorCode::Diverged: return "DIVERGED";
    case ErrorCode::NoAdmissibleDirection: return "NO_ADMISSIBLE_DIRECTION";
    case ErrorCode::NotConverged: return "NOT_CONVERGED";
    case ErrorCode::DepartureFailed: return "DEPARTURE_FAILED";
    case ErrorCode::StepCollapse: return "STEP_COLLAPSE";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
  }
  return "UNKNOWN";
}

double Grid::measure() const {
  double m = hi[0] - lo[0];
  if (dim == 2) m *= hi[1] - lo[1];
  return m;
}

double Grid::coord(int node, int axis) const {
  int idx = axis == 0 ? node % n : node / n;
  if (idx == n - 1) return hi[axis];
  return lo[axis] + idx * h[axis];
}

Vec Grid::axis_weights(int axis) const {
  Vec w = Vec::Constant(n, h[axis]);
  w[0] = w[n - 1] = 0.5 * h[axis];
  return w;
}

Grid build_grid(int dim, int n, const std::vector<std::pair<double, double>>& endpoints) {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::InvalidArgument, "dim must be 1 or 2");
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "n must be at least 3");
  if (static_cast<int>(endpoints.size()) < dim)
    throw Error(ErrorCode::InvalidArgument, "one endpoint pair per axis required");
  Grid g;
  g.dim = dim;
  g.n = n;
  for (int ax = 0; ax < dim; ++ax) {
    auto [a, b] = endpoints[ax];
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
      throw Error(ErrorCode::InvalidArgument, "degenerate interval");
    g.lo[ax] = a;
    g.hi[ax] = b;
    g.h[ax] = (b - a) / (n - 1);
  }
  Vec wx = g.axis_weights(0);
  if (dim == 1) {
    g.weights = wx;
  } else {
    Vec wy = g.axis_weights(1);
    g.weights.resize(n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) g.weights[i + n * j] = wx[i] * wy[j];
  }
  return g;
}

CoeffTerm CoeffTerm::constant(double c) {
  CoeffTerm t;
  t.kind = Kind::Constant;
  t.value = c;
  return t;
}

CoeffTerm CoeffTerm::cosine(int k, double amplitude, int ky) {
  CoeffTerm t;
  t.kind = Kind::Cosine;
  t.k = {k, ky};
  t.amplitude = amplitude;
  return t;
}

CoeffTerm CoeffTerm::bump(double center, double width, double height, double center_y) {
  CoeffTerm t;
  t.kind = Kind::Bump;
  t.center = {center, center_y};
  t.width = width;
  t.height = height;
  return t;
}

CoeffTerm CoeffTerm::step(double breakpoint, double left, double right) {
  CoeffTerm t;
  t.kind = Kind::Step;
  t.breakpoint = breakpoint;
  t.left = left;
  t.right = right;
  return t;
}

double CoeffTerm::eval(double x, double y, const Grid& g) const {
  using std::numbers::pi;
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Cosine: {
      double v = amplitude * std::cos(k[0] * pi * (x - g.lo[0]) / (g.hi[0] - g.lo[0]));
      if (g.dim == 2) v *= std::cos(k[1] * pi * (y - g.lo[1]) / (g.hi[1] - g.lo[1]));
      return v;
    }
    case Kind::Bump: {
      double r2 = (x - center[0]) * (x - center[0]);
      if (g.dim == 2) r2 += (y - center[1]) * (y - center[1]);
      return height * std::exp(-r2 / (width * width));
    }
    case Kind::Step:
      return x < breakpoint ? left : right;
  }
  return 0.0;
}

double CoeffSpec::eval(double x, double y, const Grid& g) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.eval(x, y, g);
  return s;
}

SampledCoefficient sample_coefficient(const CoeffSpec& spec, const Grid& grid) {
  SampledCoefficient out;
  out.values.resize(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    double x = grid.coord(i, 0);
    double y = grid.dim == 2 ? grid.coord(i, 1) : 0.0;
    out.values[i] = spec.eval(x, y, grid);
  }
  out.integral = integrate(out.values, grid);
  return out;
}

double integrate(const ScalarField& f, const Grid& grid) { return grid.weights.dot(f); }

Vec DiscreteOperator::stiffness_apply(const Vec& u) const {
  Vec out = Vec::Zero(u.size());
  for (int col = 0; col < stiffness.outerSize(); ++col)
    for (SpMat::InnerIterator it(stiffness, col); it; ++it)
      if (it.row() != col) out[it.row()] -= it.value() * (u[it.row()] - u[col]);
  return out;
}

Vec DiscreteOperator::apply(const Vec& u) const { return stiffness_apply(u).cwiseQuotient(mass); }

double DiscreteOperator::dirichlet_form(const Vec& u) const {
  double s = 0.0;
  for (int col = 0; col < stiffness.outerSize(); ++col)
    for (SpMat::InnerIterator it(stiffness, col); it; ++it)
      if (it.row() < col) {
        double d = u[it.row()] - u[col];
        s -= it.value() * d * d;
      }
  return s;
}

SpMat DiscreteOperator::strong() const {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(stiffness.nonZeros());
  for (int col = 0; col < stiffness.outerSize(); ++col)
    for (SpMat::InnerIterator it(stiffness, col); it; ++it)
      if (it.row() != it.col()) trip.emplace_back(it.row(), it.col(), it.value() / mass[it.row()]);
  SpMat off(stiffness.rows(), stiffness.cols());
  off.setFromTriplets(trip.begin(), trip.end());
  SpMat offr = off.transpose();
  for (int r = 0; r < offr.outerSize(); ++r) {
    double s = 0.0;
    for (SpMat::InnerIterator it(offr, r); it; ++it) s += it.value();
    trip.emplace_back(r, r, -s);
  }
  SpMat l(stiffness.rows(), stiffness.cols());
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

namespace {

void add_row(std::vector<Eigen::Triplet<double>>& trip, int row,
             const std::vector<std::pair<int, double>>& nbrs) {
  double diag = 0.0;
  for (auto [c, v] : nbrs) {
    trip.emplace_back(row, c, -v);
    diag += v;
  }
  trip.emplace_back(row, row, diag);
}

}  // namespace

DiscreteOperator laplacian_neumann(const Grid& grid) {
  const int n = grid.n;
  std::vector<Eigen::Triplet<double>> trip;
  DiscreteOperator op;
  op.mass = grid.weights;
  if (grid.dim == 1) {
    double c = 1.0 / grid.h[0];
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<int, double>> nb;
      if (i > 0) nb.emplace_back(i - 1, c);
      if (i < n - 1) nb.emplace_back(i + 1, c);
      add_row(trip, i, nb);
    }
  } else {
    Vec wx = grid.axis_weights(0), wy = grid.axis_weights(1);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        int row = i + n * j;
        std::vector<std::pair<int, double>> nb;
        double cx = wy[j] / grid.h[0], cy = wx[i] / grid.h[1];
        if (i > 0) nb.emplace_back(row - 1, cx);
        if (i < n - 1) nb.emplace_back(row + 1, cx);
        if (j > 0) nb.emplace_back(row - n, cy);
        if (j < n - 1) nb.emplace_back(row + n, cy);
        add_row(trip, row, nb);
      }
  }
  op.stiffness.resize(grid.size(), grid.size());
  op.stiffness.setFromTriplets(trip.begin(), trip.end());
  op.stiffness.makeCompressed();
  return op;
}

double relative_row_sum_defect(const SpMat& m) {
  SpMat mr = m.transpose();
  double worst = 0.0, big = 0.0;
  for (int r = 0; r < mr.outerSize(); ++r) {
    double s = 0.0;
    for (SpMat::InnerIterator it(mr, r); it; ++it) {
      s += it.value();
      big = std::max(big, std::abs(it.value()));
    }
    worst = std::max(worst, std::abs(s));
  }
  return big > 0 ? worst / big : worst;
}

double symmetry_defect(const SpMat& m) {
  SpMat d = m - SpMat(m.transpose());
  double worst = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SpMat::InnerIterator it(d, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return worst;
}

double l2_norm(const Vec& r, const Grid& grid) {
  return std::sqrt(grid.weights.dot(r.cwiseAbs2()));
}

double l1_norm(const Vec& r, const Grid& grid) { return grid.weights.dot(r.cwiseAbs()); }

}  // namespace nehari
