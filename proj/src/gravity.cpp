#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "eosched/dynamics.hpp"

namespace eosched::detail {
extern const std::string_view kEgm2008Text;
}

namespace eosched {

namespace {

// sqrt((2 - delta_m0)(2n+1)(n-m)!/(n+m)!)
double normalization(int n, int m) {
  double ratio = 1.0;  // (n-m)!/(n+m)!
  for (int k = n - m + 1; k <= n + m; ++k) ratio /= k;
  return std::sqrt((m == 0 ? 1.0 : 2.0) * (2 * n + 1) * ratio);
}

struct Row {
  int n, m;
  double c, s;
};

std::vector<Row> parse_rows(std::string_view text) {
  std::vector<Row> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    Row row{};
    if (!(fields >> row.n >> row.m >> row.c >> row.s) || row.n < 0 || row.m < 0 || row.m > row.n) {
      throw std::invalid_argument(fmt::format("gravity coefficients: bad row {}: '{}'", line_no, line));
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::invalid_argument("gravity coefficients: no rows");
  return rows;
}

}  // namespace

GravityModel::GravityModel(int max_degree, double mu, double radius)
    : max_degree_(max_degree), mu_(mu), radius_(radius) {
  const std::size_t count = index(max_degree + 1, 0);
  cbar_.assign(count, 0.0);
  sbar_.assign(count, 0.0);
  c_.assign(count, 0.0);
  s_.assign(count, 0.0);
}

GravityModel GravityModel::parse(std::string_view text, double mu, double radius) {
  const auto rows = parse_rows(text);
  int max_degree = 0;
  for (const auto& r : rows) max_degree = std::max(max_degree, r.n);

  GravityModel model(max_degree, mu, radius);
  model.cbar_[index(0, 0)] = 1.0;
  for (const auto& r : rows) {
    model.cbar_[index(r.n, r.m)] = r.c;
    model.sbar_[index(r.n, r.m)] = r.s;
  }
  for (int n = 0; n <= max_degree; ++n) {
    for (int m = 0; m <= n; ++m) {
      const double k = normalization(n, m);
      model.c_[index(n, m)] = model.cbar_[index(n, m)] * k;
      model.s_[index(n, m)] = model.sbar_[index(n, m)] * k;
    }
  }
  return model;
}

GravityModel GravityModel::load(const std::filesystem::path& path, double mu, double radius) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open gravity file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), mu, radius);
}

const GravityModel& GravityModel::bundled() {
  static const GravityModel model = parse(detail::kEgm2008Text);
  return model;
}

void GravityModel::check_range(int degree, int order) const {
  if (degree < 0 || order < 0 || order > degree || degree > max_degree_) {
    throw ModelDomainError(fmt::format("gravity degree/order {}x{} outside bundled set (max {})",
                                       degree, order, max_degree_));
  }
}

Vec3 GravityModel::acceleration(const Vec3& r, int degree, int order) const {
  check_range(degree, order);
  const int n_max = degree;
  const int m_max = order;
  const int dim = n_max + 2;

  // V/W recursion for the solid spherical harmonics up to degree n_max+1.
  std::vector<double> v(static_cast<std::size_t>(dim * dim), 0.0);
  std::vector<double> w(static_cast<std::size_t>(dim * dim), 0.0);
  auto at = [dim](int n, int m) { return static_cast<std::size_t>(n * dim + m); };

  const double r2 = r.squaredNorm();
  const double rho = radius_ * radius_ / r2;
  const double x0 = radius_ * r.x() / r2;
  const double y0 = radius_ * r.y() / r2;
  const double z0 = radius_ * r.z() / r2;

  v[at(0, 0)] = radius_ / std::sqrt(r2);
  v[at(1, 0)] = z0 * v[at(0, 0)];
  for (int n = 2; n <= n_max + 1; ++n) {
    v[at(n, 0)] = ((2 * n - 1) * z0 * v[at(n - 1, 0)] - (n - 1) * rho * v[at(n - 2, 0)]) / n;
  }
  for (int m = 1; m <= m_max + 1; ++m) {
    v[at(m, m)] = (2 * m - 1) * (x0 * v[at(m - 1, m - 1)] - y0 * w[at(m - 1, m - 1)]);
    w[at(m, m)] = (2 * m - 1) * (x0 * w[at(m - 1, m - 1)] + y0 * v[at(m - 1, m - 1)]);
    if (m <= n_max) {
      v[at(m + 1, m)] = (2 * m + 1) * z0 * v[at(m, m)];
      w[at(m + 1, m)] = (2 * m + 1) * z0 * w[at(m, m)];
    }
    for (int n = m + 2; n <= n_max + 1; ++n) {
      v[at(n, m)] = ((2 * n - 1) * z0 * v[at(n - 1, m)] - (n + m - 1) * rho * v[at(n - 2, m)]) / (n - m);
      w[at(n, m)] = ((2 * n - 1) * z0 * w[at(n - 1, m)] - (n + m - 1) * rho * w[at(n - 2, m)]) / (n - m);
    }
  }

  double ax = 0.0, ay = 0.0, az = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    for (int n = m; n <= n_max; ++n) {
      const double c = c_[index(n, m)];
      if (m == 0) {
        ax -= c * v[at(n + 1, 1)];
        ay -= c * w[at(n + 1, 1)];
        az -= (n + 1) * c * v[at(n + 1, 0)];
      } else {
        const double s = s_[index(n, m)];
        const double fac = 0.5 * (n - m + 1) * (n - m + 2);
        ax += 0.5 * (-c * v[at(n + 1, m + 1)] - s * w[at(n + 1, m + 1)]) +
              fac * (c * v[at(n + 1, m - 1)] + s * w[at(n + 1, m - 1)]);
        ay += 0.5 * (-c * w[at(n + 1, m + 1)] + s * v[at(n + 1, m + 1)]) +
              fac * (-c * w[at(n + 1, m - 1)] + s * v[at(n + 1, m - 1)]);
        az += (n - m + 1) * (-c * v[at(n + 1, m)] - s * w[at(n + 1, m)]);
      }
    }
  }
  const double scale = mu_ / (radius_ * radius_);
  return {scale * ax, scale * ay, scale * az};
}

double GravityModel::potential(const Vec3& r, int degree, int order) const {
  check_range(degree, order);
  const double rn = r.norm();
  const double sin_phi = r.z() / rn;
  const double cos_phi = std::sqrt(std::max(0.0, 1.0 - sin_phi * sin_phi));
  const double lambda = std::atan2(r.y(), r.x());

  // Fully normalized associated Legendre functions by the standard column recursion.
  const int dim = degree + 1;
  std::vector<double> p(static_cast<std::size_t>(dim * dim), 0.0);
  auto at = [dim](int n, int m) { return static_cast<std::size_t>(n * dim + m); };
  p[at(0, 0)] = 1.0;
  for (int m = 1; m <= degree; ++m) {
    const double k = (m == 1) ? std::sqrt(3.0) : std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    p[at(m, m)] = k * cos_phi * p[at(m - 1, m - 1)];
  }
  for (int m = 0; m <= degree; ++m) {
    if (m + 1 <= degree) p[at(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * sin_phi * p[at(m, m)];
    for (int n = m + 2; n <= degree; ++n) {
      const double a = std::sqrt((4.0 * n * n - 1.0) / (static_cast<double>(n * n - m * m)));
      const double b = std::sqrt(((2.0 * n + 1.0) * ((n - 1.0) * (n - 1.0) - m * m)) /
                                 ((2.0 * n - 3.0) * (static_cast<double>(n * n - m * m))));
      p[at(n, m)] = a * sin_phi * p[at(n - 1, m)] - b * p[at(n - 2, m)];
    }
  }

  double sum = 0.0;
  double ratio_pow = 1.0;  // (R/r)^n
  const double ratio = radius_ / rn;
  for (int n = 0; n <= degree; ++n) {
    double inner = 0.0;
    for (int m = 0; m <= std::min(n, order); ++m) {
      inner += p[at(n, m)] *
               (cbar_[index(n, m)] * std::cos(m * lambda) + sbar_[index(n, m)] * std::sin(m * lambda));
    }
    sum += ratio_pow * inner;
    ratio_pow *= ratio;
  }
  return mu_ / rn * sum;
}

Vec3 gravity_spherical_harmonic(const Vec3& r_ecef, int degree, int order) {
  return GravityModel::bundled().acceleration(r_ecef, degree, order);
}

}  // namespace eosched
