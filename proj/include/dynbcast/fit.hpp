// Least-squares scaling fits: median rounds per grid cell against a model
// that is linear in its coefficients, with terms built from {1, n, s, c, psi,
// logn}. Used to check the theorem-level time bounds as empirical fits.

#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dynbcast/core.hpp"

namespace dynbcast {

struct FitError : SimError {
  using SimError::SimError;
};

struct FitPoint {
  double n = 0, s = 0, c = 0, T = 0, tau = 0;
  double y = 0;  // median rounds for the cell
};

struct FitResult {
  std::vector<std::string> terms;
  std::vector<double> coefficients;
  double r_squared = 0;
  std::vector<double> fitted;
  std::vector<double> residuals;
};

namespace detail {

inline double eval_factor(const std::string& factor, const FitPoint& p) {
  std::string var = factor;
  int power = 1;
  if (auto caret = factor.find('^'); caret != std::string::npos) {
    var = factor.substr(0, caret);
    power = std::stoi(factor.substr(caret + 1));
  }
  double base;
  if (var == "1") {
    base = 1.0;
  } else if (var == "n") {
    base = p.n;
  } else if (var == "s") {
    base = p.s;
  } else if (var == "c") {
    base = p.c;
  } else if (var == "psi") {
    if (p.T == 0 || p.tau == 0)
      throw FitError("model uses psi but the dataset has infinite T or tau");
    base = std::min(p.T, p.tau);
  } else if (var == "logn") {
    base = std::log2(p.n);
  } else {
    throw FitError("unknown model variable '" + var + "' (known: 1, n, s, c, psi, logn)");
  }
  return std::pow(base, power);
}

inline double eval_term(const std::string& term, const FitPoint& p) {
  double v = 1.0;
  std::stringstream ss(term);
  std::string factor;
  while (std::getline(ss, factor, '*')) v *= eval_factor(factor, p);
  return v;
}

}  // namespace detail

inline std::vector<std::string> parse_model(const std::string& model) {
  std::vector<std::string> terms;
  std::stringstream ss(model);
  std::string term;
  while (std::getline(ss, term, ',')) {
    std::string clean;
    for (char ch : term)
      if (!isspace(static_cast<unsigned char>(ch))) clean.push_back(ch);
    if (!clean.empty()) terms.push_back(clean);
  }
  if (terms.empty()) throw FitError("empty model");
  return terms;
}

inline FitResult fit_scaling(const std::vector<FitPoint>& points, const std::string& model) {
  const std::vector<std::string> terms = parse_model(model);
  const size_t k = terms.size();
  if (points.size() < 3 || points.size() < k)
    throw FitError("need at least max(3, #terms) distinct cells, got " +
                   std::to_string(points.size()));

  // Normal equations (X^T X) b = X^T y, solved by Gaussian elimination with
  // partial pivoting. Dimensions are tiny.
  std::vector<std::vector<double>> x(points.size(), std::vector<double>(k));
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = 0; j < k; ++j) x[i][j] = detail::eval_term(terms[j], points[i]);

  std::vector<std::vector<double>> ata(k, std::vector<double>(k, 0.0));
  std::vector<double> aty(k, 0.0);
  for (size_t i = 0; i < points.size(); ++i) {
    for (size_t a = 0; a < k; ++a) {
      aty[a] += x[i][a] * points[i].y;
      for (size_t b = 0; b < k; ++b) ata[a][b] += x[i][a] * x[i][b];
    }
  }

  std::vector<size_t> order(k);
  for (size_t j = 0; j < k; ++j) order[j] = j;
  for (size_t col = 0; col < k; ++col) {
    size_t best = col;
    for (size_t row = col + 1; row < k; ++row)
      if (std::fabs(ata[row][col]) > std::fabs(ata[best][col])) best = row;
    std::swap(ata[col], ata[best]);
    std::swap(aty[col], aty[best]);
    if (std::fabs(ata[col][col]) < 1e-9 * (1.0 + std::fabs(aty[col])))
      throw FitError("rank-deficient design: term '" + terms[col] +
                     "' is collinear with the others on this grid");
    for (size_t row = 0; row < k; ++row) {
      if (row == col) continue;
      const double f = ata[row][col] / ata[col][col];
      for (size_t j = col; j < k; ++j) ata[row][j] -= f * ata[col][j];
      aty[row] -= f * aty[col];
    }
  }

  FitResult res;
  res.terms = terms;
  res.coefficients.resize(k);
  for (size_t j = 0; j < k; ++j) res.coefficients[j] = aty[j] / ata[j][j];

  double ss_res = 0, ss_tot = 0, mean = 0;
  for (const auto& p : points) mean += p.y;
  mean /= static_cast<double>(points.size());
  res.fitted.resize(points.size());
  res.residuals.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    double f = 0;
    for (size_t j = 0; j < k; ++j) f += res.coefficients[j] * x[i][j];
    res.fitted[i] = f;
    res.residuals[i] = points[i].y - f;
    ss_res += res.residuals[i] * res.residuals[i];
    ss_tot += (points[i].y - mean) * (points[i].y - mean);
  }
  res.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
  return res;
}

// Median of a cell's trial outcomes.
inline double median(std::vector<double> xs) {
  if (xs.empty()) throw FitError("median of empty set");
  std::sort(xs.begin(), xs.end());
  const size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

}  // namespace dynbcast
