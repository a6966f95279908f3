#include "aks/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace aks {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void config_fail(int line_no, const std::string& why) {
  throw std::runtime_error("config parse error at line " + std::to_string(line_no) + ": " + why);
}

double parse_double(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) config_fail(line_no, "bad number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    config_fail(line_no, "bad number '" + s + "'");
  } catch (const std::out_of_range&) {
    config_fail(line_no, "number out of range '" + s + "'");
  }
}

long parse_int(const std::string& s, int line_no) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) config_fail(line_no, "bad integer '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    config_fail(line_no, "bad integer '" + s + "'");
  } catch (const std::out_of_range&) {
    config_fail(line_no, "integer out of range '" + s + "'");
  }
}

std::vector<double> parse_vector(const std::vector<std::string>& toks, size_t from, int line_no) {
  std::vector<double> out;
  for (size_t i = from; i < toks.size(); ++i) out.push_back(parse_double(toks[i], line_no));
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);  // binary: LF endings everywhere
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << text;
}

std::string csv_time_header(int n) {
  std::string h;
  for (int k = 1; k <= n; ++k) h += "t" + std::to_string(k) + ",";
  return h;
}

}  // namespace

const char* init_kind_name(InitKind k) {
  switch (k) {
    case InitKind::Random: return "random";
    case InitKind::Clifford: return "clifford";
    case InitKind::Explicit: return "explicit";
  }
  return "?";
}

GridSpec RunConfig::grid() const {
  if (grid_min.size() != grid_max.size() || grid_min.size() != spacing.size()) {
    throw std::runtime_error("config error: grid_min/grid_max/spacing dimension mismatch");
  }
  GridSpec g;
  g.origin = grid_min;
  g.spacing = spacing;
  for (size_t k = 0; k < grid_min.size(); ++k) {
    if (spacing[k] <= 0) throw std::runtime_error("config error: spacing must be positive");
    const double raw = (grid_max[k] - grid_min[k]) / spacing[k];
    const long count = std::lround(raw) + 1;
    if (count < 1 || std::abs(raw - (count - 1)) > 1e-9) {
      throw std::runtime_error("config error: grid extent is not a multiple of the spacing");
    }
    g.counts.push_back(static_cast<int>(count));
  }
  return g;
}

LoopElement RunConfig::initial_condition() const {
  switch (init) {
    case InitKind::Random:
      return random_initial(n, d, seed);
    case InitKind::Clifford: {
      if (n != 2) throw std::runtime_error("config error: clifford preset requires n = 2");
      return CliffordTorus(clifford_a, clifford_b).killing_field();
    }
    case InitKind::Explicit: {
      LoopElement x(2 * n, -d, 1, true);
      for (const auto& [deg, mat] : matrices) {
        if (deg < -d || deg > 1) {
          throw std::runtime_error("config error: explicit matrix degree " +
                                   std::to_string(deg) + " outside [-d, 1]");
        }
        if (mat.rows() != 2 * n || mat.cols() != 2 * n) {
          throw std::runtime_error("config error: explicit matrix size mismatch");
        }
        x.set_coeff_real(deg, mat);
      }
      return x;
    }
  }
  throw std::runtime_error("config error: unknown init kind");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  bool in_matrix = false;
  int matrix_deg = 0, matrix_rows = 0, matrix_cols = 0, matrix_row = 0;
  RMatrix matrix;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const auto toks = tokens(raw);
    if (toks.empty()) continue;

    if (in_matrix) {
      if (toks.size() == 1 && toks[0] == "end") {
        if (matrix_row != matrix_rows) config_fail(line_no, "matrix block ended early");
        cfg.matrices[matrix_deg] = matrix;
        in_matrix = false;
        continue;
      }
      if (static_cast<int>(toks.size()) != matrix_cols) {
        config_fail(line_no, "expected " + std::to_string(matrix_cols) + " entries in matrix row");
      }
      if (matrix_row >= matrix_rows) config_fail(line_no, "too many matrix rows");
      for (int c = 0; c < matrix_cols; ++c) {
        matrix(matrix_row, c) = parse_double(toks[static_cast<size_t>(c)], line_no);
      }
      ++matrix_row;
      continue;
    }

    if (toks[0] == "matrix") {
      // matrix X[<degree>] <rows> <cols>
      if (toks.size() != 4) config_fail(line_no, "matrix header needs: matrix X[deg] rows cols");
      const std::string& name = toks[1];
      const auto lb = name.find('['), rb = name.find(']');
      if (name.substr(0, 1) != "X" || lb == std::string::npos || rb == std::string::npos || rb < lb) {
        config_fail(line_no, "matrix name must look like X[degree]");
      }
      matrix_deg = static_cast<int>(parse_int(name.substr(lb + 1, rb - lb - 1), line_no));
      matrix_rows = static_cast<int>(parse_int(toks[2], line_no));
      matrix_cols = static_cast<int>(parse_int(toks[3], line_no));
      if (matrix_rows < 1 || matrix_cols < 1) config_fail(line_no, "bad matrix dimensions");
      matrix = RMatrix::Zero(matrix_rows, matrix_cols);
      matrix_row = 0;
      in_matrix = true;
      continue;
    }

    if (toks.size() < 3 || toks[1] != "=") {
      config_fail(line_no, "expected 'key = value...'");
    }
    const std::string& key = toks[0];
    const std::string& value = toks[2];
    if (key == "n") cfg.n = static_cast<int>(parse_int(value, line_no));
    else if (key == "d") cfg.d = static_cast<int>(parse_int(value, line_no));
    else if (key == "rule") {
      try { cfg.rule = rule_from_name(value); }
      catch (const std::invalid_argument& e) { config_fail(line_no, e.what()); }
    }
    else if (key == "z0") cfg.z0 = parse_double(value, line_no);
    else if (key == "h") cfg.h = parse_double(value, line_no);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
    else if (key == "init") {
      if (value == "random") cfg.init = InitKind::Random;
      else if (value == "clifford") cfg.init = InitKind::Clifford;
      else if (value == "explicit") cfg.init = InitKind::Explicit;
      else config_fail(line_no, "init must be random|clifford|explicit");
    }
    else if (key == "clifford_a") cfg.clifford_a = parse_double(value, line_no);
    else if (key == "clifford_b") cfg.clifford_b = parse_double(value, line_no);
    else if (key == "grid_min") cfg.grid_min = parse_vector(toks, 2, line_no);
    else if (key == "grid_max") cfg.grid_max = parse_vector(toks, 2, line_no);
    else if (key == "spacing") cfg.spacing = parse_vector(toks, 2, line_no);
    else if (key == "out") cfg.out = value;
    else if (key == "z_samples") cfg.z_samples = static_cast<int>(parse_int(value, line_no));
    else if (key == "period_tol") cfg.period_tol = parse_double(value, line_no);
    else if (key == "column") cfg.column = static_cast<int>(parse_int(value, line_no));
    else if (key == "periods") {
      cfg.periods.clear();
      std::vector<double> current;
      for (size_t i = 2; i < toks.size(); ++i) {
        if (toks[i] == ";") {
          if (!current.empty()) cfg.periods.push_back(current);
          current.clear();
        } else {
          current.push_back(parse_double(toks[i], line_no));
        }
      }
      if (!current.empty()) cfg.periods.push_back(current);
    }
    else config_fail(line_no, "unknown key '" + key + "'");
  }
  if (in_matrix) config_fail(line_no, "unterminated matrix block");

  // Semantic checks (still exit code 2 territory).
  if (cfg.n < 2) throw std::runtime_error("config error: n must be >= 2");
  if (cfg.d < 0) throw std::runtime_error("config error: d must be >= 0");
  if (cfg.h <= 0) throw std::runtime_error("config error: h must be positive");
  if (cfg.z0 == 0) throw std::runtime_error("config error: z0 must be nonzero");
  if (cfg.init == InitKind::Clifford &&
      std::abs(cfg.clifford_a * cfg.clifford_a + cfg.clifford_b * cfg.clifford_b - 1.0) > 1e-12) {
    throw std::runtime_error("config error: clifford preset requires a^2 + b^2 = 1");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config file " + file.string());
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "n = " << cfg.n << "\n";
  os << "d = " << cfg.d << "\n";
  os << "rule = " << rule_name(cfg.rule) << "\n";
  os << "z0 = " << fmt_g17(cfg.z0) << "\n";
  os << "h = " << fmt_g17(cfg.h) << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "init = " << init_kind_name(cfg.init) << "\n";
  os << "clifford_a = " << fmt_g17(cfg.clifford_a) << "\n";
  os << "clifford_b = " << fmt_g17(cfg.clifford_b) << "\n";
  auto vec = [&](const char* key, const std::vector<double>& v) {
    os << key << " =";
    for (double x : v) os << " " << fmt_g17(x);
    os << "\n";
  };
  vec("grid_min", cfg.grid_min);
  vec("grid_max", cfg.grid_max);
  vec("spacing", cfg.spacing);
  os << "out = " << cfg.out << "\n";
  os << "z_samples = " << cfg.z_samples << "\n";
  os << "period_tol = " << fmt_g17(cfg.period_tol) << "\n";
  os << "column = " << cfg.column << "\n";
  if (!cfg.periods.empty()) {
    os << "periods =";
    for (size_t p = 0; p < cfg.periods.size(); ++p) {
      if (p) os << " ;";
      for (double x : cfg.periods[p]) os << " " << fmt_g17(x);
    }
    os << "\n";
  }
  for (const auto& [deg, mat] : cfg.matrices) {
    os << "matrix X[" << deg << "] " << mat.rows() << " " << mat.cols() << "\n";
    for (int r = 0; r < mat.rows(); ++r) {
      for (int c = 0; c < mat.cols(); ++c) {
        if (c) os << " ";
        os << fmt_g17(mat(r, c));
      }
      os << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

LoopElement random_initial(int n, int d, std::uint64_t seed) {
  if (d < 0) throw std::invalid_argument("random_initial requires d >= 0");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    // top 53 bits -> [0,1) -> [-1,1]; avoids distribution implementation drift
    const double u = static_cast<double>(rng() >> 11) * 0x1p-53;
    return 2.0 * u - 1.0;
  };
  const int m = 2 * n;
  LoopElement x(m, -d, 1, true);
  for (int deg = -d; deg <= 1; ++deg) {
    RMatrix raw(m, m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) raw(r, c) = uniform();
    }
    RMatrix skew = 0.5 * (raw - raw.transpose());
    RMatrix out = RMatrix::Zero(m, m);
    const bool even = ((deg % 2) + 2) % 2 == 0;
    if (even) {
      out.topLeftCorner(n, n) = skew.topLeftCorner(n, n);
      out.bottomRightCorner(n, n) = skew.bottomRightCorner(n, n);
    } else {
      out.topRightCorner(n, n) = skew.topRightCorner(n, n);
      out.bottomLeftCorner(n, n) = skew.bottomLeftCorner(n, n);
    }
    x.set_coeff_real(deg, out);
  }
  return x;
}

void write_flow_residuals_csv(const std::filesystem::path& file, const FlowResult& flow) {
  std::ostringstream os;
  os << csv_time_header(flow.grid.dims()) << "norm_drift,max_charpoly_drift\n";
  for (size_t s = 0; s < flow.samples.size(); ++s) {
    const auto t = flow.grid.point(flow.grid.unlinear(static_cast<long>(s)));
    for (double v : t) os << fmt_g17(v) << ",";
    os << fmt_g17(flow.norm_drift.empty() ? 0.0 : flow.norm_drift[s]) << ","
       << fmt_g17(flow.charpoly_drift.empty() ? 0.0 : flow.charpoly_drift[s]) << "\n";
  }
  write_text(file, os.str());
}

void write_flow_elements(const std::filesystem::path& file, const FlowResult& flow) {
  std::ostringstream os;
  for (size_t s = 0; s < flow.samples.size(); ++s) {
    const auto idx = flow.grid.unlinear(static_cast<long>(s));
    const auto t = flow.grid.point(idx);
    os << "sample " << s << " idx";
    for (int i : idx) os << " " << i;
    os << " t";
    for (double v : t) os << " " << fmt_g17(v);
    os << "\n" << serialize(flow.samples[s]);
  }
  write_text(file, os.str());
}

void write_immersion_csv(const std::filesystem::path& file,
                         const std::vector<ImmersionSample>& samples) {
  std::ostringstream os;
  if (samples.empty()) {
    write_text(file, "");
    return;
  }
  const int n = static_cast<int>(samples[0].t.size());
  const int fdim = static_cast<int>(samples[0].f.size());
  os << csv_time_header(n);
  for (int k = 1; k <= fdim; ++k) os << "f" << k << ",";
  os << "imm_det,omega_residual,eta_residual\n";
  for (const auto& s : samples) {
    for (double v : s.t) os << fmt_g17(v) << ",";
    for (int k = 0; k < fdim; ++k) os << fmt_g17(s.f(k)) << ",";
    os << fmt_g17(s.imm_det) << "," << fmt_g17(s.omega_residual) << ","
       << fmt_g17(s.eta_residual) << "\n";
  }
  write_text(file, os.str());
}

void write_mesh(const std::filesystem::path& file, const FrameField& frames, int column) {
  if (frames.grid.dims() != 2) throw std::invalid_argument("mesh export needs a 2-d grid");
  const int rows = frames.grid.counts[0];
  const int cols = frames.grid.counts[1];
  const int fdim = static_cast<int>(frames.frames[0].rows());
  std::ostringstream os;
  os << "mesh " << rows << " " << cols << " " << fdim << "\n";
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const auto& f = frames.at({i, j});
      for (int k = 0; k < fdim; ++k) {
        if (k) os << " ";
        os << fmt_g17(f(k, column - 1));
      }
      os << "\n";
    }
  }
  write_text(file, os.str());
}

void write_spectral_report(const std::filesystem::path& file, const SpectralRecord& record,
                           const std::vector<MuSample>& mu) {
  std::ostringstream os;
  for (size_t k = 0; k < record.charpoly.size(); ++k) {
    os << "c_" << k << ":";
    const auto& p = record.charpoly[k];
    for (int d = p.lo(); d <= p.hi(); ++d) {
      const Complex c = p.coeff(d);
      if (c == Complex(0.0, 0.0)) continue;
      os << " (" << d << "," << fmt_g17(c.real()) << "," << fmt_g17(c.imag()) << ")";
    }
    os << "\n";
  }
  for (const auto& [z, disc] : record.disc_samples) {
    os << "disc (" << fmt_g17(z.real()) << "," << fmt_g17(z.imag()) << ") "
       << fmt_g17(disc.real()) << "," << fmt_g17(disc.imag()) << "\n";
  }
  os << record.regularity.summary() << "\n";
  for (const auto& s : mu) {
    os << "mu i=" << s.i << " z=(" << fmt_g17(s.z.real()) << "," << fmt_g17(s.z.imag()) << ")";
    if (!s.ok) {
      os << " rejected: " << s.reason << "\n";
      continue;
    }
    for (const auto& p : s.pairs) {
      os << " [w=(" << fmt_g17(p.w.real()) << "," << fmt_g17(p.w.imag()) << ") mu=("
         << fmt_g17(p.mu.real()) << "," << fmt_g17(p.mu.imag()) << ") res="
         << fmt_g17(p.residual) << "]";
    }
    os << "\n";
  }
  write_text(file, os.str());
}

void write_drift_csv(const std::filesystem::path& file, const std::vector<DriftRow>& rows) {
  std::ostringstream os;
  if (!rows.empty()) os << csv_time_header(static_cast<int>(rows[0].t.size()));
  os << "k,z_re,z_im,drift\n";
  for (const auto& r : rows) {
    for (double v : r.t) os << fmt_g17(v) << ",";
    os << r.k << "," << fmt_g17(r.z.real()) << "," << fmt_g17(r.z.imag()) << ","
       << fmt_g17(r.drift) << "\n";
  }
  write_text(file, os.str());
}

void write_period_report(const std::filesystem::path& file, const PeriodReport& report) {
  write_text(file, report.serialized());
}

namespace {

int guard_run(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    return what.find("config") != std::string::npos ? 2 : 1;
  }
}

FlowResult flow_for(const RunConfig& cfg) {
  FlowConfig fc;
  fc.rule = cfg.rule;
  fc.h = cfg.h;
  fc.grid = cfg.grid();
  return integrate_flow(cfg.initial_condition(), fc);
}

}  // namespace

int run_flow(const RunConfig& cfg) {
  return guard_run([&] {
    std::filesystem::create_directories(cfg.out);
    const FlowResult flow = flow_for(cfg);
    write_flow_residuals_csv(std::filesystem::path(cfg.out) / "flow_residuals.csv", flow);
    write_flow_elements(std::filesystem::path(cfg.out) / "flow_elements.txt", flow);
    for (const auto& x : flow.samples) {
      if (!validate(x).all_pass) {
        std::cerr << "invariant failure: flow sample fails validation\n";
        return 1;
      }
    }
    return 0;
  });
}

int run_frame(const RunConfig& cfg) {
  return guard_run([&] {
    std::filesystem::create_directories(cfg.out);
    const FlowResult flow = flow_for(cfg);
    const FrameField frames = integrate_frame(flow, cfg.rule, cfg.z0, cfg.h);
    const int column = cfg.column > 0 ? cfg.column : cfg.n + 1;
    const auto samples = immersion_samples(frames, flow, column);
    write_immersion_csv(std::filesystem::path(cfg.out) / "immersion.csv", samples);
    write_mesh(std::filesystem::path(cfg.out) / "mesh.txt", frames, column);
    if (frames.max_orth_drift > 1e-8 || frames.max_det_drift > 1e-8) {
      std::cerr << "invariant failure: frame orthogonality drift "
                << fmt_g17(frames.max_orth_drift) << ", det drift "
                << fmt_g17(frames.max_det_drift) << "\n";
      return 1;
    }
    return 0;
  });
}

int run_spectral(const RunConfig& cfg) {
  return guard_run([&] {
    std::filesystem::create_directories(cfg.out);
    const LoopElement x0 = cfg.initial_condition();
    const SpectralRecord record = spectral_record(x0, cfg.z_samples);
    std::vector<MuSample> mu;
    const Complex z_mu = 0.9 * Complex(std::cos(std::numbers::pi / 4), std::sin(std::numbers::pi / 4));
    for (int i = 1; i <= cfg.n; ++i) mu.push_back(mu_eigenvalues(x0, i, z_mu));
    write_spectral_report(std::filesystem::path(cfg.out) / "spectral_report.txt", record, mu);
    const FlowResult flow = flow_for(cfg);
    write_drift_csv(std::filesystem::path(cfg.out) / "spectral_drift.csv",
                    isospectral_drift_table(flow));
    return 0;
  });
}

int run_period(const RunConfig& cfg) {
  return guard_run([&] {
    if (cfg.periods.empty()) {
      throw std::runtime_error("config error: period run needs candidate periods");
    }
    std::filesystem::create_directories(cfg.out);
    const FlowResult flow = flow_for(cfg);
    const FrameField frames = integrate_frame(flow, cfg.rule, cfg.z0, cfg.h);
    for (size_t k = 0; k < cfg.periods.size(); ++k) {
      const PeriodReport report = detect_period(flow, frames, cfg.periods[k], cfg.period_tol);
      write_period_report(
          std::filesystem::path(cfg.out) / ("period_" + std::to_string(k) + ".txt"), report);
    }
    return 0;
  });
}

int run_clifford(const RunConfig& cfg) {
  return guard_run([&] {
    std::filesystem::create_directories(cfg.out);
    const CliffordTorus torus(cfg.clifford_a, cfg.clifford_b);
    const GridSpec grid = cfg.grid();
    if (grid.dims() != 2) throw std::runtime_error("config error: clifford grid must be 2-d");
    const FrameField frames = integrate_clifford_frame(torus, grid, cfg.z0, cfg.h);
    write_mesh(std::filesystem::path(cfg.out) / "mesh.txt", frames, 3);

    // Immersion table with the constant tangential Jacobian det = a*b and
    // exactly flat omega/eta (the connection blocks vanish identically).
    std::vector<ImmersionSample> samples;
    double worst = 0.0;
    for (long lin = 0; lin < grid.total(); ++lin) {
      const auto idx = grid.unlinear(lin);
      const auto t = grid.point(idx);
      ImmersionSample s;
      s.t = t;
      s.f = frames.frames[static_cast<size_t>(lin)].col(2);
      s.imm_det = torus.a * torus.b;
      s.omega_residual = 0.0;
      s.eta_residual = 0.0;
      samples.push_back(s);
      if (cfg.z0 == 1.0) {
        const Eigen::Vector4d closed = torus.immersion(t[0], t[1]);
        worst = std::max(worst, (samples.back().f - closed).cwiseAbs().maxCoeff());
      }
    }
    write_immersion_csv(std::filesystem::path(cfg.out) / "immersion.csv", samples);
    if (cfg.z0 == 1.0) {
      std::cout << "clifford golden max |f - closed form| = " << fmt_g17(worst) << "\n";
      if (worst > 1e-6) {
        std::cerr << "invariant failure: clifford frame deviates from the closed form\n";
        return 1;
      }
    }
    return 0;
  });
}

}  // namespace aks
