#include "ssmx/io.hpp"

#include <fstream>
#include <sstream>

namespace ssmx {

namespace {

struct LineReader {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  std::string origin;

  [[noreturn]] void error(std::size_t line_no, const std::string& msg) const {
    fail(origin + " line " + std::to_string(line_no) + ": " + msg);
  }

  // Next non-empty line with comments stripped; returns false at end of file.
  bool next(std::vector<std::string>* tokens, std::size_t* line_no) {
    while (pos < lines.size()) {
      std::string s = lines[pos++];
      auto hash = s.find('#');
      if (hash != std::string::npos) s.erase(hash);
      std::istringstream is(s);
      std::vector<std::string> toks;
      std::string t;
      while (is >> t) toks.push_back(t);
      if (toks.empty()) continue;
      *tokens = std::move(toks);
      *line_no = pos;  // 1-based
      return true;
    }
    return false;
  }
};

double parse_number(const LineReader& rd, std::size_t line_no, const std::string& tok) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) rd.error(line_no, "malformed number '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    rd.error(line_no, "malformed number '" + tok + "'");
  }
}

int parse_int(const LineReader& rd, std::size_t line_no, const std::string& tok) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) rd.error(line_no, "malformed integer '" + tok + "'");
    return v;
  } catch (const std::exception&) {
    rd.error(line_no, "malformed integer '" + tok + "'");
  }
}

Eigen::MatrixXd parse_matrix(LineReader& rd, int dim) {
  Eigen::MatrixXd m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    std::vector<std::string> toks;
    std::size_t ln = 0;
    if (!rd.next(&toks, &ln)) rd.error(rd.lines.size(), "unexpected end of file inside matrix");
    if (static_cast<int>(toks.size()) != dim) {
      rd.error(ln, "expected " + std::to_string(dim) + " entries in matrix row, got " +
                       std::to_string(toks.size()));
    }
    for (int c = 0; c < dim; ++c) m(r, c) = parse_number(rd, ln, toks[c]);
  }
  std::vector<std::string> toks;
  std::size_t ln = 0;
  if (!rd.next(&toks, &ln) || toks[0] != "end") rd.error(ln, "expected 'end' after matrix rows");
  return m;
}

PolyMap parse_poly(LineReader& rd, int dim, int n_out) {
  PolyMap p = PolyMap::zero(dim, n_out);
  for (;;) {
    std::vector<std::string> toks;
    std::size_t ln = 0;
    if (!rd.next(&toks, &ln)) rd.error(rd.lines.size(), "unexpected end of file inside poly block");
    if (toks[0] == "end") break;
    if (static_cast<int>(toks.size()) != dim + 1 + n_out) {
      rd.error(ln, "expected <" + std::to_string(dim) + " exponents> : <" + std::to_string(n_out) +
                       " coefficients>");
    }
    if (toks[dim] != ":") rd.error(ln, "expected ':' between exponents and coefficients");
    MultiIndex mi(dim);
    for (int i = 0; i < dim; ++i) {
      int e = parse_int(rd, ln, toks[i]);
      if (e < 0 || e > 255) rd.error(ln, "exponent out of range");
      mi[i] = static_cast<std::uint8_t>(e);
    }
    Eigen::VectorXd coef(n_out);
    for (int i = 0; i < n_out; ++i) coef(i) = parse_number(rd, ln, toks[dim + 1 + i]);
    p.add_term(mi, coef);
  }
  p.prune(0.0);
  return p;
}

void ensure_size(std::vector<Eigen::MatrixXd>* v, int idx, int dim) {
  while (static_cast<int>(v->size()) <= idx) v->push_back(Eigen::MatrixXd::Zero(dim, dim));
}

void ensure_size(std::vector<PolyMap>* v, int idx, int dim) {
  while (static_cast<int>(v->size()) <= idx) v->push_back(PolyMap::zero(dim, dim));
}

}  // namespace

SystemSpec parse_model(const std::string& text, const std::string& origin) {
  LineReader rd;
  rd.origin = origin;
  {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) rd.lines.push_back(line);
  }

  SystemSpec spec;
  std::vector<std::string> toks;
  std::size_t ln = 0;
  if (!rd.next(&toks, &ln) || toks.size() != 2 || toks[0] != "ssmx-model" || toks[1] != "1") {
    rd.error(ln == 0 ? 1 : ln, "expected header 'ssmx-model 1'");
  }

  bool have_dim = false, have_l = false;
  while (rd.next(&toks, &ln)) {
    const std::string& key = toks[0];
    if (key == "name" && toks.size() == 2) {
      spec.name = toks[1];
    } else if (key == "dim" && toks.size() == 2) {
      spec.dim = parse_int(rd, ln, toks[1]);
      if (spec.dim < 2 || spec.dim > 64) rd.error(ln, "dim out of range");
      have_dim = true;
    } else if (key == "degree-limit" && toks.size() == 2) {
      spec.degree_limit = parse_int(rd, ln, toks[1]);
    } else if (key == "hamiltonian" && toks.size() == 2) {
      spec.hamiltonian = parse_int(rd, ln, toks[1]) != 0;
    } else if (key == "eval-radius" && toks.size() == 2) {
      spec.eval_radius = parse_number(rd, ln, toks[1]);
    } else if (key == "collar" && toks.size() == 2) {
      spec.collar_halfwidth = parse_number(rd, ln, toks[1]);
    } else if (key == "matrix") {
      if (!have_dim) rd.error(ln, "'dim' must appear before any matrix block");
      if (toks.size() == 2 && toks[1] == "L") {
        spec.L = parse_matrix(rd, spec.dim);
        have_l = true;
      } else if (toks.size() == 3 && toks[1] == "C") {
        int p = parse_int(rd, ln, toks[2]);
        if (p < 1 || p > 16) rd.error(ln, "damping eps-power out of range (expected 1..16)");
        ensure_size(&spec.C, p - 1, spec.dim);
        spec.C[p - 1] = parse_matrix(rd, spec.dim);
      } else {
        rd.error(ln, "expected 'matrix L' or 'matrix C <eps-power>'");
      }
    } else if (key == "poly") {
      if (!have_dim) rd.error(ln, "'dim' must appear before any poly block");
      if (toks.size() == 2 && toks[1] == "N") {
        spec.N = parse_poly(rd, spec.dim, spec.dim);
      } else if (toks.size() == 2 && toks[1] == "I") {
        spec.conserved = parse_poly(rd, spec.dim, 1);
      } else if (toks.size() == 3 && toks[1] == "G") {
        int p = parse_int(rd, ln, toks[2]);
        if (p < 1 || p > 16) rd.error(ln, "perturbation eps-power out of range (expected 1..16)");
        ensure_size(&spec.G, p - 1, spec.dim);
        spec.G[p - 1] = parse_poly(rd, spec.dim, spec.dim);
      } else {
        rd.error(ln, "expected 'poly N', 'poly G <eps-power>', or 'poly I'");
      }
    } else {
      rd.error(ln, "unknown directive '" + key + "'");
    }
  }
  if (!have_dim) rd.error(rd.lines.size(), "missing 'dim'");
  if (!have_l) rd.error(rd.lines.size(), "missing 'matrix L'");
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(origin + ": " + e.what());
  }
  return spec;
}

SystemSpec load_model_file(const std::string& path) {
  return parse_model(read_text_file(path), path);
}

namespace {

void emit_matrix(std::ostringstream& os, const std::string& head, const Eigen::MatrixXd& m) {
  os << head << "\n";
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) os << (c ? " " : "") << format_g17(m(r, c));
    os << "\n";
  }
  os << "end\n";
}

void emit_poly(std::ostringstream& os, const std::string& head, const PolyMap& p) {
  os << head << "\n";
  for (const auto& [mi, coef] : p.terms()) {
    for (std::size_t i = 0; i < mi.size(); ++i) os << (i ? " " : "") << static_cast<int>(mi[i]);
    os << " :";
    for (int i = 0; i < coef.size(); ++i) os << " " << format_g17(coef(i));
    os << "\n";
  }
  os << "end\n";
}

}  // namespace

std::string serialize_model(const SystemSpec& spec) {
  std::ostringstream os;
  os << "ssmx-model 1\n";
  if (!spec.name.empty()) os << "name " << spec.name << "\n";
  os << "dim " << spec.dim << "\n";
  os << "degree-limit " << spec.degree_limit << "\n";
  os << "hamiltonian " << (spec.hamiltonian ? 1 : 0) << "\n";
  os << "eval-radius " << format_g17(spec.eval_radius) << "\n";
  os << "collar " << format_g17(spec.collar_halfwidth) << "\n";
  emit_matrix(os, "matrix L", spec.L);
  for (std::size_t k = 0; k < spec.C.size(); ++k) {
    if (spec.C[k].cwiseAbs().maxCoeff() == 0.0) continue;
    emit_matrix(os, "matrix C " + std::to_string(k + 1), spec.C[k]);
  }
  if (!spec.N.empty()) emit_poly(os, "poly N", spec.N);
  for (std::size_t k = 0; k < spec.G.size(); ++k) {
    if (spec.G[k].empty()) continue;
    emit_poly(os, "poly G " + std::to_string(k + 1), spec.G[k]);
  }
  if (spec.conserved.has_value() && !spec.conserved->empty()) {
    emit_poly(os, "poly I", *spec.conserved);
  }
  return os.str();
}

void write_model_file(const SystemSpec& spec, const std::string& path) {
  write_text_file(path, serialize_model(spec));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write file: " + path);
  out << text;
  require(static_cast<bool>(out), "write failed: " + path);
}

}  // namespace ssmx
