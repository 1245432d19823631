#include "ofsmpc/set_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "ofsmpc/errors.hpp"

namespace ofsmpc {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_row(std::ostream& os, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) os << (j ? " " : "") << num(row(j));
}

// "key=value" -> value
long parse_attr(const std::string& token, const std::string& key) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0) throw ConfigError("set block: expected '" + prefix + "...'");
  try {
    return std::stol(token.substr(prefix.size()));
  } catch (const std::exception&) {
    throw ConfigError("set block: bad value in '" + token + "'");
  }
}

std::vector<double> parse_numbers(std::istringstream& ss, long expected) {
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("set block: not a number '" + tok + "'");
    }
  }
  if (static_cast<long>(out.size()) != expected) {
    throw ConfigError("set block: expected " + std::to_string(expected) + " numbers");
  }
  return out;
}

bool next_content_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

// Splits "<lhs> : <rhs>" into its two halves.
std::pair<std::string, std::string> split_colon(const std::string& line) {
  const auto pos = line.find(':');
  if (pos == std::string::npos) throw ConfigError("set block: missing ':' in '" + line + "'");
  return {line.substr(0, pos), line.substr(pos + 1)};
}

}  // namespace

void write_hpolytope(std::ostream& os, const std::string& name, const HPolytope& p) {
  os << "hpolytope " << name << " rows=" << p.rows() << " dim=" << p.dim() << "\n";
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    os << num(p.h(i)) << " : ";
    write_row(os, p.H.row(i));
    os << "\n";
  }
  os << "end\n";
}

void write_zonotope(std::ostream& os, const std::string& name, const Zonotope& z) {
  os << "zonotope " << name << " generators=" << z.order() << " dim=" << z.dim() << "\n";
  os << "center : ";
  write_row(os, z.center.transpose());
  os << "\n";
  for (Eigen::Index j = 0; j < z.order(); ++j) {
    os << "generator : ";
    write_row(os, z.generators.col(j).transpose());
    os << "\n";
  }
  os << "end\n";
}

void write_matrix(std::ostream& os, const std::string& name, const Mat& m) {
  os << "matrix " << name << " rows=" << m.rows() << " cols=" << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    write_row(os, m.row(i));
    os << "\n";
  }
  os << "end\n";
}

std::map<std::string, SetBlock> read_set_blocks(std::istream& is) {
  std::map<std::string, SetBlock> out;
  std::string line;
  while (next_content_line(is, line)) {
    std::istringstream header(line);
    std::string kind, name, a1, a2;
    header >> kind >> name >> a1 >> a2;
    if (name.empty()) throw ConfigError("set block: missing name in '" + line + "'");
    if (out.count(name)) throw ConfigError("set block: duplicate name '" + name + "'");

    if (kind == "hpolytope") {
      const long rows = parse_attr(a1, "rows");
      const long dim = parse_attr(a2, "dim");
      HPolytope p{Mat(rows, dim), Vec(rows)};
      for (long i = 0; i < rows; ++i) {
        if (!next_content_line(is, line)) throw ConfigError("set block: truncated '" + name + "'");
        auto [lhs, rhs] = split_colon(line);
        std::istringstream ls(lhs), rs(rhs);
        p.h(i) = parse_numbers(ls, 1)[0];
        const auto row = parse_numbers(rs, dim);
        for (long j = 0; j < dim; ++j) p.H(i, j) = row[static_cast<std::size_t>(j)];
      }
      out.emplace(name, std::move(p));
    } else if (kind == "zonotope") {
      const long gens = parse_attr(a1, "generators");
      const long dim = parse_attr(a2, "dim");
      Zonotope z{Vec(dim), Mat(dim, gens)};
      for (long j = -1; j < gens; ++j) {
        if (!next_content_line(is, line)) throw ConfigError("set block: truncated '" + name + "'");
        auto [lhs, rhs] = split_colon(line);
        std::istringstream tag(lhs), rs(rhs);
        std::string word;
        tag >> word;
        const auto values = parse_numbers(rs, dim);
        if (j < 0) {
          if (word != "center") throw ConfigError("set block: expected 'center'");
          for (long i = 0; i < dim; ++i) z.center(i) = values[static_cast<std::size_t>(i)];
        } else {
          if (word != "generator") throw ConfigError("set block: expected 'generator'");
          for (long i = 0; i < dim; ++i) z.generators(i, j) = values[static_cast<std::size_t>(i)];
        }
      }
      out.emplace(name, std::move(z));
    } else if (kind == "matrix") {
      const long rows = parse_attr(a1, "rows");
      const long cols = parse_attr(a2, "cols");
      Mat m(rows, cols);
      for (long i = 0; i < rows; ++i) {
        if (!next_content_line(is, line)) throw ConfigError("set block: truncated '" + name + "'");
        std::istringstream ls(line);
        const auto row = parse_numbers(ls, cols);
        for (long j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
      }
      out.emplace(name, std::move(m));
    } else {
      throw ConfigError("set block: unknown kind '" + kind + "'");
    }
    if (!next_content_line(is, line) || line.find("end") == std::string::npos) {
      throw ConfigError("set block: missing 'end' after '" + name + "'");
    }
  }
  return out;
}

}  // namespace ofsmpc
