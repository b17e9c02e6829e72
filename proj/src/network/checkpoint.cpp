#include <sstream>

#include "common/text.hpp"
#include "pireg/network.hpp"

namespace pireg {

namespace {

constexpr std::string_view kMagic = "PIREG-CHECKPOINT";
constexpr int kVersion = 1;

std::string join_row_major(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!out.empty()) out += ',';
      out += detail::format_double(m(i, j));
    }
  return out;
}

Matrix parse_row_major(const std::string& text, int rows, int cols, const std::string& what) {
  const auto parts = detail::split(text, ',');
  if (static_cast<long>(parts.size()) != static_cast<long>(rows) * cols)
    fail(Errc::format_error, what + ": expected " + std::to_string(rows * cols) + " values, found " +
                                 std::to_string(parts.size()));
  Matrix m(rows, cols);
  std::size_t idx = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = detail::parse_double(parts[idx++]);
  return m;
}

}  // namespace

void save_checkpoint(const MlpParams& params, const std::string& path) {
  params.validate();
  std::ostringstream out;
  out << kMagic << " v" << kVersion << '\n';
  out << "activation = " << activation_name(params.activation) << '\n';
  out << "layers = ";
  for (std::size_t i = 0; i < params.layer_sizes.size(); ++i)
    out << (i ? "," : "") << params.layer_sizes[i];
  out << '\n';
  for (std::size_t l = 0; l < params.layers(); ++l) {
    out << 'W' << l << " = " << join_row_major(params.weights[l]) << '\n';
    out << 'b' << l << " = " << join_row_major(params.biases[l]) << '\n';
  }
  detail::write_file_atomic(path, out.str());
}

MlpParams load_checkpoint(const std::string& path) {
  std::istringstream in(detail::read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    fail(Errc::format_error, "'" + path + "' is not a checkpoint file");
  const std::string version(detail::trim(std::string_view(line).substr(kMagic.size())));
  if (version != "v" + std::to_string(kVersion))
    fail(Errc::version_mismatch, "checkpoint version '" + version + "' is not supported");

  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::format_error, "malformed checkpoint line");
    fields[std::string(detail::trim(std::string_view(line).substr(0, eq)))] =
        std::string(detail::trim(std::string_view(line).substr(eq + 1)));
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) fail(Errc::format_error, "checkpoint is missing '" + key + "'");
    return it->second;
  };

  MlpParams p;
  p.activation = parse_activation(field("activation"));
  for (const auto& s : detail::split(field("layers"), ','))
    p.layer_sizes.push_back(static_cast<int>(detail::parse_int(s)));
  if (p.layer_sizes.size() < 2) fail(Errc::format_error, "checkpoint has fewer than two layers");
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    const std::string wl = "W" + std::to_string(l);
    const std::string bl = "b" + std::to_string(l);
    p.weights.push_back(parse_row_major(field(wl), p.layer_sizes[l], p.layer_sizes[l + 1], wl));
    p.biases.push_back(parse_row_major(field(bl), 1, p.layer_sizes[l + 1], bl));
  }
  p.validate();
  return p;
}

}  // namespace pireg
