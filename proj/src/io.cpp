#include "latticewave/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace latticewave {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("float formatting failed");
  return std::string(buf, end);
}

struct CsvWriter::Impl {
  std::ofstream out;
  bool first = true;
};

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary);
  if (!impl_->out) {
    delete impl_;
    throw std::runtime_error("cannot write " + path.string());
  }
  for (auto h : header) cell(h);
  end_row();
}

CsvWriter::~CsvWriter() { delete impl_; }

CsvWriter& CsvWriter::cell(std::string_view s) {
  if (!impl_->first) impl_->out << ',';
  impl_->out << s;
  impl_->first = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(std::string_view(format_double(x))); }

CsvWriter& CsvWriter::cell(long long x) { return cell(std::string_view(std::to_string(x))); }

void CsvWriter::end_row() {
  impl_->out << '\n';
  impl_->first = true;
}

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {
std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    table.rows.push_back(split(line));
  }
  return table;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace latticewave
