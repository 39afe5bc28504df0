#include "cloudgrade/ply_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cloudgrade {

namespace {

void append_double(std::string& buf, double v) {
  char tmp[32];
  auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, res.ptr);
}

double parse_double(const char*& s, const char* end, const std::filesystem::path& path) {
  while (s < end && (*s == ' ' || *s == '\t' || *s == '\r' || *s == '\n')) ++s;
  double v = 0.0;
  auto res = std::from_chars(s, end, v);
  if (res.ec != std::errc()) throw ParseError("bad numeric value in " + path.string());
  s = res.ptr;
  return v;
}

}  // namespace

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  cloud.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out << "ply\nformat ascii 1.0\n";
  out << "comment epoch=" << epoch_name(cloud.epoch) << "\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_building_ids()) out << "property int building_id\n";
  for (const auto& [name, col] : cloud.attributes) out << "property double " << name << "\n";
  out << "end_header\n";

  std::string buf;
  buf.reserve(1 << 20);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    append_double(buf, cloud.points[i].x());
    buf.push_back(' ');
    append_double(buf, cloud.points[i].y());
    buf.push_back(' ');
    append_double(buf, cloud.points[i].z());
    if (cloud.has_building_ids()) {
      buf.push_back(' ');
      buf.append(std::to_string(cloud.building_id[i]));
    }
    for (const auto& [name, col] : cloud.attributes) {
      buf.push_back(' ');
      append_double(buf, col[i]);
    }
    buf.push_back('\n');
    if (buf.size() > (1 << 20) - 512) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw ParseError(path.string() + ": not a PLY file");

  PointCloud cloud;
  std::size_t n_vertices = 0;
  bool saw_format = false;
  // Property order as declared; x/y/z must be present.
  struct Prop {
    std::string name;
    bool is_int = false;
  };
  std::vector<Prop> props;
  bool in_vertex_element = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "end_header") break;
    if (tok == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw ParseError(path.string() + ": only ascii PLY is supported");
      saw_format = true;
    } else if (tok == "comment") {
      std::string rest;
      ls >> rest;
      if (rest.rfind("epoch=", 0) == 0) cloud.epoch = epoch_from_name(rest.substr(6));
    } else if (tok == "element") {
      std::string name;
      ls >> name >> n_vertices;
      if (name != "vertex")
        throw ParseError(path.string() + ": unsupported element '" + name + "'");
      in_vertex_element = true;
    } else if (tok == "property") {
      if (!in_vertex_element) throw ParseError(path.string() + ": property before element");
      std::string type, name;
      ls >> type >> name;
      if (type == "list") throw ParseError(path.string() + ": list properties unsupported");
      const bool is_int = (type == "int" || type == "int32" || type == "uint" || type == "uint32");
      const bool is_float = (type == "double" || type == "float64" || type == "float" || type == "float32");
      if (!is_int && !is_float)
        throw ParseError(path.string() + ": unsupported property type '" + type + "'");
      props.push_back({name, is_int});
    }
  }
  if (!saw_format) throw ParseError(path.string() + ": missing format line");

  int ix = -1, iy = -1, iz = -1, iid = -1;
  for (std::size_t k = 0; k < props.size(); ++k) {
    if (props[k].name == "x") ix = static_cast<int>(k);
    else if (props[k].name == "y") iy = static_cast<int>(k);
    else if (props[k].name == "z") iz = static_cast<int>(k);
    else if (props[k].name == "building_id") iid = static_cast<int>(k);
    else cloud.attributes[props[k].name].reserve(n_vertices);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError(path.string() + ": missing x/y/z properties");

  cloud.points.reserve(n_vertices);
  if (iid >= 0) cloud.building_id.reserve(n_vertices);

  // Column pointers per property slot (null for x/y/z/building_id).
  std::vector<std::vector<double>*> col_of(props.size(), nullptr);
  for (std::size_t k = 0; k < props.size(); ++k) {
    if (static_cast<int>(k) == ix || static_cast<int>(k) == iy || static_cast<int>(k) == iz ||
        static_cast<int>(k) == iid)
      continue;
    col_of[k] = &cloud.attributes[props[k].name];
  }

  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const char* s = body.data();
  const char* end = s + body.size();
  std::vector<double> row(props.size());
  for (std::size_t i = 0; i < n_vertices; ++i) {
    for (std::size_t k = 0; k < props.size(); ++k) row[k] = parse_double(s, end, path);
    cloud.points.emplace_back(row[ix], row[iy], row[iz]);
    if (iid >= 0) cloud.building_id.push_back(static_cast<std::int32_t>(row[iid]));
    for (std::size_t k = 0; k < props.size(); ++k)
      if (col_of[k]) col_of[k]->push_back(row[k]);
  }
  // Trailing whitespace only.
  while (s < end && (*s == ' ' || *s == '\t' || *s == '\r' || *s == '\n')) ++s;
  if (cloud.points.size() != n_vertices)
    throw ParseError(path.string() + ": truncated vertex data");
  return cloud;
}

}  // namespace cloudgrade
