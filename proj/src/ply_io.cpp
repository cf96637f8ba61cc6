#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "rbfim/pc_model.hpp"

namespace rbfim {

namespace {

enum class scalar_kind { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

bool parse_scalar_kind(const std::string& name, scalar_kind& out) {
  static const std::pair<const char*, scalar_kind> table[] = {
      {"char", scalar_kind::int8},      {"int8", scalar_kind::int8},       {"uchar", scalar_kind::uint8},
      {"uint8", scalar_kind::uint8},    {"short", scalar_kind::int16},     {"int16", scalar_kind::int16},
      {"ushort", scalar_kind::uint16},  {"uint16", scalar_kind::uint16},   {"int", scalar_kind::int32},
      {"int32", scalar_kind::int32},    {"uint", scalar_kind::uint32},     {"uint32", scalar_kind::uint32},
      {"float", scalar_kind::float32},  {"float32", scalar_kind::float32}, {"double", scalar_kind::float64},
      {"float64", scalar_kind::float64}};
  for (const auto& [key, kind] : table) {
    if (name == key) {
      out = kind;
      return true;
    }
  }
  return false;
}

std::size_t byte_size(scalar_kind k) {
  switch (k) {
    case scalar_kind::int8:
    case scalar_kind::uint8:
      return 1;
    case scalar_kind::int16:
    case scalar_kind::uint16:
      return 2;
    case scalar_kind::int32:
    case scalar_kind::uint32:
    case scalar_kind::float32:
      return 4;
    case scalar_kind::float64:
      return 8;
  }
  return 0;
}

bool is_float(scalar_kind k) { return k == scalar_kind::float32 || k == scalar_kind::float64; }

struct ply_property {
  std::string name;
  scalar_kind type = scalar_kind::float32;
  bool is_list = false;
  scalar_kind count_type = scalar_kind::uint8;
};

struct ply_element {
  std::string name;
  index_t count = 0;
  std::vector<ply_property> properties;
};

template <class T>
T load_le(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  return v;
}

double decode(scalar_kind k, const unsigned char* p) {
  switch (k) {
    case scalar_kind::int8:
      return load_le<std::int8_t>(p);
    case scalar_kind::uint8:
      return load_le<std::uint8_t>(p);
    case scalar_kind::int16:
      return load_le<std::int16_t>(p);
    case scalar_kind::uint16:
      return load_le<std::uint16_t>(p);
    case scalar_kind::int32:
      return load_le<std::int32_t>(p);
    case scalar_kind::uint32:
      return load_le<std::uint32_t>(p);
    case scalar_kind::float32:
      return load_le<float>(p);
    case scalar_kind::float64:
      return load_le<double>(p);
  }
  return 0.0;
}

class ply_reader {
 public:
  explicit ply_reader(std::filesystem::path path) : path_(std::move(path)) {}

  point_cloud read() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
      throw input_error(path_.string() + ": cannot open file");
    }
    parse_header(in);
    locate_vertex_layout();
    return binary_ ? read_binary(in) : read_ascii(in);
  }

 private:
  [[noreturn]] void fail_header(const std::string& msg) const {
    throw input_error(path_.string() + ": header line " + std::to_string(line_no_) + ": " + msg);
  }
  [[noreturn]] void fail_body(const std::string& msg) const {
    throw input_error(path_.string() + ": " + msg);
  }

  void parse_header(std::istream& in) {
    std::string line;
    bool have_format = false;
    while (std::getline(in, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      std::istringstream ls(line);
      std::string keyword;
      ls >> keyword;
      if (line_no_ == 1) {
        if (keyword != "ply") {
          fail_header("missing 'ply' magic");
        }
        continue;
      }
      if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
        continue;
      }
      if (keyword == "format") {
        std::string fmt, version;
        ls >> fmt >> version;
        if (fmt == "ascii") {
          binary_ = false;
        } else if (fmt == "binary_little_endian") {
          binary_ = true;
        } else if (fmt == "binary_big_endian") {
          fail_header("unsupported format binary_big_endian");
        } else {
          fail_header("unknown format '" + fmt + "'");
        }
        if (version != "1.0") {
          fail_header("unsupported format version '" + version + "'");
        }
        have_format = true;
      } else if (keyword == "element") {
        ply_element e;
        long long count = -1;
        ls >> e.name >> count;
        if (e.name.empty() || !ls || count < 0) {
          fail_header("malformed element declaration");
        }
        e.count = count;
        elements_.push_back(std::move(e));
      } else if (keyword == "property") {
        if (elements_.empty()) {
          fail_header("property declared before any element");
        }
        ply_property p;
        std::string type;
        ls >> type;
        if (type == "list") {
          std::string count_type, item_type;
          ls >> count_type >> item_type >> p.name;
          p.is_list = true;
          if (!parse_scalar_kind(count_type, p.count_type) || !parse_scalar_kind(item_type, p.type)) {
            fail_header("unknown list property type");
          }
        } else {
          ls >> p.name;
          if (!parse_scalar_kind(type, p.type)) {
            fail_header("unknown property type '" + type + "'");
          }
        }
        if (p.name.empty()) {
          fail_header("property without a name");
        }
        elements_.back().properties.push_back(std::move(p));
      } else if (keyword == "end_header") {
        if (!have_format) {
          fail_header("missing format line");
        }
        return;
      } else {
        fail_header("unexpected keyword '" + keyword + "'");
      }
    }
    fail_header("end of file before end_header");
  }

  void locate_vertex_layout() {
    vertex_element_ = elements_.size();
    for (std::size_t e = 0; e < elements_.size(); ++e) {
      if (elements_[e].name == "vertex") {
        vertex_element_ = e;
        break;
      }
    }
    if (vertex_element_ == elements_.size()) {
      fail_header("no vertex element");
    }
    const ply_element& v = elements_[vertex_element_];
    if (v.count == 0) {
      fail_header("vertex element declares zero vertices");
    }
    const char* names[6] = {"x", "y", "z", "red", "green", "blue"};
    for (int slot = 0; slot < 6; ++slot) {
      for (std::size_t i = 0; i < v.properties.size(); ++i) {
        if (v.properties[i].name == names[slot]) {
          if (v.properties[i].is_list) {
            fail_header(std::string("property '") + names[slot] + "' must not be a list");
          }
          slots_[slot] = static_cast<int>(i);
        }
      }
    }
    for (int slot = 0; slot < 3; ++slot) {
      if (slots_[slot] < 0) {
        fail_header(std::string("vertex element lacks property '") + names[slot] + "'");
      }
    }
    int color_count = (slots_[3] >= 0) + (slots_[4] >= 0) + (slots_[5] >= 0);
    has_colors_ = color_count == 3;
    if (has_colors_) {
      for (int slot = 3; slot < 6; ++slot) {
        if (is_float(v.properties[slots_[slot]].type)) {
          fail_header(std::string("color property '") + names[slot] + "' must be an integer type");
        }
      }
    }
  }

  point_cloud make_cloud() const {
    point_cloud cloud;
    index_t n = elements_[vertex_element_].count;
    cloud.positions.resize(n);
    if (has_colors_) {
      cloud.colors.emplace(n);
    }
    return cloud;
  }

  void store(point_cloud& cloud, index_t row, const double* values) const {
    cloud.positions[row] = point3d(values[slots_[0]], values[slots_[1]], values[slots_[2]]);
    if (has_colors_) {
      auto& c = (*cloud.colors)[row];
      for (int ch = 0; ch < 3; ++ch) {
        double v = std::clamp(values[slots_[3 + ch]], 0.0, 255.0);
        c[ch] = static_cast<std::uint8_t>(v);
      }
    }
  }

  point_cloud read_ascii(std::istream& in) {
    point_cloud cloud = make_cloud();
    auto read_number = [&](const std::string& what) {
      double v;
      if (!(in >> v)) {
        fail_body("truncated or malformed body while reading " + what);
      }
      return v;
    };
    for (std::size_t e = 0; e <= vertex_element_; ++e) {
      const ply_element& el = elements_[e];
      std::vector<double> values(el.properties.size());
      for (index_t row = 0; row < el.count; ++row) {
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
          const ply_property& prop = el.properties[p];
          if (prop.is_list) {
            auto count = static_cast<long long>(read_number(el.name + " list count"));
            for (long long i = 0; i < count; ++i) {
              read_number(el.name + " list item");
            }
            values[p] = 0.0;
          } else {
            values[p] = read_number(el.name + " " + std::to_string(row));
          }
        }
        if (e == vertex_element_) {
          store(cloud, row, values.data());
        }
      }
    }
    return cloud;
  }

  point_cloud read_binary(std::istream& in) {
    std::vector<unsigned char> body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    auto need = [&](std::size_t bytes, const std::string& what) {
      if (pos + bytes > body.size()) {
        fail_body("truncated body while reading " + what);
      }
    };

    point_cloud cloud = make_cloud();
    for (std::size_t e = 0; e <= vertex_element_; ++e) {
      const ply_element& el = elements_[e];
      std::vector<double> values(el.properties.size());
      for (index_t row = 0; row < el.count; ++row) {
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
          const ply_property& prop = el.properties[p];
          if (prop.is_list) {
            need(byte_size(prop.count_type), el.name + " list count");
            auto count = static_cast<std::size_t>(decode(prop.count_type, body.data() + pos));
            pos += byte_size(prop.count_type);
            need(count * byte_size(prop.type), el.name + " list items");
            pos += count * byte_size(prop.type);
            values[p] = 0.0;
          } else {
            need(byte_size(prop.type), el.name + " " + std::to_string(row));
            values[p] = decode(prop.type, body.data() + pos);
            pos += byte_size(prop.type);
          }
        }
        if (e == vertex_element_) {
          store(cloud, row, values.data());
        }
      }
    }
    return cloud;
  }

  std::filesystem::path path_;
  int line_no_ = 0;
  bool binary_ = false;
  std::vector<ply_element> elements_;
  std::size_t vertex_element_ = static_cast<std::size_t>(-1);
  int slots_[6] = {-1, -1, -1, -1, -1, -1};
  bool has_colors_ = false;
};

template <class T>
void put_le(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto* b = reinterpret_cast<unsigned char*>(&v);
    std::reverse(b, b + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

point_cloud load_ply(const std::filesystem::path& path) {
  ply_reader reader(path);
  return reader.read();
}

void write_ply(const std::filesystem::path& path, const point_cloud& cloud, ply_format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw input_error(path.string() + ": cannot open for writing");
  }
  bool binary = format == ply_format::binary_little_endian;
  out << "ply\n"
      << "format " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors()) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";

  if (binary) {
    for (index_t i = 0; i < cloud.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        put_le<double>(out, cloud.positions[i](a));
      }
      if (cloud.has_colors()) {
        for (std::uint8_t ch : (*cloud.colors)[i]) {
          put_le<std::uint8_t>(out, ch);
        }
      }
    }
  } else {
    out.precision(17);
    for (index_t i = 0; i < cloud.size(); ++i) {
      const point3d& p = cloud.positions[i];
      out << p(0) << ' ' << p(1) << ' ' << p(2);
      if (cloud.has_colors()) {
        const rgb8& c = (*cloud.colors)[i];
        out << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]);
      }
      out << '\n';
    }
  }
  if (!out) {
    throw input_error(path.string() + ": write failed");
  }
}

}  // namespace rbfim
