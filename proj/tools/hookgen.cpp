// Build step: embeds the emulator asset and its single-hook-disabled variants.
#include <fstream>
#include <iostream>
#include <sstream>

#include "gl/selfemu.hpp"

namespace {

void emit(std::ostream& out, const std::string& text) {
  const std::string delim = "GLSRC";
  if (text.find(")" + delim + "\"") != std::string::npos) throw std::runtime_error("delimiter clash");
  out << "R\"" << delim << "(" << text << ")" << delim << "\"";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: gl_hookgen <selfemu.gl> <out.cpp>\n";
    return 2;
  }
  std::ifstream in(argv[1], std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << argv[1] << "\n";
    return 1;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  std::string raw = buf.str();
  try {
    std::ostringstream out;
    out << "// Generated by gl_hookgen. Do not edit.\n#include <cstddef>\n\nnamespace gl::assets {\n\n";
    out << "extern const char* const kSelfemuRaw;\nconst char* const kSelfemuRaw = ";
    gl::strip_hooks(raw, {});  // validates the markers
    emit(out, raw);
    out << ";\n\nstruct Variant {\n  const char* hook;\n  const char* source;\n};\n\n";
    out << "extern const Variant kSelfemuVariants[];\nextern const std::size_t kSelfemuVariantCount;\n";
    out << "const Variant kSelfemuVariants[] = {\n";
    for (const auto& h : gl::hook_names()) {
      out << "    {\"" << h << "\", ";
      emit(out, gl::strip_hooks(raw, {h}));
      out << "},\n";
    }
    out << "};\nconst std::size_t kSelfemuVariantCount = " << gl::hook_names().size() << ";\n\n}\n";
    std::ofstream o(argv[2], std::ios::binary);
    o << out.str();
    if (!o) {
      std::cerr << "cannot write " << argv[2] << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << argv[1] << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
