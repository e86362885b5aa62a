// Stand-in for an inpainting model: copies the source image to the output
// path unchanged. --fail exits 1 without output; --tiny writes a 1x1 image.
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cvf/image_io.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  std::vector<std::string> positional;
  bool fail = false, tiny = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--fail") {
      fail = true;
    } else if (a == "--tiny") {
      tiny = true;
    } else {
      positional.push_back(a);
    }
  }
  if (positional.size() != 3) {
    std::cerr << "usage: cvf-stub-inpaint [--fail|--tiny] IMAGE MASK OUT\n";
    return 2;
  }
  if (fail) return 1;
  try {
    const fs::path out = positional[2];
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    if (tiny) {
      cvf::Mask pixel(1, 1);
      cvf::write_mask_png(out, pixel);
    } else {
      fs::copy_file(positional[0], out, fs::copy_options::overwrite_existing);
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
