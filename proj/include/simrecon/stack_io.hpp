#pragma once
#include <string>

#include "simrecon/patterns.hpp"

namespace simrecon {

// On-disk container for images, stacks and kernels.  Little-endian layout:
//   "SIMS"            4-byte magic
//   version    u16    currently 1
//   kind       u16    0 = image, 1 = stack, 2 = kernel
//   count      u32    member count (1 unless kind = stack)
//   width      u32
//   height     u32
//   pitch      f64    um per pixel
//   shifts     2*f64 per member, only when kind = stack
//   payload    f32 per pixel, row-major, members contiguous
enum class FileKind : std::uint16_t { image = 0, stack = 1, kernel = 2 };

struct StackFileData {
    FileKind kind = FileKind::image;
    Stack stack; // single member for image/kernel kinds
};

// Writes atomically: a temp file in the destination directory is renamed over
// the target once fully flushed.
void write_stack_file(const std::string& path, const Stack& stack, FileKind kind);
void write_image_file(const std::string& path, const Image& img,
                      FileKind kind = FileKind::image);

StackFileData read_stack_file(const std::string& path);
// Convenience for single-image files; errors when the file holds a stack.
Image read_image_file(const std::string& path);

// 16-bit grayscale PGM with min..max stretched over the full range.
void write_pgm(const std::string& path, const Image& img);

} // namespace simrecon
