// Overwrite one float of a binary track file: corrupt_file <path> <index> <value>
#include <cstdlib>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: corrupt_file <path> <index> <value>\n";
        return 1;
    }
    std::fstream f(argv[1], std::ios::in | std::ios::out | std::ios::binary);
    if (!f) return 1;
    const float v = std::strtof(argv[3], nullptr);
    f.seekp(static_cast<std::streamoff>(std::strtoll(argv[2], nullptr, 10)) * static_cast<std::streamoff>(sizeof v));
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
    return f ? 0 : 1;
}
