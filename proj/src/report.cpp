#include "spdelab/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace spdelab::cli {

std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string rates_csv(std::span<const lab::LevelResult> levels) {
    std::string out = "h,error,stderr\n";
    for (const auto& l : levels) {
        out += format_g12(l.h);
        out += ',';
        out += format_g12(l.error);
        out += ',';
        out += format_g12(l.stderr_);
        out += '\n';
    }
    return out;
}

std::filesystem::path make_run_dir(const std::filesystem::path& out_root,
                                   const std::string& suite) {
    const auto base = out_root / suite;
    std::filesystem::create_directories(base);
    for (int i = 0; i < 100000; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "run_%04d", i);
        const auto dir = base / name;
        if (!std::filesystem::exists(dir)) {
            std::filesystem::create_directory(dir);
            return dir;
        }
    }
    throw std::runtime_error("make_run_dir: run index space exhausted");
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace spdelab::cli
