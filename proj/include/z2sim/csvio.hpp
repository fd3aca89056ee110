#ifndef Z2SIM_CSVIO_HPP
#define Z2SIM_CSVIO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "z2sim/common.hpp"

namespace z2sim {

// One sweep sample of one observable.  Fixed schema:
//   sweep,value,observable,obs_value,direction,T,M,engine
// Floats carry 17 significant digits so a reread is lossless.
struct CurveRecord {
    std::string sweep;
    double value = 0.0;
    std::string observable;
    double obs_value = 0.0;
    std::string direction;
    double total_time = 0.0;
    int steps = 0;
    std::string engine;
};

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_curve_csv(const std::string& path, const std::vector<CurveRecord>& records,
                            std::uint64_t config_hash) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    char hash_buf[24];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    f << "# config_hash=" << hash_buf << "\n";
    f << "sweep,value,observable,obs_value,direction,T,M,engine\n";
    for (const auto& r : records)
        f << r.sweep << ',' << format_g17(r.value) << ',' << r.observable << ','
          << format_g17(r.obs_value) << ',' << r.direction << ',' << format_g17(r.total_time)
          << ',' << r.steps << ',' << r.engine << "\n";
    if (!f) throw std::runtime_error("short write to " + path);
}

// Free-schema table with the same hash comment, for pair-level exports
// (coupling matrices, collision lists).
inline void write_table_csv(const std::string& path, const std::string& header,
                            const std::vector<std::string>& rows, std::uint64_t config_hash) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    char hash_buf[24];
    std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                  static_cast<unsigned long long>(config_hash));
    f << "# config_hash=" << hash_buf << "\n" << header << "\n";
    for (const auto& r : rows) f << r << "\n";
    if (!f) throw std::runtime_error("short write to " + path);
}

}  // namespace z2sim

#endif
