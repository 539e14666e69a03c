#include "hcfsim/fiber_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hcfsim/errors.hpp"
#include "hcfsim/units.hpp"

namespace hcfsim {

FiberProfile::FiberProfile(double length_km,
                           std::vector<std::pair<double, double>> attenuation_curve,
                           std::map<std::string, RbCoefficient> rb_coefficients,
                           std::vector<GasLine> gas_lines)
    : length_km_(length_km),
      attenuation_curve_(std::move(attenuation_curve)),
      rb_(std::move(rb_coefficients)),
      gas_lines_(std::move(gas_lines)) {
    if (length_km_ < 0.0)
        throw Error(ErrorKind::InvalidArgument, "span length must be non-negative");
    if (attenuation_curve_.size() < 2)
        throw Error(ErrorKind::InvalidArgument, "attenuation curve needs >= 2 samples");
    for (std::size_t i = 0; i < attenuation_curve_.size(); ++i) {
        const auto& [wl, a] = attenuation_curve_[i];
        if (a <= 0.0 || a >= 1.0)
            throw Error(ErrorKind::InvalidArgument,
                        "attenuation " + std::to_string(a) + " dB/km outside (0, 1)");
        if (i > 0 && wl <= attenuation_curve_[i - 1].first)
            throw Error(ErrorKind::InvalidArgument,
                        "attenuation samples must be strictly increasing in wavelength");
    }
    for (const auto& line : gas_lines_) {
        if (line.fwhm_hz <= 0.0 || line.peak_loss_db < 0.0)
            throw Error(ErrorKind::InvalidArgument, "gas line needs fwhm > 0 and peak_loss >= 0");
    }
    for (const auto& [band, rb] : rb_) {
        if (rb.hcf_db_per_km > rb.smf_db_per_km - 20.0)
            throw Error(ErrorKind::InvalidArgument,
                        "band " + band + ": HCF backscatter must sit >= 20 dB below the SMF reference");
    }
}

double FiberProfile::attenuation_at(double wavelength_nm) const {
    const double lo = attenuation_curve_.front().first;
    const double hi = attenuation_curve_.back().first;
    if (wavelength_nm < lo || wavelength_nm > hi)
        throw Error(ErrorKind::OutOfRange,
                    "wavelength " + std::to_string(wavelength_nm) + " nm outside sampled range [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    auto it = std::lower_bound(attenuation_curve_.begin(), attenuation_curve_.end(),
                               wavelength_nm,
                               [](const auto& s, double w) { return s.first < w; });
    if (it == attenuation_curve_.begin()) return it->second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    if (x1 == wavelength_nm) return y1;
    const double t = (wavelength_nm - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

double FiberProfile::link_loss_db(double wavelength_nm) const {
    double loss = attenuation_at(wavelength_nm) * length_km_;
    loss += gas_loss_db_at(gas_lines_, frequency_hz_from_nm(wavelength_nm));
    return loss;
}

double FiberProfile::rb_db_per_km(const std::string& band, RbColumn column) const {
    auto it = rb_.find(band);
    if (it == rb_.end())
        throw Error(ErrorKind::NotFound, "no backscatter coefficient for band " + band);
    return column == RbColumn::Hcf ? it->second.hcf_db_per_km : it->second.smf_db_per_km;
}

double effective_backscatter_length_km(double alpha_db_per_km, double length_km) {
    if (alpha_db_per_km < 0.0 || length_km < 0.0)
        throw Error(ErrorKind::InvalidArgument, "alpha and length must be non-negative");
    if (alpha_db_per_km == 0.0) return length_km;
    const double a = db_per_km_to_nat(alpha_db_per_km);
    return -std::expm1(-2.0 * a * length_km) / (2.0 * a);
}

double rb_interference_power_dbm(double counter_launch_dbm, double rb_coefficient_db_per_km,
                                 double alpha_db_per_km, double length_km) {
    const double leff = effective_backscatter_length_km(alpha_db_per_km, length_km);
    if (leff == 0.0) return -kInfDb;
    return counter_launch_dbm + rb_coefficient_db_per_km + lin_to_db(leff);
}

double gas_loss_db_at(std::span<const GasLine> lines, double frequency_hz) {
    double loss = 0.0;
    for (const auto& line : lines) {
        const double x = 2.0 * (frequency_hz - line.center_frequency_hz) / line.fwhm_hz;
        loss += line.peak_loss_db / (1.0 + x * x);
    }
    return loss;
}

std::vector<double> gas_absorption_response_db(std::span<const GasLine> lines,
                                               double channel_center_hz, double bandwidth_hz,
                                               int n_points) {
    if (n_points < 2)
        throw Error(ErrorKind::InvalidArgument, "n_points must be >= 2");
    std::vector<double> response(static_cast<std::size_t>(n_points), 0.0);
    const double f0 = channel_center_hz - bandwidth_hz / 2.0;
    const double df = bandwidth_hz / (n_points - 1);
    for (int i = 0; i < n_points; ++i)
        response[static_cast<std::size_t>(i)] = gas_loss_db_at(lines, f0 + i * df);
    return response;
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::size_t min_columns) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            field.erase(0, field.find_first_not_of(" \t"));
            field.erase(field.find_last_not_of(" \t") + 1);
            fields.push_back(field);
        }
        if (first) { // skip a header row if the first field is not numeric
            first = false;
            char* end = nullptr;
            std::strtod(fields[0].c_str(), &end);
            if (end == fields[0].c_str()) continue;
        }
        if (fields.size() < min_columns)
            throw Error(ErrorKind::IoError,
                        path.string() + ": expected >= " + std::to_string(min_columns) +
                            " columns, got " + std::to_string(fields.size()));
        rows.push_back(std::move(fields));
    }
    return rows;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::IoError, path.string() + ": bad numeric field '" + s + "'");
    }
}

} // namespace

std::vector<std::pair<double, double>> load_attenuation_csv(const std::filesystem::path& path) {
    std::vector<std::pair<double, double>> curve;
    for (const auto& row : read_csv(path, 2))
        curve.emplace_back(to_double(row[0], path), to_double(row[1], path));
    return curve;
}

std::map<std::string, RbCoefficient> load_rb_csv(const std::filesystem::path& path) {
    std::map<std::string, RbCoefficient> rb;
    for (const auto& row : read_csv(path, 3))
        rb[row[0]] = RbCoefficient{to_double(row[1], path), to_double(row[2], path)};
    return rb;
}

std::vector<GasLine> load_gas_lines_csv(const std::filesystem::path& path) {
    std::vector<GasLine> lines;
    for (const auto& row : read_csv(path, 3))
        lines.push_back(GasLine{to_double(row[0], path), to_double(row[1], path),
                                to_double(row[2], path)});
    return lines;
}

} // namespace hcfsim
