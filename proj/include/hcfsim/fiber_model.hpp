#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hcfsim {

/// Narrow absorption feature (CO2, H2O) inside the hollow core, modeled as a
/// Lorentzian notch. peak_loss is the total extra loss over the span at the
/// line center.
struct GasLine {
    double center_frequency_hz = 0.0;
    double fwhm_hz = 0.0;
    double peak_loss_db = 0.0;
};

struct RbCoefficient {
    double hcf_db_per_km = 0.0;
    double smf_db_per_km = 0.0;
};

enum class RbColumn { Hcf, Smf };

class FiberProfile {
public:
    FiberProfile() = default;
    FiberProfile(double length_km,
                 std::vector<std::pair<double, double>> attenuation_curve, // (nm, dB/km)
                 std::map<std::string, RbCoefficient> rb_coefficients,
                 std::vector<GasLine> gas_lines = {});

    double length_km() const { return length_km_; }
    const std::vector<std::pair<double, double>>& attenuation_curve() const {
        return attenuation_curve_;
    }
    const std::map<std::string, RbCoefficient>& rb_coefficients() const { return rb_; }
    const std::vector<GasLine>& gas_lines() const { return gas_lines_; }

    /// Piecewise-linear attenuation at a wavelength inside the sampled range.
    double attenuation_at(double wavelength_nm) const;

    /// Single-pass fibre loss: attenuation x length plus gas-line loss at
    /// this wavelength. Lumped coupler/circulator losses are not included
    /// here; the link budget adds them as a scenario scalar.
    double link_loss_db(double wavelength_nm) const;

    double rb_db_per_km(const std::string& band, RbColumn column) const;

private:
    double length_km_ = 0.0;
    std::vector<std::pair<double, double>> attenuation_curve_;
    std::map<std::string, RbCoefficient> rb_;
    std::vector<GasLine> gas_lines_;
};

/// Integrated backscatter kernel: int_0^L exp(-2 a z) dz with a in natural
/// units. Equals L at zero loss and decreases monotonically with alpha.
double effective_backscatter_length_km(double alpha_db_per_km, double length_km);

/// In-band crosstalk power co-propagating with the received signal, from the
/// counter-direction launch backscattered over the span.
double rb_interference_power_dbm(double counter_launch_dbm, double rb_coefficient_db_per_km,
                                 double alpha_db_per_km, double length_km);

/// Summed Lorentzian loss of all lines at one frequency, in dB.
double gas_loss_db_at(std::span<const GasLine> lines, double frequency_hz);

/// Magnitude response (loss in dB per bin) sampled uniformly over
/// [center - bw/2, center + bw/2].
std::vector<double> gas_absorption_response_db(std::span<const GasLine> lines,
                                               double channel_center_hz, double bandwidth_hz,
                                               int n_points);

std::vector<std::pair<double, double>> load_attenuation_csv(const std::filesystem::path& path);
std::map<std::string, RbCoefficient> load_rb_csv(const std::filesystem::path& path);
std::vector<GasLine> load_gas_lines_csv(const std::filesystem::path& path);

} // namespace hcfsim
