#include "biqm/presets.hpp"

#include "biqm/errors.hpp"

namespace biqm {

namespace {

TemplateSpec sine(double amplitude) {
    return {TemplateKind::sine, amplitude, 6.0, 0.0};
}

ReconstructionConfig base(const std::string& name) {
    ReconstructionConfig c;
    c.preset = name;
    c.lattice_size = 36;
    c.mass = 0.25;
    c.beta = 4.0;
    c.sample_count = 200;
    return c;
}

// Zero template, Laplacian smoothness, energy penalty.
ReconstructionConfig fig_p162() {
    ReconstructionConfig c = base("fig-p162");
    c.prior_kind = PriorKind::gaussian;
    c.covariance = CovarianceKind::laplacian;
    c.lambda = 0.2;
    c.first_template = {};
    c.mu = 1000.0;
    c.kappa_auto = true;
    c.initial = InitialGuess::zero;
    return c;
}

// Periodic template, no energy penalty, started at the template.
ReconstructionConfig fig_p19() {
    ReconstructionConfig c = fig_p162();
    c.preset = "fig-p19";
    c.first_template = sine(1.0);
    c.mu = 0.0;
    c.initial = InitialGuess::template_mean;
    return c;
}

ReconstructionConfig fig_p22() {
    ReconstructionConfig c = fig_p19();
    c.preset = "fig-p22";
    c.mu = 1000.0;
    c.initial = InitialGuess::chain;
    c.chain_preset = "fig-p19";
    return c;
}

ReconstructionConfig fig_p155() {
    ReconstructionConfig c = fig_p22();
    c.preset = "fig-p155";
    c.initial = InitialGuess::piecewise;
    c.chain_preset.clear();
    return c;
}

ReconstructionConfig fig_p31() {
    ReconstructionConfig c = fig_p162();
    c.preset = "fig-p31";
    c.covariance = CovarianceKind::periodic;
    c.gamma = 1.0;
    c.period = 6.0;
    return c;
}

ReconstructionConfig fig_p102() {
    ReconstructionConfig c = base("fig-p102");
    c.prior_kind = PriorKind::switch_fixed;
    c.first_template = sine(1.0);
    c.lambda1 = 0.2;
    c.lambda2 = 0.2;
    c.threshold = 0.15;
    c.nu_start = 1.0;
    c.nu_final = 1000.0;
    c.nu_stages = 10;
    c.mu = 0.0;
    c.initial = InitialGuess::piecewise;
    return c;
}

ReconstructionConfig fig_p75() {
    ReconstructionConfig c = base("fig-p75");
    c.prior_kind = PriorKind::switch_two;
    c.first_template = sine(2.0 / 3.0);
    c.second_template = {TemplateKind::signed_square_sine, 1.0, 6.0, 0.0};
    c.lambda1 = 10.0;
    c.lambda2 = 10.0;
    c.threshold = 0.0;
    c.nu_stages = 0;
    c.tau = 20.0;
    c.mu = 0.0;
    c.initial = InitialGuess::annealed;
    return c;
}

ReconstructionConfig fig_p120() {
    ReconstructionConfig c = fig_p75();
    c.preset = "fig-p120";
    c.prior_kind = PriorKind::hyperfield;
    c.lambda1 = 10.0;
    c.lambda2 = 1.0;
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"fig-p162", "fig-p19", "fig-p22", "fig-p155", "fig-p31", "fig-p102", "fig-p75", "fig-p120"};
}

ReconstructionConfig preset_config(const std::string& name) {
    if (name == "fig-p162") return fig_p162();
    if (name == "fig-p19") return fig_p19();
    if (name == "fig-p22") return fig_p22();
    if (name == "fig-p155") return fig_p155();
    if (name == "fig-p31") return fig_p31();
    if (name == "fig-p102") return fig_p102();
    if (name == "fig-p75") return fig_p75();
    if (name == "fig-p120") return fig_p120();
    throw Error(Errc::unknown_preset, "unknown preset '" + name + "'");
}

}  // namespace biqm
