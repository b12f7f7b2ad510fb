#include "spdelab/integrator.hpp"

#include <cmath>
#include <stdexcept>

namespace spdelab::sde {

using spectral::eigenvalue;
using spectral::SpectralVector;

std::string drift_name(DriftKind k) {
    switch (k) {
        case DriftKind::zero: return "zero";
        case DriftKind::sine: return "sin";
        case DriftKind::ratio: return "ratio";
        case DriftKind::linear: return "linear";
    }
    return "?";
}

std::string diffusion_name(DiffusionKind k) {
    switch (k) {
        case DiffusionKind::zero: return "zero";
        case DiffusionKind::additive: return "additive";
        case DiffusionKind::mult_sine: return "mult_sin";
        case DiffusionKind::mult_inv_sqrt: return "mult_invsqrt";
    }
    return "?";
}

SpectralVector InitialValue::spectral_coeffs(int modes) const {
    SpectralVector v = SpectralVector::zero(modes);
    switch (kind) {
        case Kind::zero: break;
        case Kind::mode:
            if (mode >= 1 && mode <= modes) v.coef_ref(mode) = amplitude;
            break;
        case Kind::parabola:
            // a x(1-x): <x(1-x), sqrt(2) sin(i pi x)> = 4 sqrt(2)/(i pi)^3, odd i
            for (int i = 1; i <= modes; i += 2)
                v.coef_ref(i) = amplitude * 4.0 * std::sqrt(2.0) / std::pow(i * spectral::kPi, 3);
            break;
    }
    return v;
}

std::string InitialValue::describe() const {
    char buf[64];
    switch (kind) {
        case Kind::zero: return "zero";
        case Kind::mode:
            std::snprintf(buf, sizeof buf, "mode:%d,%.6g", mode, amplitude);
            return buf;
        case Kind::parabola:
            std::snprintf(buf, sizeof buf, "parabola:%.6g", amplitude);
            return buf;
    }
    return "?";
}

SpectralEvolver::SpectralEvolver(const ModelSpec& model, int modes, double dt)
    : model_(&model), m_(modes), dt_(dt), grid_(4 * modes - 1) {
    if (modes < 1) throw std::invalid_argument("SpectralEvolver: modes must be >= 1");
    if (dt <= 0.0) throw std::invalid_argument("SpectralEvolver: dt must be > 0");
    decay_.resize(m_);
    for (int i = 1; i <= m_; ++i) decay_(i - 1) = std::exp(-eigenvalue(i) * dt_);
    u_vals_.resize(grid_.size());
    w_vals_.resize(grid_.size());
    rhs_vals_.resize(grid_.size());
    rhs_coords_.resize(m_);
}

Eigen::VectorXd SpectralEvolver::initial_state() const {
    const auto c = model_->x0.spectral_coeffs(m_);
    return Eigen::Map<const Eigen::VectorXd>(c.data().data(), m_);
}

Eigen::VectorXd SpectralEvolver::nemytskii_drift(const Eigen::VectorXd& state) {
    Eigen::VectorXd out(m_);
    if (model_->drift == DriftKind::zero) {
        out.setZero();
        return out;
    }
    grid_.synthesize({state.data(), static_cast<std::size_t>(m_)}, u_vals_);
    for (std::size_t k = 0; k < u_vals_.size(); ++k)
        rhs_vals_[k] = drift_value(model_->drift, model_->drift_a, u_vals_[k]);
    grid_.analyze(rhs_vals_, {out.data(), static_cast<std::size_t>(m_)});
    return out;
}

void SpectralEvolver::step(Eigen::VectorXd& state, const Eigen::VectorXd& increment_coords) {
    const bool need_drift_grid = model_->drift != DriftKind::zero;
    const bool mult = model_->diffusion == DiffusionKind::mult_sine ||
                      model_->diffusion == DiffusionKind::mult_inv_sqrt;

    if (!need_drift_grid && !mult) {
        // Additive or deterministic: everything stays in coordinates.
        if (model_->diffusion == DiffusionKind::additive)
            state += increment_coords.head(m_);
        state.array() *= decay_.array();
        return;
    }

    if (need_drift_grid || mult)
        grid_.synthesize({state.data(), static_cast<std::size_t>(m_)}, u_vals_);

    if (mult) {
        grid_.synthesize({increment_coords.data(),
                          static_cast<std::size_t>(increment_coords.size())},
                         w_vals_);
        for (std::size_t k = 0; k < u_vals_.size(); ++k) {
            const double f = need_drift_grid
                                 ? drift_value(model_->drift, model_->drift_a, u_vals_[k])
                                 : 0.0;
            rhs_vals_[k] = dt_ * f + diffusion_factor(model_->diffusion, u_vals_[k]) * w_vals_[k];
        }
        grid_.analyze(rhs_vals_, {rhs_coords_.data(), static_cast<std::size_t>(m_)});
        state += rhs_coords_;
    } else {
        for (std::size_t k = 0; k < u_vals_.size(); ++k)
            rhs_vals_[k] = drift_value(model_->drift, model_->drift_a, u_vals_[k]);
        grid_.analyze(rhs_vals_, {rhs_coords_.data(), static_cast<std::size_t>(m_)});
        state += dt_ * rhs_coords_;
        if (model_->diffusion == DiffusionKind::additive)
            state += increment_coords.head(m_);
    }
    state.array() *= decay_.array();
}

FemEvolver::FemEvolver(const ModelSpec& model, const noise::FemEmbedding& embedding,
                       const StepScheme& scheme)
    : model_(&model),
      space_(&embedding.space()),
      embedding_(&embedding),
      scheme_(scheme) {
    const int n = space_->dim();
    if (scheme_.kind == SchemeKind::exponential) {
        decay_.resize(n);
        for (int i = 0; i < n; ++i)
            decay_(i) = std::exp(-space_->eigenvalues()(i) * scheme_.dt);
    } else {
        shifted_.factor(space_->mass_diag() + scheme_.dt * space_->stiff_diag(),
                        space_->mass_off() + scheme_.dt * space_->stiff_off());
    }
    nodal_buf_.resize(n);
    eig_buf_.resize(n);
    noise_buf_.resize(n);
}

Eigen::VectorXd FemEvolver::initial_nodal() const {
    const auto c = model_->x0.spectral_coeffs(embedding_->truncation());
    return space_->mass_solve(fem::load_from_spectral(*space_, c));
}

Eigen::VectorXd FemEvolver::initial_state() const {
    Eigen::VectorXd nodal = initial_nodal();
    return scheme_.kind == SchemeKind::exponential ? space_->to_eigen_coords(nodal) : nodal;
}

Eigen::VectorXd FemEvolver::terminal_nodal(const Eigen::VectorXd& state) const {
    return scheme_.kind == SchemeKind::exponential ? space_->from_eigen_coords(state) : state;
}

void FemEvolver::step(Eigen::VectorXd& state, const Eigen::VectorXd& increment_coords) {
    const bool mult = model_->diffusion == DiffusionKind::mult_sine ||
                      model_->diffusion == DiffusionKind::mult_inv_sqrt;
    const bool drift = model_->drift != DriftKind::zero;

    if (scheme_.kind == SchemeKind::exponential) {
        // state = eigencoordinates; nodal_buf_ holds u at the nodes when needed
        if (drift || mult) nodal_buf_ = space_->from_eigen_coords(state);
        if (mult) {
            // interpolate-then-project: G(u) times the embedded increment,
            // with the drift folded into the same basis change
            noise_buf_ = embedding_->nodal(increment_coords);
            for (int j = 0; j < space_->dim(); ++j) {
                const double u = nodal_buf_(j);
                double w = diffusion_factor(model_->diffusion, u) * noise_buf_(j);
                if (drift) w += scheme_.dt * drift_value(model_->drift, model_->drift_a, u);
                noise_buf_(j) = w;
            }
            state += space_->to_eigen_coords(noise_buf_);
        } else {
            if (drift) {
                for (int j = 0; j < space_->dim(); ++j)
                    nodal_buf_(j) = drift_value(model_->drift, model_->drift_a, nodal_buf_(j));
                state += scheme_.dt * space_->to_eigen_coords(nodal_buf_);
            }
            if (model_->diffusion == DiffusionKind::additive)
                state += embedding_->eigen(increment_coords);
        }
        state.array() *= decay_.array();
        return;
    }

    // Semi-implicit: state = nodal coefficients.
    Eigen::VectorXd rhs = space_->mass_apply(state);
    if (drift) {
        for (int j = 0; j < space_->dim(); ++j)
            nodal_buf_(j) = drift_value(model_->drift, model_->drift_a, state(j));
        rhs += scheme_.dt * space_->mass_apply(nodal_buf_);
    }
    if (mult) {
        noise_buf_ = embedding_->nodal(increment_coords);
        for (int j = 0; j < space_->dim(); ++j)
            noise_buf_(j) *= diffusion_factor(model_->diffusion, state(j));
        rhs += space_->mass_apply(noise_buf_);
    } else if (model_->diffusion == DiffusionKind::additive) {
        rhs += embedding_->load(increment_coords);
    }
    shifted_.solve_in_place(rhs);
    state = rhs;
}

Eigen::VectorXd eval_nemytskii_fem(const ModelSpec& model, const fem::FemFunction& state) {
    Eigen::VectorXd out(state.coeffs().size());
    for (int j = 0; j < out.size(); ++j)
        out(j) = drift_value(model.drift, model.drift_a, state.coeffs()(j));
    return out;
}

SpectralVector eval_nemytskii_spectral(const ModelSpec& model, const SpectralVector& state) {
    SpectralEvolver ev(model, state.modes(), model.final_time);
    Eigen::Map<const Eigen::VectorXd> x(state.data().data(), state.modes());
    Eigen::VectorXd out = ev.nemytskii_drift(x);
    return SpectralVector(std::vector<double>(out.data(), out.data() + out.size()));
}

fem::FemFunction step_fem(const fem::FemFunction& state, const ModelSpec& model,
                          const StepScheme& scheme, const noise::WienerIncrement& inc,
                          const noise::FemEmbedding& embedding) {
    if (&state.space() != &embedding.space())
        throw std::invalid_argument("step_fem: state and embedding use different spaces");
    if (inc.coords.size() < state.space().dim())
        throw std::invalid_argument("step_fem: increment truncation below N_h");
    FemEvolver ev(model, embedding, scheme);
    Eigen::VectorXd s = scheme.kind == SchemeKind::exponential
                            ? state.space().to_eigen_coords(state.coeffs())
                            : state.coeffs();
    ev.step(s, inc.coords);
    return fem::FemFunction(state.space(), ev.terminal_nodal(s));
}

SpectralVector step_spectral(const SpectralVector& state, const ModelSpec& model,
                             const StepScheme& scheme, const noise::WienerIncrement& inc) {
    if (scheme.kind != SchemeKind::exponential)
        throw std::invalid_argument("step_spectral: spectral states use the exponential scheme");
    if (inc.coords.size() < state.modes())
        throw std::invalid_argument("step_spectral: increment truncation below mode count");
    SpectralEvolver ev(model, state.modes(), scheme.dt);
    Eigen::VectorXd s =
        Eigen::Map<const Eigen::VectorXd>(state.data().data(), state.modes());
    ev.step(s, inc.coords);
    return SpectralVector(std::vector<double>(s.data(), s.data() + s.size()));
}

fem::FemFunction evolve_fem(const ModelSpec& model, const StepScheme& scheme,
                            const noise::FemEmbedding& embedding,
                            const std::vector<noise::WienerIncrement>& path) {
    if (static_cast<int>(path.size()) != scheme.steps(model.final_time))
        throw std::invalid_argument("evolve_fem: path length != T/dt");
    FemEvolver ev(model, embedding, scheme);
    Eigen::VectorXd s = ev.initial_state();
    for (const auto& inc : path) ev.step(s, inc.coords);
    return fem::FemFunction(embedding.space(), ev.terminal_nodal(s));
}

SpectralVector evolve_spectral(const ModelSpec& model, const StepScheme& scheme, int modes,
                               const std::vector<noise::WienerIncrement>& path) {
    if (static_cast<int>(path.size()) != scheme.steps(model.final_time))
        throw std::invalid_argument("evolve_spectral: path length != T/dt");
    if (scheme.kind != SchemeKind::exponential)
        throw std::invalid_argument("evolve_spectral: spectral states use the exponential scheme");
    SpectralEvolver ev(model, modes, scheme.dt);
    Eigen::VectorXd s = ev.initial_state();
    for (const auto& inc : path) ev.step(s, inc.coords);
    return SpectralVector(std::vector<double>(s.data(), s.data() + s.size()));
}

}  // namespace spdelab::sde
