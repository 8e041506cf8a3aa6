//! Energy balance for the perturbation `v = u − a` around a small solution `a`:
//! `v_t + a·∇v + v·∇a + v·∇v + ∇q − Δv = 0`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::SpectralVelocity;
use crate::ops::projected_convection;
use crate::solver::{evolve_with, integrate_if_rk4, x_norm, EvolveOptions, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VEnergyReport {
    pub a_outcome: Outcome,
    pub v_outcome: Outcome,
    /// `‖a‖_{L⁴Ḣ¹}` over the horizon.
    pub a_x_norm: f64,
    pub v0_l2: f64,
    /// `‖v‖_{L∞L²}` over stored steps.
    pub v_linf_l2: f64,
    /// `‖∇v‖_{L²L²}`.
    pub v_grad_l2l2: f64,
    /// `|∫₀ᵀ∫ (v·∇a)·v|`, the only term that can feed energy into `v`.
    pub cross_term: f64,
    /// `‖a‖_{L⁴Ḣ¹} ‖v‖^{1/2}_{L∞L²} ‖∇v‖^{3/2}_{L²L²}`.
    pub product_bound: f64,
    /// `cross_term / product_bound`.
    pub constant: f64,
    /// `max_t |‖v‖² + 2∫‖∇v‖² − 2∫⟨v, N⟩ − ‖v₀‖²| / ‖v₀‖²`.
    pub balance_defect: f64,
}

/// Solve for `a` from `a₀`, then for `v` from `v₀` with `a` frozen and
/// interpolated linearly between its stored steps.
pub fn v_energy_check(a0: &SpectralVelocity, v0: &SpectralVelocity, horizon: f64, opts: &EvolveOptions) -> Result<VEnergyReport> {
    let a_opts = EvolveOptions { stride: 1, ..*opts };
    let (a_traj, a_rep) = evolve_with(a0, horizon, &a_opts)?;
    v0.require_divergence_free(1e-10)?;
    let (_, v_rep) = integrate_if_rk4(v0, a_rep.t_end, &a_opts, |t, v| {
        let a = a_traj.interpolate(t).expect("stage time inside the a run");
        let total = projected_convection(&a.add(v).expect("same grid"));
        projected_convection(&a).sub(&total).expect("same grid")
    })?;
    let a_x_norm = x_norm(&a_traj, a_rep.t_end)?;
    let first = v_rep.samples[0];
    let e0 = first.l2 * first.l2;
    let last = v_rep.samples.last().copied().unwrap_or(first);
    let v_linf_l2 = v_rep.samples.iter().map(|s| s.l2).fold(0.0, f64::max);
    let v_grad_l2l2 = (0.5 * last.dissipation).max(0.0).sqrt();
    let cross_term = 0.5 * last.work.abs();
    let product_bound = a_x_norm * v_linf_l2.sqrt() * v_grad_l2l2.powf(1.5);
    let balance_defect = if e0 == 0.0 {
        0.0
    } else {
        v_rep
            .samples
            .iter()
            .map(|s| (s.energy_balance() - e0).abs() / e0)
            .fold(0.0, f64::max)
    };
    Ok(VEnergyReport {
        a_outcome: a_rep.outcome,
        v_outcome: v_rep.outcome,
        a_x_norm,
        v0_l2: first.l2,
        v_linf_l2,
        v_grad_l2l2,
        cross_term,
        product_bound,
        constant: if product_bound == 0.0 { 0.0 } else { cross_term / product_bound },
        balance_defect,
    })
}
