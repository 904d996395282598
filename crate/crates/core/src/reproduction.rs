//! Disease-free equilibrium and the effective reproduction number.
//!
//! With the infected compartments empty, the vaccinated fractions solve a
//! linear balance, so the equilibrium has a closed form:
//!
//! ```text
//! V_f* = (w1 mu_f + u1) / (mu_f + theta + u1),   S_f* = 1 - V_f*
//! V_m* = (w2 mu_m + u2) / (mu_m + theta + u2),   S_m* = 1 - V_m*
//! ```
//!
//! Ordering the infected compartments as `(U_f, I_f, I_m)`, new infections
//! only cross between sexes, so the next-generation matrix `K = F V^-1` has
//! the block form `[[0, 0, a], [0, 0, b], [c, d, 0]]`. Its characteristic
//! polynomial is `lambda (lambda^2 - (a c + b d))` and the spectral radius is
//! `sqrt(a c + b d)`. Writing `a = (1 - p) T_mf`, `b = p T_mf` splits that
//! into the male-to-female transfer `T_mf = a + b` and the female-to-male
//! transfer `T_fm = (1 - p) c + p d`.

use serde::Serialize;

use crate::model::{ControlVector, ModelParameters, State};

/// Width of the band around one where stability is not decided.
pub const THRESHOLD_BAND: f64 = 1e-9;

/// Disease-free equilibrium for a fixed control vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DfeState(pub State);

impl DfeState {
    pub fn state(&self) -> &State {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReproductionBreakdown {
    /// Expected female infections caused by one infected male.
    pub t_m_f: f64,
    /// Expected male infections caused by one newly infected female.
    pub t_f_m: f64,
    pub r_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DfeStability {
    Stable,
    Unstable,
    Indeterminate,
}

impl std::fmt::Display for DfeStability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DfeStability::Stable => "stable",
            DfeStability::Unstable => "unstable",
            DfeStability::Indeterminate => "indeterminate",
        })
    }
}

pub fn compute_dfe(c: &ControlVector, p: &ModelParameters) -> DfeState {
    let v_f = (c.w1 * p.mu_f + c.u1) / (p.mu_f + p.theta + c.u1);
    let v_m = (c.w2 * p.mu_m + c.u2) / (p.mu_m + p.theta + c.u2);
    DfeState(State { s_f: 1.0 - v_f, u_f: 0.0, i_f: 0.0, v_f, s_m: 1.0 - v_m, i_m: 0.0, v_m })
}

/// Next-generation matrix over `(U_f, I_f, I_m)` at the controlled DFE.
pub fn next_generation_matrix(c: &ControlVector, p: &ModelParameters) -> [[f64; 3]; 3] {
    let dfe = compute_dfe(c, p).0;
    let female_susceptibility = dfe.s_f + p.epsilon * dfe.v_f;
    let male_susceptibility = dfe.s_m + p.epsilon * dfe.v_m;

    let new_infections = [
        [0.0, 0.0, female_susceptibility * (1.0 - p.p) * p.beta_m],
        [0.0, 0.0, female_susceptibility * p.p * p.beta_m],
        [male_susceptibility * p.beta_f, male_susceptibility * p.beta_f_tilde, 0.0],
    ];

    // Transition matrix V is lower triangular:
    //   [ a      0  0 ]
    //   [ -alpha b  0 ]
    //   [ 0      0  m ]
    let a = p.gamma_f + c.alpha + p.mu_f;
    let b = p.gamma_f + p.mu_f;
    let m = p.gamma_m + p.mu_m;
    let v_inv = [[1.0 / a, 0.0, 0.0], [c.alpha / (a * b), 1.0 / b, 0.0], [0.0, 0.0, 1.0 / m]];

    let mut k = [[0.0; 3]; 3];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = (0..3).map(|l| new_infections[i][l] * v_inv[l][j]).sum();
        }
    }
    k
}

pub fn effective_r(c: &ControlVector, p: &ModelParameters) -> ReproductionBreakdown {
    let k = next_generation_matrix(c, p);
    let t_m_f = k[0][2] + k[1][2];
    let t_f_m = (1.0 - p.p) * k[2][0] + p.p * k[2][1];
    ReproductionBreakdown { t_m_f, t_f_m, r_e: (t_m_f * t_f_m).sqrt() }
}

pub fn classify_dfe(c: &ControlVector, p: &ModelParameters) -> DfeStability {
    classify_r(effective_r(c, p).r_e)
}

pub fn classify_r(r_e: f64) -> DfeStability {
    if (r_e - 1.0).abs() < THRESHOLD_BAND {
        DfeStability::Indeterminate
    } else if r_e < 1.0 {
        DfeStability::Stable
    } else {
        DfeStability::Unstable
    }
}
