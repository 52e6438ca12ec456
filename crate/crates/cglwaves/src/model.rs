//! Parameterization of the cubic-quintic complex Ginzburg-Landau traveling
//! wave problem and the residual operators of the reduced ODE system.
//!
//! The reduction A = sqrt(M) e^{i(-omega t + phi(xi))}, xi = x - ct turns the
//! PDE into a coupled system for the squared modulus M and the reduced phase
//! gradient psi. Residual operators take explicit jets (M up to third order,
//! psi up to first order); nothing here differentiates numerically.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// PDE coefficients: i A_t + p A_xx + q |A|^2 A + r |A|^4 A - i gamma A = 0,
/// plus the traveling-wave speed c and frequency omega.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub gamma: f64,
    pub c: f64,
    pub omega: f64,
}

/// The seven reduced real parameters (plus the two components of 1/p kept
/// for reconstructing the full phase of A).
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CglParams {
    pub e_r: f64,
    pub e_i: f64,
    pub d_r: f64,
    pub d_i: f64,
    pub g_r: f64,
    pub g_i: f64,
    pub csi: f64,
    pub s_r: f64,
    pub s_i: f64,
}

/// Free jet of (M, psi) at a point: M with three derivatives, psi with one.
#[derive(Clone, Copy, Debug)]
pub struct Jet {
    pub m: C64,
    pub m1: C64,
    pub m2: C64,
    pub m3: C64,
    pub psi: C64,
    pub psi1: C64,
}

/// Map the PDE coefficients to the reduced parameter set.
pub fn reduce_params(phys: &PhysicalParams) -> Result<CglParams> {
    if phys.p.norm() == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    let e = phys.r / phys.p;
    let d = phys.q / phys.p;
    let inv_p = 1.0 / phys.p; // s_r - i s_i
    let s_r = inv_p.re;
    let s_i = -inv_p.im;
    let g = C64::new(phys.gamma, phys.omega) / phys.p
        + phys.c * phys.c * s_r / 4.0 * C64::new(2.0 * s_i, s_r);
    Ok(CglParams {
        e_r: e.re,
        e_i: e.im,
        d_r: d.re,
        d_i: d.im,
        g_r: g.re,
        g_i: g.im,
        csi: phys.c * s_i,
        s_r,
        s_i,
    })
}

impl CglParams {
    /// Check the standing assumptions: quintic case needs Im(r/p) != 0,
    /// cubic case (e = 0) needs Im(q/p) != 0.
    pub fn validate(&self) -> Result<()> {
        let quintic = self.e_r != 0.0 || self.e_i != 0.0;
        if quintic && self.e_i == 0.0 {
            return Err(Error::InvalidParameter(
                "quintic case requires e_i != 0".into(),
            ));
        }
        if !quintic && self.d_i == 0.0 {
            return Err(Error::InvalidParameter(
                "cubic case requires d_i != 0".into(),
            ));
        }
        Ok(())
    }
}

/// The two left-hand sides of the reduced real system:
///   R1 = M''/(2M) - M'^2/(4M^2) - csi M'/(2M) - psi^2 + e_r M^2 + d_r M + g_i
///   R2 = psi' + psi M'/M - csi psi + e_i M^2 + d_i M - g_r
pub fn residual_system(p: &CglParams, j: &Jet) -> Result<(C64, C64)> {
    if j.m.norm() < 1e-300 {
        return Err(Error::ZeroModulus);
    }
    let r1 = j.m2 / (2.0 * j.m) - j.m1 * j.m1 / (4.0 * j.m * j.m)
        - p.csi * j.m1 / (2.0 * j.m)
        - j.psi * j.psi
        + p.e_r * j.m * j.m
        + p.d_r * j.m
        + p.g_i;
    let r2 = j.psi1 + j.psi * j.m1 / j.m - p.csi * j.psi + p.e_i * j.m * j.m + p.d_i * j.m
        - p.g_r;
    Ok((r1, r2))
}

/// Magnitude scales of the two system residuals (largest constituent term,
/// floored at 1), for tolerance-scaled comparisons near poles.
pub fn residual_system_scales(p: &CglParams, j: &Jet) -> (f64, f64) {
    let t1 = [
        (j.m2 / (2.0 * j.m)).norm(),
        (j.m1 * j.m1 / (4.0 * j.m * j.m)).norm(),
        (p.csi * j.m1 / (2.0 * j.m)).norm(),
        (j.psi * j.psi).norm(),
        (p.e_r * j.m * j.m).norm(),
        (p.d_r * j.m).norm(),
        p.g_i.abs(),
    ];
    let t2 = [
        j.psi1.norm(),
        (j.psi * j.m1 / j.m).norm(),
        (p.csi * j.psi).norm(),
        (p.e_i * j.m * j.m).norm(),
        (p.d_i * j.m).norm(),
        p.g_r.abs(),
    ];
    (
        t1.iter().fold(1.0f64, |a, &b| a.max(b)),
        t2.iter().fold(1.0f64, |a, &b| a.max(b)),
    )
}

/// The auxiliary combination G = MM''/2 - M'^2/4 - (csi/2) MM' + e_r M^4
/// + d_r M^3 + g_i M^2 and its xi-derivative, from a jet.
fn g_and_gprime(p: &CglParams, j: &Jet) -> (C64, C64) {
    let g = 0.5 * j.m * j.m2 - 0.25 * j.m1 * j.m1 - 0.5 * p.csi * j.m * j.m1
        + p.e_r * j.m.powu(4)
        + p.d_r * j.m.powu(3)
        + p.g_i * j.m * j.m;
    let gp = 0.5 * j.m * j.m3 - 0.5 * p.csi * (j.m1 * j.m1 + j.m * j.m2)
        + 4.0 * p.e_r * j.m.powu(3) * j.m1
        + 3.0 * p.d_r * j.m * j.m * j.m1
        + 2.0 * p.g_i * j.m * j.m1;
    (g, gp)
}

/// Residual of the eliminated third-order second-degree ODE for M:
/// (G' - 2 csi G)^2 - 4 G M^2 (e_i M^2 + d_i M - g_r)^2.
pub fn residual_order3(p: &CglParams, j: &Jet) -> Result<C64> {
    if j.m.norm() < 1e-300 {
        return Err(Error::ZeroModulus);
    }
    let (g, gp) = g_and_gprime(p, j);
    let h = p.e_i * j.m * j.m + p.d_i * j.m - p.g_r;
    let a = gp - 2.0 * p.csi * g;
    Ok(a * a - 4.0 * g * j.m * j.m * h * h)
}

pub fn residual_order3_scale(p: &CglParams, j: &Jet) -> f64 {
    let (g, gp) = g_and_gprime(p, j);
    let h = p.e_i * j.m * j.m + p.d_i * j.m - p.g_r;
    let a = gp - 2.0 * p.csi * g;
    (a * a).norm().max((4.0 * g * j.m * j.m * h * h).norm()).max(1.0)
}

/// Reconstruct psi from an M-jet via the elimination relations
/// psi = (2 csi G - G') / (2 M^2 (e_i M^2 + d_i M - g_r)) and psi^2 = G/M^2.
pub fn psi_from_m_jet(p: &CglParams, j: &Jet) -> Result<(C64, C64)> {
    if j.m.norm() < 1e-300 {
        return Err(Error::ZeroModulus);
    }
    let (g, gp) = g_and_gprime(p, j);
    let h = p.e_i * j.m * j.m + p.d_i * j.m - p.g_r;
    let psi = (2.0 * p.csi * g - gp) / (2.0 * j.m * j.m * h);
    let psi_sq = g / (j.m * j.m);
    Ok((psi, psi_sq))
}

/// Logarithmic derivative of the reduced complex amplitude:
/// M'/(2M) + i psi.
pub fn dlog_amplitude(j: &Jet) -> Result<C64> {
    if j.m.norm() < 1e-300 {
        return Err(Error::ZeroModulus);
    }
    Ok(j.m1 / (2.0 * j.m) + C64::new(0.0, 1.0) * j.psi)
}
