//! Weierstrass elliptic functions wp, wp', zeta, sigma for given invariants
//! (g2, g3), including period computation, lattice reduction, argument
//! reduction and the addition formula.
//!
//! Strategy: half-periods come from Carlson symmetric integrals between the
//! cubic roots, validated by reconstructing (g2, g3) from the lattice via
//! Eisenstein series. The stored basis is Gauss-reduced so the nome is small
//! (|q| <= e^{-pi*sqrt(3)/2}), which keeps every theta series short. wp is
//! evaluated by argument reduction to the centered cell, a truncated Laurent
//! series near the origin and the duplication formula; zeta and sigma go
//! through theta quotients in the nome.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Value jet of wp at a point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WpValue {
    pub p: C64,
    pub p_prime: C64,
    /// wp'' = 6 wp^2 - g2/2, derived.
    pub p_second: C64,
}

/// An evaluation context for one lattice: invariants, roots, a reduced basis
/// of half-periods with Im(omega'/omega) > 0, the nome, and cached series
/// data. Immutable after construction.
#[derive(Clone, Debug)]
pub struct EllipticInvariants {
    pub g2: C64,
    pub g3: C64,
    /// Roots of 4t^3 - g2 t - g3, labeled so that wp(omega) = e1,
    /// wp(omega + omega') = e2, wp(omega') = e3.
    pub roots: [C64; 3],
    /// Half-period omega (the lattice is 2m*omega + 2n*omega').
    pub omega: C64,
    /// Half-period omega', with tau = omega'/omega Gauss-reduced.
    pub omega_p: C64,
    /// zeta(omega), the quasi-period increment of zeta.
    pub eta1: C64,
    /// Nome q = exp(i pi tau).
    pub nome: C64,
    /// Discriminant g2^3 - 27 g3^2.
    pub discriminant: C64,
    /// Laurent coefficients c_m of wp(z) = z^-2 + sum c_m z^{2m-2}, m >= 2.
    wp_coeffs: Vec<C64>,
    /// Shortest nonzero lattice vector length.
    r_min: f64,
}

fn cplx_max3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).max(c)
}

/// Roots of the depressed cubic 4t^3 - g2 t - g3 = 0, Newton-polished.
pub fn invariant_cubic_roots(g2: C64, g3: C64) -> [C64; 3] {
    // 4t^3 - g2 t - g3 = 0  <=>  t^3 + pt + q = 0 with p = -g2/4, q = -g3/4
    let p = -g2 / 4.0;
    let q = -g3 / 4.0;
    let half_q = q / 2.0;
    let disc = half_q * half_q + (p / 3.0).powu(3);
    let s = disc.sqrt();
    // pick the better-conditioned cube-root branch
    let u3 = if (-half_q + s).norm() >= (-half_q - s).norm() {
        -half_q + s
    } else {
        -half_q - s
    };
    let u = u3.powf(1.0 / 3.0);
    let w = C64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [C64::new(0.0, 0.0); 3];
    for (k, r) in roots.iter_mut().enumerate() {
        let uk = u * w.powu(k as u32);
        let mut t = if uk.norm() > 0.0 { uk - p / (3.0 * uk) } else { uk };
        // Newton polish on 4t^3 - g2 t - g3
        for _ in 0..40 {
            let f = 4.0 * t * t * t - g2 * t - g3;
            let fp = 12.0 * t * t - g2;
            if fp.norm() == 0.0 {
                break;
            }
            let step = f / fp;
            t -= step;
            if step.norm() <= 1e-16 * (1.0 + t.norm()) {
                break;
            }
        }
        *r = t;
    }
    roots
}

/// Carlson symmetric elliptic integral R_F with principal branches.
pub fn carlson_rf(x: C64, y: C64, z: C64) -> C64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mu;
    for _ in 0..120 {
        mu = (x + y + z) / 3.0;
        let scale = cplx_max3(x.norm(), y.norm(), z.norm()).max(1e-300);
        let spread = cplx_max3((x - mu).norm(), (y - mu).norm(), (z - mu).norm());
        if spread < 2.5e-4 * scale {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) * 0.25;
        y = (y + lam) * 0.25;
        z = (z + lam) * 0.25;
    }
    mu = (x + y + z) / 3.0;
    let xd = 1.0 - x / mu;
    let yd = 1.0 - y / mu;
    let zd = -xd - yd;
    let e2 = xd * yd - zd * zd;
    let e3 = xd * yd * zd;
    (C64::new(1.0, 0.0) - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0)
        / mu.sqrt()
}

/// Gauss-reduce a lattice basis of half-periods in place:
/// |Re(tau)| <= 1/2, |tau| >= 1, Im(tau) > 0 with tau = omega'/omega.
pub fn reduce_basis(mut omega: C64, mut omega_p: C64) -> (C64, C64) {
    if (omega_p / omega).im < 0.0 {
        omega_p = -omega_p;
    }
    for _ in 0..256 {
        let tau = omega_p / omega;
        let k = tau.re.round();
        if k != 0.0 {
            omega_p -= k * omega;
        }
        let tau = omega_p / omega;
        if tau.norm() < 1.0 - 1e-15 {
            let t = omega;
            omega = omega_p;
            omega_p = -t;
        } else {
            break;
        }
    }
    if (omega_p / omega).im < 0.0 {
        omega_p = -omega_p;
    }
    (omega, omega_p)
}

/// (g2, g3) of the lattice with half-periods (omega, omega') via Eisenstein
/// series in the reduced nome.
pub fn invariants_from_periods(omega: C64, omega_p: C64) -> (C64, C64) {
    let (w, wp) = reduce_basis(omega, omega_p);
    let tau = wp / w;
    let q2 = (2.0 * PI * I * tau).exp();
    let mut e4 = C64::new(1.0, 0.0);
    let mut e6 = C64::new(1.0, 0.0);
    let mut qn = q2;
    for n in 1..64u32 {
        let nf = n as f64;
        let term = qn / (1.0 - qn);
        e4 += 240.0 * nf.powi(3) * term;
        e6 -= 504.0 * nf.powi(5) * term;
        qn *= q2;
        if qn.norm() < 1e-22 {
            break;
        }
    }
    let f = PI / w;
    let f2 = f * f;
    let f4 = f2 * f2;
    let g2 = f4 * e4 / 12.0;
    let g3 = f4 * f2 * e6 / 216.0;
    (g2, g3)
}

/// Jet of theta_1 and its first `order` v-derivatives at v, nome q.
fn theta1_jet(v: C64, q: C64, order: usize) -> [C64; 4] {
    let mut out = [C64::new(0.0, 0.0); 4];
    let mut max_term = 0.0f64;
    for n in 0..64u32 {
        let m = 2 * n + 1; // odd index
        let mf = m as f64;
        // q^{(n+1/2)^2} = q^{m^2/4}
        let qe = q.powf(mf * mf / 4.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let (s, c) = ((mf * v).sin(), (mf * v).cos());
        let base = 2.0 * sign * qe;
        out[0] += base * s;
        if order >= 1 {
            out[1] += base * mf * c;
        }
        if order >= 2 {
            out[2] -= base * mf * mf * s;
        }
        if order >= 3 {
            out[3] -= base * mf * mf * mf * c;
        }
        let t = (base * s).norm().max((base * c).norm() * mf.powi(order as i32));
        max_term = max_term.max(t);
        if n > 3 && t < 1e-24 * max_term.max(1e-300) {
            break;
        }
    }
    out
}

impl EllipticInvariants {
    /// Build the evaluation context from the invariants.
    pub fn from_invariants(g2: C64, g3: C64) -> Result<Self> {
        let disc = g2 * g2 * g2 - 27.0 * g3 * g3;
        let tol = 1e-12 * cplx_max3(1.0, g2.norm().powi(3), g3.norm().powi(2));
        if disc.norm() < tol {
            return Err(Error::DegenerateLattice {
                disc: disc.norm(),
                tol,
            });
        }
        let roots = invariant_cubic_roots(g2, g3);
        let [r0, r1, r2] = roots;
        // half-period candidates from root-to-root symmetric integrals
        let x0 = carlson_rf(C64::new(0.0, 0.0), r0 - r1, r0 - r2);
        let x1 = carlson_rf(C64::new(0.0, 0.0), r1 - r0, r1 - r2);
        let x2 = carlson_rf(C64::new(0.0, 0.0), r2 - r0, r2 - r1);
        let cands = [x0, x1, x2, I * x0, I * x1, I * x2];
        let scale = g2.norm().max(g3.norm()).max(1.0);
        let mut best: Option<(f64, C64, C64)> = None;
        for a in 0..cands.len() {
            for b in 0..cands.len() {
                if a == b {
                    continue;
                }
                let (u, v) = (cands[a], cands[b]);
                if u.norm() == 0.0 || v.norm() == 0.0 {
                    continue;
                }
                let ratio = v / u;
                if ratio.im.abs() < 1e-10 {
                    continue; // collinear, not a basis
                }
                let (w, wp) = reduce_basis(u, v);
                let (h2, h3) = invariants_from_periods(w, wp);
                let err = ((h2 - g2).norm() + (h3 - g3).norm()) / scale;
                if best.as_ref().map_or(true, |(e, _, _)| err < *e) {
                    best = Some((err, w, wp));
                }
            }
        }
        let (err, omega, omega_p) = best.ok_or(Error::PeriodBasis)?;
        if err > 1e-8 {
            return Err(Error::PeriodBasis);
        }

        // wp Laurent coefficients: c2 = g2/20, c3 = g3/28,
        // c_m = 3/((2m+1)(m-3)) * sum_{i=2}^{m-2} c_i c_{m-i}
        let n_coeff = 40usize;
        let mut c = vec![C64::new(0.0, 0.0); n_coeff + 1];
        c[2] = g2 / 20.0;
        c[3] = g3 / 28.0;
        for m in 4..=n_coeff {
            let mut s = C64::new(0.0, 0.0);
            for i in 2..=(m - 2) {
                s += c[i] * c[m - i];
            }
            c[m] = 3.0 / ((2 * m + 1) as f64 * (m - 3) as f64) * s;
        }

        let mut r_min = f64::INFINITY;
        for m in -2i32..=2 {
            for n in -2i32..=2 {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = 2.0 * (m as f64) * omega + 2.0 * (n as f64) * omega_p;
                r_min = r_min.min(w.norm());
            }
        }

        let tau = omega_p / omega;
        let nome = (I * PI * tau).exp();
        // eta1 = -(pi^2 / (12 omega)) theta1'''(0) / theta1'(0)
        let t0 = theta1_jet(C64::new(0.0, 0.0), nome, 3);
        let eta1 = -(PI * PI) / (12.0 * omega) * (t0[3] / t0[1]);

        let mut inv = EllipticInvariants {
            g2,
            g3,
            roots,
            omega,
            omega_p,
            eta1,
            nome,
            discriminant: disc,
            wp_coeffs: c,
            r_min,
        };

        // label roots by the value of wp at each half-period
        let e_at_omega = inv.wp(omega)?.p;
        let e_at_sum = inv.wp(omega + omega_p)?.p;
        let e_at_omega_p = inv.wp(omega_p)?.p;
        let mut labeled = [C64::new(0.0, 0.0); 3];
        let mut used = [false; 3];
        for (slot, target) in [e_at_omega, e_at_sum, e_at_omega_p].iter().enumerate() {
            let mut bi = usize::MAX;
            let mut bd = f64::INFINITY;
            for (k, r) in roots.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let d = (r - target).norm();
                if d < bd {
                    bd = d;
                    bi = k;
                }
            }
            let rscale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
            if bd > 1e-6 * rscale {
                return Err(Error::PeriodBasis);
            }
            labeled[slot] = roots[bi];
            used[bi] = true;
        }
        inv.roots = labeled;
        Ok(inv)
    }

    /// Build the context for the lattice spanned by the periods
    /// (2*omega, 2*omega').
    pub fn from_half_periods(omega: C64, omega_p: C64) -> Result<Self> {
        let (g2, g3) = invariants_from_periods(omega, omega_p);
        Self::from_invariants(g2, g3)
    }

    pub fn tau(&self) -> C64 {
        self.omega_p / self.omega
    }

    /// zeta(omega'), from the Legendre relation
    /// eta1 * omega' - eta2 * omega = i pi / 2.
    pub fn eta2(&self) -> C64 {
        (self.eta1 * self.omega_p - I * PI / 2.0) / self.omega
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    /// Reduce z modulo the period lattice to the minimal-norm representative.
    /// Returns (z0, a, b) with z = z0 + 2a*omega + 2b*omega'.
    pub fn reduce(&self, z: C64) -> (C64, i64, i64) {
        // solve z = 2a*omega + 2b*omega' over the reals
        let (w1, w2) = (2.0 * self.omega, 2.0 * self.omega_p);
        let det = w1.re * w2.im - w1.im * w2.re;
        let a = (z.re * w2.im - z.im * w2.re) / det;
        let b = (z.im * w1.re - z.re * w1.im) / det;
        let (a0, b0) = (a.round() as i64, b.round() as i64);
        let mut best = (z - (a0 as f64) * w1 - (b0 as f64) * w2, a0, b0);
        for da in -1..=1i64 {
            for db in -1..=1i64 {
                let (aa, bb) = (a0 + da, b0 + db);
                let zz = z - (aa as f64) * w1 - (bb as f64) * w2;
                if zz.norm() < best.0.norm() {
                    best = (zz, aa, bb);
                }
            }
        }
        best
    }

    fn guard_lattice(&self, z0: C64) -> Result<()> {
        let dist = z0.norm();
        if dist < 1e-8 * self.omega.norm() {
            return Err(Error::NearLatticePoint { dist });
        }
        Ok(())
    }

    /// wp and wp' by Laurent series at a shrunk argument plus duplication.
    fn wp_series_dup(&self, z0: C64) -> (C64, C64) {
        let mut zs = z0;
        let mut halvings = 0u32;
        while zs.norm() > 0.4 * self.r_min && halvings < 12 {
            zs *= 0.5;
            halvings += 1;
        }
        // series at zs
        let z2 = zs * zs;
        let mut p = 1.0 / z2;
        let mut dp = -2.0 / (z2 * zs);
        let mut zpow = z2; // z^{2m-2} for m=2
        for m in 2..self.wp_coeffs.len() {
            let cm = self.wp_coeffs[m];
            p += cm * zpow;
            dp += cm * (2 * m - 2) as f64 * zpow / zs;
            zpow *= z2;
        }
        // duplication back up
        for _ in 0..halvings {
            let r = 6.0 * p * p - self.g2 / 2.0;
            let q2 = dp * dp;
            let pn = (r * r) / (4.0 * q2) - 2.0 * p;
            let qn = r * (12.0 * p * q2 - r * r) / (4.0 * q2 * dp) - dp;
            p = pn;
            dp = qn;
        }
        (p, dp)
    }

    /// Evaluate wp(z), wp'(z), wp''(z).
    pub fn wp(&self, z: C64) -> Result<WpValue> {
        let (z0, _, _) = self.reduce(z);
        self.guard_lattice(z0)?;
        let (p, dp) = self.wp_series_dup(z0);
        Ok(WpValue {
            p,
            p_prime: dp,
            p_second: 6.0 * p * p - self.g2 / 2.0,
        })
    }

    /// Evaluate zeta(z) via the theta quotient plus quasi-period shifts.
    pub fn zeta(&self, z: C64) -> Result<C64> {
        let (z0, a, b) = self.reduce(z);
        self.guard_lattice(z0)?;
        let v = PI * z0 / (2.0 * self.omega);
        let t = theta1_jet(v, self.nome, 1);
        let z_body = self.eta1 * z0 / self.omega + PI / (2.0 * self.omega) * (t[1] / t[0]);
        Ok(z_body + 2.0 * (a as f64) * self.eta1 + 2.0 * (b as f64) * self.eta2())
    }

    /// Evaluate sigma(z) (entire; exact zeros on the lattice).
    pub fn sigma(&self, z: C64) -> C64 {
        let (z0, a, b) = self.reduce(z);
        let v = PI * z0 / (2.0 * self.omega);
        let t = theta1_jet(v, self.nome, 1);
        let t0 = theta1_jet(C64::new(0.0, 0.0), self.nome, 1);
        let body = (2.0 * self.omega / PI)
            * (self.eta1 * z0 * z0 / (2.0 * self.omega)).exp()
            * (t[0] / t0[1]);
        if a == 0 && b == 0 {
            return body;
        }
        let (af, bf) = (a as f64, b as f64);
        let sign = if (a + b + a * b) % 2 == 0 { 1.0 } else { -1.0 };
        let eta_shift = 2.0 * af * self.eta1 + 2.0 * bf * self.eta2();
        let mid = z0 + af * self.omega + bf * self.omega_p;
        sign * body * (eta_shift * mid).exp()
    }

    /// Residual of the wp addition formula at (x1, x2).
    pub fn addition_residual(&self, x1: C64, x2: C64) -> Result<f64> {
        let w1 = self.wp(x1)?;
        let w2 = self.wp(x2)?;
        let denom = w1.p - w2.p;
        let scale = w1.p.norm().max(w2.p.norm()).max(1.0);
        if denom.norm() < 1e-8 * scale {
            return Err(Error::DegenerateArguments);
        }
        let w12 = self.wp(x1 + x2)?;
        let rhs = 0.25 * ((w1.p_prime - w2.p_prime) / denom).powu(2);
        Ok((w12.p + w1.p + w2.p - rhs).norm())
    }

    /// Scaled residual of wp'^2 = 4 wp^3 - g2 wp - g3 at z.
    pub fn wp_ode_residual(&self, z: C64) -> Result<f64> {
        let w = self.wp(z)?;
        let lhs = w.p_prime * w.p_prime;
        let rhs = 4.0 * w.p.powu(3) - self.g2 * w.p - self.g3;
        Ok((lhs - rhs).norm() / (1.0 + w.p.norm().powi(3)))
    }

    /// Taylor jets [wp, wp', wp'', ...] of wp at a regular point, up to
    /// derivative order `n`. Uses wp'' = 6 wp^2 - g2/2 and Leibniz.
    pub fn wp_derivative_jet(&self, z: C64, n: usize) -> Result<Vec<C64>> {
        let w = self.wp(z)?;
        let mut p = vec![C64::new(0.0, 0.0); n + 1];
        p[0] = w.p;
        if n >= 1 {
            p[1] = w.p_prime;
        }
        if n >= 2 {
            p[2] = w.p_second;
        }
        // differentiate p'' = 6p^2 - g2/2 repeatedly:
        // p^{(k+2)} = 6 sum_{j=0}^{k} C(k,j) p^{(j)} p^{(k-j)}
        for k in 1..=n.saturating_sub(2) {
            let mut s = C64::new(0.0, 0.0);
            let mut cjk = 1.0f64; // C(k, j), starting at j = 0
            for j in 0..=k {
                s += cjk * p[j] * p[k - j];
                cjk = cjk * ((k - j) as f64) / ((j + 1) as f64);
            }
            p[k + 2] = 6.0 * s;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cubic_roots_factor() {
        // 4t^3 - 4t = 4t(t-1)(t+1): roots {-1, 0, 1}
        let mut roots = invariant_cubic_roots(c(4.0, 0.0), c(0.0, 0.0))
            .map(|r| r.re)
            .to_vec();
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] + 1.0).abs() < 1e-12);
        assert!(roots[1].abs() < 1e-12);
        assert!((roots[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cgl_pair_root_contains_one() {
        // 4t^3 + 72t - 76 = 4(t-1)(t^2 + t + 19)
        let roots = invariant_cubic_roots(c(-72.0, 0.0), c(76.0, 0.0));
        let best = roots
            .iter()
            .map(|r| (r - c(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-12);
    }

    #[test]
    fn degenerate_lattice_rejected() {
        // g2 = 3, g3 = 1 gives g2^3 = 27 g3^2
        let err = EllipticInvariants::from_invariants(c(3.0, 0.0), c(1.0, 0.0));
        assert!(matches!(err, Err(Error::DegenerateLattice { .. })));
    }

    #[test]
    fn invariants_roundtrip_through_periods() {
        for (g2, g3) in [
            (c(4.0, 0.0), c(0.0, 0.0)),
            (c(-72.0, 0.0), c(76.0, 0.0)),
            (c(348.0, 0.0), c(664.0, 0.0)),
            (c(3.0, 1.5), c(-0.7, 2.2)),
        ] {
            let inv = EllipticInvariants::from_invariants(g2, g3).unwrap();
            let (h2, h3) = invariants_from_periods(inv.omega, inv.omega_p);
            let scale = g2.norm().max(g3.norm()).max(1.0);
            assert!(
                (h2 - g2).norm() / scale < 1e-10,
                "g2 mismatch for {g2}: {h2}"
            );
            assert!(
                (h3 - g3).norm() / scale < 1e-10,
                "g3 mismatch for {g3}: {h3}"
            );
            assert!((inv.omega_p / inv.omega).im > 0.0);
            assert!(inv.nome.norm() < 1.0);
        }
    }

    #[test]
    fn wp_ode_and_parity() {
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        let pts = [
            c(0.31, 0.11),
            c(-0.42, 0.23),
            c(0.05, -0.34),
            c(0.27, 0.4),
        ];
        for &z in &pts {
            let r = inv.wp_ode_residual(z).unwrap();
            assert!(r < 1e-10, "ode residual {r:e} at {z}");
            let w = inv.wp(z).unwrap();
            let wm = inv.wp(-z).unwrap();
            assert!((w.p - wm.p).norm() < 1e-10 * (1.0 + w.p.norm()));
            assert!((w.p_prime + wm.p_prime).norm() < 1e-9 * (1.0 + w.p_prime.norm()));
        }
    }

    #[test]
    fn wp_at_half_period_is_labeled_root() {
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        let w = inv.wp(inv.omega).unwrap();
        assert!((w.p - inv.roots[0]).norm() < 1e-9 * (1.0 + w.p.norm()));
        assert!(w.p_prime.norm() < 1e-7 * (1.0 + w.p.norm().powf(1.5)));
        let w3 = inv.wp(inv.omega_p).unwrap();
        assert!((w3.p - inv.roots[2]).norm() < 1e-9 * (1.0 + w3.p.norm()));
        let sum: C64 = inv.roots.iter().sum();
        assert!(sum.norm() < 1e-9);
    }

    #[test]
    fn zeta_odd_and_quasi_periodic() {
        let inv = EllipticInvariants::from_invariants(c(-2.0, 1.0), c(0.5, -0.3)).unwrap();
        let z = c(0.21, 0.13);
        let a = inv.zeta(z).unwrap();
        let b = inv.zeta(-z).unwrap();
        assert!((a + b).norm() < 1e-10 * (1.0 + a.norm()));
        let shifted = inv.zeta(z + 2.0 * inv.omega).unwrap();
        assert!((shifted - a - 2.0 * inv.eta1).norm() < 1e-9 * (1.0 + shifted.norm()));
        let shifted_p = inv.zeta(z + 2.0 * inv.omega_p).unwrap();
        assert!((shifted_p - a - 2.0 * inv.eta2()).norm() < 1e-9 * (1.0 + shifted_p.norm()));
    }

    #[test]
    fn legendre_relation() {
        for (g2, g3) in [(c(4.0, 0.0), c(0.0, 0.0)), (c(-72.0, 0.0), c(76.0, 0.0))] {
            let inv = EllipticInvariants::from_invariants(g2, g3).unwrap();
            let lhs = inv.eta1 * inv.omega_p - inv.eta2() * inv.omega;
            assert!((lhs - I * PI / 2.0).norm() < 1e-12);
            // eta1 really is zeta(omega)
            let direct = inv.zeta(inv.omega).unwrap();
            assert!((direct - inv.eta1).norm() < 1e-10 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn sigma_normalization_and_shift() {
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        // sigma(z)/z -> 1
        for h in [1e-3, 1e-4] {
            let s = inv.sigma(c(h, h / 2.0));
            let z = c(h, h / 2.0);
            assert!((s / z - 1.0).norm() < 1e-5, "sigma/z at {h}");
        }
        // oddness
        let z = c(0.3, 0.2);
        assert!((inv.sigma(z) + inv.sigma(-z)).norm() < 1e-10);
        // quasi-periodicity: sigma(z + 2 omega) = -sigma(z) exp(2 eta1 (z + omega))
        let lhs = inv.sigma(z + 2.0 * inv.omega);
        let rhs = -inv.sigma(z) * (2.0 * inv.eta1 * (z + inv.omega)).exp();
        assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn sigma_log_derivative_matches_zeta() {
        let inv = EllipticInvariants::from_invariants(c(-2.0, 1.0), c(0.5, -0.3)).unwrap();
        let h = 1e-5;
        for k in 0..20 {
            let z = c(0.15 + 0.02 * k as f64, 0.1 - 0.013 * k as f64);
            let d = (inv.sigma(z + c(h, 0.0)) - inv.sigma(z - c(h, 0.0))) / (2.0 * h);
            let numeric = d / inv.sigma(z);
            let exact = inv.zeta(z).unwrap();
            assert!(
                (numeric - exact).norm() / exact.norm().max(1.0) < 1e-9,
                "point {k}: {numeric} vs {exact}"
            );
        }
    }

    #[test]
    fn addition_formula_residual_small() {
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        let pairs = [
            (c(0.3, 0.1), c(0.11, -0.23)),
            (c(-0.2, 0.31), c(0.4, 0.05)),
            (c(0.17, 0.19), c(-0.33, -0.12)),
        ];
        for &(x1, x2) in &pairs {
            let r = inv.addition_residual(x1, x2).unwrap();
            let scale = inv.wp(x1).unwrap().p.norm() + inv.wp(x2).unwrap().p.norm();
            assert!(r / scale.max(1.0) < 1e-9, "residual {r:e}");
        }
        // x2 = -x1 is rejected: wp even
        assert!(matches!(
            inv.addition_residual(c(0.3, 0.1), c(-0.3, -0.1)),
            Err(Error::DegenerateArguments)
        ));
        assert!(matches!(
            inv.addition_residual(c(0.3, 0.1), c(0.3, 0.1)),
            Err(Error::DegenerateArguments)
        ));
    }

    #[test]
    fn near_lattice_point_rejected() {
        let inv = EllipticInvariants::from_invariants(c(4.0, 0.0), c(0.0, 0.0)).unwrap();
        let z = 1e-10 * inv.omega;
        assert!(matches!(inv.wp(z), Err(Error::NearLatticePoint { .. })));
        let z2 = 2.0 * inv.omega + 1e-10 * inv.omega_p;
        assert!(matches!(inv.zeta(z2), Err(Error::NearLatticePoint { .. })));
    }

    #[test]
    fn zeta_pair_identity() {
        // zeta(u+v) + zeta(u-v) - 2 zeta(u) = wp'(u) / (wp(u) - wp(v))
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        let samples = [
            (c(0.23, 0.14), c(0.37, -0.08)),
            (c(-0.31, 0.22), c(0.12, 0.33)),
            (c(0.45, -0.17), c(-0.2, -0.29)),
        ];
        for &(u, v) in &samples {
            let lhs = inv.zeta(u + v).unwrap() + inv.zeta(u - v).unwrap()
                - 2.0 * inv.zeta(u).unwrap();
            let wu = inv.wp(u).unwrap();
            let wv = inv.wp(v).unwrap();
            let rhs = wu.p_prime / (wu.p - wv.p);
            assert!(
                (lhs - rhs).norm() / rhs.norm().max(1.0) < 1e-9,
                "identity failed at ({u}, {v})"
            );
        }
    }

    #[test]
    fn wp_derivative_jet_consistent() {
        let inv = EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        let z = c(0.31, 0.17);
        let jet = inv.wp_derivative_jet(z, 6).unwrap();
        // p3 = 12 p p'
        assert!((jet[3] - 12.0 * jet[0] * jet[1]).norm() < 1e-8 * (1.0 + jet[3].norm()));
        // p4 = 12 p'^2 + 12 p p''
        let p4 = 12.0 * jet[1] * jet[1] + 12.0 * jet[0] * jet[2];
        assert!((jet[4] - p4).norm() < 1e-8 * (1.0 + jet[4].norm()));
        // finite-difference check of p3
        let h = 1e-5;
        let fd = (inv.wp(z + c(h, 0.0)).unwrap().p_second
            - inv.wp(z - c(h, 0.0)).unwrap().p_second)
            / (2.0 * h);
        assert!((jet[3] - fd).norm() / (1.0 + jet[3].norm()) < 1e-6);
    }
}
