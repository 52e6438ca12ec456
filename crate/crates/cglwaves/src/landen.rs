//! Period-halving (Landen) transformation between two Weierstrass lattices.
//!
//! Halving the period 2*omega whose half-period carries the distinguished
//! root e1 (wp(omega) = e1) produces a finer lattice; the two function
//! triples are linked by rational/exponential identities and the two
//! invariant pairs satisfy a pair of polynomial relations.

use num_complex::Complex64 as C64;

use crate::elliptic::EllipticInvariants;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LandenPair {
    /// Coarse lattice, periods (2 omega, 2 omega').
    pub lower: EllipticInvariants,
    /// Fine lattice, periods (omega, 2 omega').
    pub upper: EllipticInvariants,
    /// The distinguished root: wp_lower(halved) = e1.
    pub e1: C64,
    /// Lower half-period at which the halving happens.
    pub halved: C64,
    /// The complementary lower half-period kept as omega' of the fine basis.
    pub kept: C64,
}

/// Halve the period associated with the root e1 of 4t^3 - g2 t - g3.
pub fn landen_descend(lower: &EllipticInvariants, e1: C64) -> Result<LandenPair> {
    let scale = lower.g2.norm().max(lower.g3.norm()).max(1.0);
    let resid = (4.0 * e1.powu(3) - lower.g2 * e1 - lower.g3).norm();
    if resid > 1e-8 * scale {
        return Err(Error::NotARoot {
            value: format!("{e1}"),
            residual: resid,
        });
    }
    // locate the half-period whose wp value is e1
    let candidates = [
        (lower.omega, lower.omega_p),
        (lower.omega_p, lower.omega),
        (lower.omega + lower.omega_p, lower.omega_p),
    ];
    let mut best: Option<(f64, C64, C64)> = None;
    for &(h, other) in &candidates {
        let d = (lower.wp(h)?.p - e1).norm();
        if best.as_ref().map_or(true, |(bd, _, _)| d < *bd) {
            best = Some((d, h, other));
        }
    }
    let (d, halved, kept) = best.unwrap();
    let root_scale = lower.roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if d > 1e-6 * root_scale {
        return Err(Error::NotARoot {
            value: format!("{e1}"),
            residual: d,
        });
    }
    // fine lattice: periods (halved, 2*kept) -> half-periods (halved/2, kept)
    let upper = EllipticInvariants::from_half_periods(halved / 2.0, kept)?;
    Ok(LandenPair {
        lower: lower.clone(),
        upper,
        e1,
        halved,
        kept,
    })
}

impl LandenPair {
    /// Residual of the rational wp-level map
    /// wp_up(x) = wp_low(x) - (g2 - 12 e1^2) / (4 (wp_low(x) - e1)).
    pub fn wp_identity_residual(&self, x: C64) -> Result<f64> {
        let up = self.upper.wp(x)?.p;
        let low = self.lower.wp(x)?.p;
        let corr = (self.lower.g2 - 12.0 * self.e1 * self.e1) / (4.0 * (low - self.e1));
        let rhs = low - corr;
        Ok((up - rhs).norm() / (1.0 + rhs.norm()))
    }

    /// Residual of the two-term sum form
    /// wp_up(x) = wp_low(x) + wp_low(x - omega) - wp_low(omega).
    pub fn wp_sum_identity_residual(&self, x: C64) -> Result<f64> {
        let up = self.upper.wp(x)?.p;
        let rhs = self.lower.wp(x)?.p + self.lower.wp(x - self.halved)?.p - self.e1;
        Ok((up - rhs).norm() / (1.0 + rhs.norm()))
    }

    /// Residuals of the zeta- and sigma-level identities.
    ///
    /// zeta_up(x) = zeta_low(x) + zeta_low(x - omega) + e1 x + zeta_low(omega)
    /// sigma_up(x) = e^{e1 x^2/2 - zeta_low(omega) x}
    ///               sigma_low(x) sigma_low(x + omega) / sigma_low(omega)
    pub fn zeta_sigma_identity_residuals(&self, x: C64) -> Result<(f64, f64)> {
        let eta_h = self.lower.zeta(self.halved)?;
        let z_up = self.upper.zeta(x)?;
        let z_rhs =
            self.lower.zeta(x)? + self.lower.zeta(x - self.halved)? + self.e1 * x + eta_h;
        let rz = (z_up - z_rhs).norm() / (1.0 + z_rhs.norm());

        let s_up = self.upper.sigma(x);
        let s_rhs = (self.e1 * x * x / 2.0 - eta_h * x).exp() * self.lower.sigma(x)
            * self.lower.sigma(x + self.halved)
            / self.lower.sigma(self.halved);
        let rs = (s_up - s_rhs).norm() / (1.0 + s_rhs.norm());
        Ok((rz, rs))
    }

    /// Scaled residuals of the four algebraic relations between the roots
    /// and invariants of the two lattices:
    ///   E1 = -2 e1
    ///   (E2 - E3)^2 = 36 e1^2 - 4 (e2 - e3)^2
    ///   -32 g2 g3 + 22 g3 G2 + 11 g2 G3 - G2 G3 = 0
    ///   196 g2^3 + 49 g2^2 G2 - 7260 g3^2 + 660 g3 G3 - 15 G3^2 = 0
    pub fn relation_residuals(&self) -> [f64; 4] {
        let (g2, g3) = (self.lower.g2, self.lower.g3);
        let (gg2, gg3) = (self.upper.g2, self.upper.g3);
        // identify E1 as the upper root closest to -2 e1; e2, e3 are the
        // lower roots other than e1
        let target = -2.0 * self.e1;
        let mut ui = 0;
        let mut ud = f64::INFINITY;
        for (k, r) in self.upper.roots.iter().enumerate() {
            let d = (r - target).norm();
            if d < ud {
                ud = d;
                ui = k;
            }
        }
        let e_big_1 = self.upper.roots[ui];
        let others: Vec<C64> = (0..3).filter(|&k| k != ui).map(|k| self.upper.roots[k]).collect();
        let lowers: Vec<C64> = self
            .lower
            .roots
            .iter()
            .copied()
            .filter(|r| (r - self.e1).norm() > 1e-9 * (1.0 + r.norm()))
            .collect();
        let r1 = (e_big_1 + 2.0 * self.e1).norm() / (1.0 + self.e1.norm());
        let r2 = if lowers.len() == 2 {
            let lhs = (others[0] - others[1]).powu(2);
            let rhs = 36.0 * self.e1 * self.e1 - 4.0 * (lowers[0] - lowers[1]).powu(2);
            (lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm()))
        } else {
            f64::INFINITY
        };
        let t3 = [
            -32.0 * g2 * g3,
            22.0 * g3 * gg2,
            11.0 * g2 * gg3,
            -gg2 * gg3,
        ];
        let s3: C64 = t3.iter().sum();
        let r3 = s3.norm() / t3.iter().map(|t| t.norm()).fold(1.0, f64::max);
        let t4 = [
            196.0 * g2.powu(3),
            49.0 * g2 * g2 * gg2,
            -7260.0 * g3 * g3,
            660.0 * g3 * gg3,
            -15.0 * gg3 * gg3,
        ];
        let s4: C64 = t4.iter().sum();
        let r4 = s4.norm() / t4.iter().map(|t| t.norm()).fold(1.0, f64::max);
        [r1, r2, r3, r4]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn canonical_pair() -> LandenPair {
        let lower =
            EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        landen_descend(&lower, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn canonical_descent_reaches_integer_invariants() {
        let pair = canonical_pair();
        assert!(
            (pair.upper.g2 - c(348.0, 0.0)).norm() < 1e-9 * 348.0,
            "G2 = {}",
            pair.upper.g2
        );
        assert!(
            (pair.upper.g3 - c(664.0, 0.0)).norm() < 1e-9 * 664.0,
            "G3 = {}",
            pair.upper.g3
        );
        let r = pair.relation_residuals();
        for (k, rk) in r.iter().enumerate() {
            assert!(*rk < 1e-10, "relation {k}: {rk:e}");
        }
    }

    #[test]
    fn canonical_integer_relations_exact() {
        // the invariant relations hold in exact integer arithmetic for the
        // canonical pair (-72, 76) -> (348, 664)
        let (g2, g3, gg2, gg3) = (-72i64, 76i64, 348i64, 664i64);
        assert_eq!(-32 * g2 * g3 + 22 * g3 * gg2 + 11 * g2 * gg3 - gg2 * gg3, 0);
        assert_eq!(
            196 * g2.pow(3) + 49 * g2 * g2 * gg2 - 7260 * g3 * g3 + 660 * g3 * gg3
                - 15 * gg3 * gg3,
            0
        );
        // E1 = -2 e1 with e1 = 1: -2 is a root of 4t^3 - 348t - 664
        assert_eq!(4 * (-2i64).pow(3) - gg2 * (-2) - gg3, 0);
        // (E2-E3)^2 = 336 from t^2 - 2t - 83; 36 e1^2 - 4 (e2-e3)^2 with
        // (e2-e3)^2 = -75 from t^2 + t + 19
        assert_eq!(2 * 2 + 4 * 83, 336);
        assert_eq!(36 + 4 * 75, 336);
    }

    #[test]
    fn not_a_root_rejected() {
        let lower =
            EllipticInvariants::from_invariants(c(-72.0, 0.0), c(76.0, 0.0)).unwrap();
        assert!(matches!(
            landen_descend(&lower, c(1.05, 0.0)),
            Err(Error::NotARoot { .. })
        ));
    }

    #[test]
    fn wp_identities_on_canonical_pair() {
        let pair = canonical_pair();
        let pts = [
            c(0.23, 0.11),
            c(-0.31, 0.07),
            c(0.42, -0.18),
            c(0.11, 0.29),
            c(-0.05, -0.21),
        ];
        for &x in &pts {
            let r1 = pair.wp_identity_residual(x).unwrap();
            assert!(r1 < 1e-9, "rational map residual {r1:e} at {x}");
            let r2 = pair.wp_sum_identity_residual(x).unwrap();
            assert!(r2 < 1e-9, "sum form residual {r2:e} at {x}");
        }
        // near-boundary probe just off the halved half-period
        let x = pair.halved * 1.001;
        let r = pair.wp_identity_residual(x).unwrap();
        assert!(r < 1e-6, "near-boundary residual {r:e}");
    }

    #[test]
    fn zeta_sigma_identities_on_canonical_pair() {
        let pair = canonical_pair();
        let pts = [c(0.19, 0.13), c(-0.27, 0.21), c(0.33, -0.09)];
        for &x in &pts {
            let (rz, rs) = pair.zeta_sigma_identity_residuals(x).unwrap();
            assert!(rz < 1e-8, "zeta identity residual {rz:e} at {x}");
            assert!(rs < 1e-8, "sigma identity residual {rs:e} at {x}");
        }
    }

    #[test]
    fn zeta_identity_differentiates_to_wp_sum() {
        // numerical d/dx of the zeta identity recovers the wp sum form
        let pair = canonical_pair();
        let x = c(0.21, 0.17);
        let h = 1e-5;
        let f = |x: C64| -> C64 {
            pair.lower.zeta(x).unwrap() + pair.lower.zeta(x - pair.halved).unwrap()
                + pair.e1 * x
                + pair.lower.zeta(pair.halved).unwrap()
        };
        let d = (f(x + c(h, 0.0)) - f(x - c(h, 0.0))) / (2.0 * h);
        let wp_up = pair.upper.wp(x).unwrap().p;
        assert!(((-d) - wp_up).norm() / (1.0 + wp_up.norm()) < 1e-7);
    }

    #[test]
    fn sigma_identity_origin_normalization() {
        // both sides of the sigma identity behave like x near 0
        let pair = canonical_pair();
        let x = c(1e-4, 5e-5);
        let rhs = (pair.e1 * x * x / 2.0 - pair.lower.zeta(pair.halved).unwrap() * x).exp()
            * pair.lower.sigma(x)
            * pair.lower.sigma(x + pair.halved)
            / pair.lower.sigma(pair.halved);
        assert!((rhs / x - 1.0).norm() < 1e-6);
    }

    #[test]
    fn descent_on_generic_complex_invariants() {
        let lower =
            EllipticInvariants::from_invariants(c(3.0, 1.5), c(-0.7, 2.2)).unwrap();
        for k in 0..3 {
            let e1 = lower.roots[k];
            let pair = landen_descend(&lower, e1).unwrap();
            let r = pair.relation_residuals();
            assert!(r[0] < 1e-9 && r[2] < 1e-9 && r[3] < 1e-9, "{r:?}");
            let x = c(0.31, 0.12);
            assert!(pair.wp_identity_residual(x).unwrap() < 1e-8);
            let (rz, rs) = pair.zeta_sigma_identity_residuals(x).unwrap();
            assert!(rz < 1e-7 && rs < 1e-7, "zeta/sigma {rz:e} {rs:e}");
        }
    }
}
