//! Formal Laurent expansions of (M, psi) at the movable singularities of the
//! traveling-wave system, to arbitrary order, in extended precision.
//!
//! Two singularity families exist: poles of M (double for the cubic case,
//! simple for the quintic case, with psi simple in both) and zeros of M
//! (where 1/M and psi have simple poles and two constants stay arbitrary).
//! Coefficients are found order by order from the 2x2 linear system that
//! couples (M_n, psi_n); the system matrix is extracted by probing the
//! residual operators with unit perturbations, so no hand-derived recursion
//! is baked in.

use dashu::base::SquareRoot;
use num_complex::Complex64 as C64;

use crate::bigc::{bf, Bf, BigC};
use crate::error::{Error, Result};
use crate::model::CglParams;
use crate::series::{Coeff, Series};

/// Which reduced equation is being analyzed: cubic (quintic term absent) or
/// cubic-quintic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equation {
    Cgl3,
    Cgl5,
}

/// Extended-precision copy of the seven reduced parameters.
#[derive(Clone, Debug)]
pub struct CglParamsBig {
    pub e_r: Bf,
    pub e_i: Bf,
    pub d_r: Bf,
    pub d_i: Bf,
    pub g_r: Bf,
    pub g_i: Bf,
    pub csi: Bf,
    pub bits: usize,
}

impl CglParamsBig {
    /// Exact lift of binary64 parameters.
    pub fn from_params(p: &CglParams, bits: usize) -> Self {
        CglParamsBig {
            e_r: bf(p.e_r, bits),
            e_i: bf(p.e_i, bits),
            d_r: bf(p.d_r, bits),
            d_i: bf(p.d_i, bits),
            g_r: bf(p.g_r, bits),
            g_i: bf(p.g_i, bits),
            csi: bf(p.csi, bits),
            bits,
        }
    }

    pub fn to_params(&self) -> CglParams {
        CglParams {
            e_r: crate::bigc::bf_to_f64(&self.e_r),
            e_i: crate::bigc::bf_to_f64(&self.e_i),
            d_r: crate::bigc::bf_to_f64(&self.d_r),
            d_i: crate::bigc::bf_to_f64(&self.d_i),
            g_r: crate::bigc::bf_to_f64(&self.g_r),
            g_i: crate::bigc::bf_to_f64(&self.g_i),
            csi: crate::bigc::bf_to_f64(&self.csi),
            s_r: 0.0,
            s_i: 0.0,
        }
    }
}

/// One admissible leading behavior at a pole of M.
#[derive(Clone, Debug)]
pub struct LeadingBehavior {
    pub equation: Equation,
    /// Phase exponent alpha (real in the admissible regimes).
    pub alpha: Bf,
    /// A0^2 (cubic) or A0^4 (quintic): the power of the amplitude scale
    /// fixed by the leading balance.
    pub a0_power: Bf,
    /// Leading coefficient of M (may be complex for the quintic case).
    pub m0: BigC,
    /// Leading coefficient of psi.
    pub psi0: BigC,
    /// Leading exponent of M: -2 (cubic) or -1 (quintic).
    pub leading_exponent: i64,
    /// Fuchs indices {-1, 0, pair}.
    pub fuchs_indices: [C64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    PoleOfM,
    ZeroOfM,
}

/// One movable-singularity branch: truncated series for M and psi.
#[derive(Clone, Debug)]
pub struct LaurentFamily {
    pub kind: FamilyKind,
    pub equation: Equation,
    pub m: Series<BigC>,
    pub psi: Series<BigC>,
    /// Branch data: leading coefficient of M.
    pub m0: BigC,
    /// Arbitrary constants of the zero family.
    pub arbitrary: Option<(BigC, BigC)>,
    /// Number of computed relative orders.
    pub order: usize,
}

fn real(p: &Bf) -> BigC {
    BigC::from_real(p.clone())
}

/// The two polynomial residual operators, cleared of denominators:
/// E1 = 2MM'' - M'^2 - 2 csi MM' - 4 M^2 psi^2 + 4 e_r M^4 + 4 d_r M^3 + 4 g_i M^2
/// E2 = (M psi)' - csi (M psi) + e_i M^3 + d_i M^2 - g_r M
pub fn residual_series(
    p: &CglParamsBig,
    m: &Series<BigC>,
    psi: &Series<BigC>,
) -> (Series<BigC>, Series<BigC>) {
    let two = BigC::from_i64(2, p.bits);
    let four = BigC::from_i64(4, p.bits);
    let m1 = m.derivative();
    let m2 = m1.derivative();
    let m_sq = m.mul(m);
    let m_cu = m_sq.mul(m);
    let m_4 = m_sq.mul(&m_sq);
    let psi_sq = psi.mul(psi);
    let csi = real(&p.csi);
    let e1 = m
        .mul(&m2)
        .scale(&two)
        .sub(&m1.mul(&m1))
        .sub(&m.mul(&m1).scale(&(two.clone() * csi.clone())))
        .sub(&m_sq.mul(&psi_sq).scale(&four))
        .add(&m_4.scale(&(four.clone() * real(&p.e_r))))
        .add(&m_cu.scale(&(four.clone() * real(&p.d_r))))
        .add(&m_sq.scale(&(four.clone() * real(&p.g_i))));
    let mpsi = m.mul(psi);
    let e2 = mpsi
        .derivative()
        .sub(&mpsi.scale(&csi))
        .add(&m_cu.scale(&real(&p.e_i)))
        .add(&m_sq.scale(&real(&p.d_i)))
        .sub(&m.scale(&real(&p.g_r)));
    (e1, e2)
}

/// Both admissible phase exponents and the associated leading coefficients.
pub fn leading_orders(p: &CglParamsBig, equation: Equation) -> Result<Vec<LeadingBehavior>> {
    let zero = Bf::ZERO;
    match equation {
        Equation::Cgl5 => {
            if p.e_i == zero {
                return Err(Error::InvalidParameter(
                    "quintic leading balance needs e_i != 0".into(),
                ));
            }
            // real/imag parts of (1/2 - i a)(3/2 - i a) + A0^4 (e_r + i e_i) = 0
            // with A0^4 = 2a/e_i give 4 e_i a^2 - 8 e_r a - 3 e_i = 0
            let disc = (Bf::from(64) * p.e_r.sqr() + Bf::from(48) * p.e_i.sqr()).sqrt();
            let denom = Bf::from(8) * &p.e_i;
            let alpha_plus = (Bf::from(8) * &p.e_r + &disc) / &denom;
            let alpha_minus = (Bf::from(8) * &p.e_r - &disc) / &denom;
            if alpha_plus == zero || alpha_minus == zero {
                return Err(Error::DegenerateLeading);
            }
            let mut out = Vec::new();
            for alpha in [alpha_plus, alpha_minus] {
                // A0^4 = 2 alpha / e_i; m0 = A0^2 = +-sqrt of it
                let a0p = Bf::from(2) * &alpha / &p.e_i;
                let m0_base = BigC::from_real(a0p.clone()).sqrt();
                let af = crate::bigc::bf_to_f64(&alpha);
                let s = C64::new(1.0 - 32.0 * af * af, 0.0).sqrt();
                let fuchs = [
                    C64::new(-1.0, 0.0),
                    C64::new(0.0, 0.0),
                    (C64::new(5.0, 0.0) + s) / 2.0,
                    (C64::new(5.0, 0.0) - s) / 2.0,
                ];
                for sign in [1i64, -1] {
                    let m0 = m0_base.scale_real(&Bf::from(sign));
                    let psi0 = (&m0 * &m0).scale_real(&(p.e_i.clone() / Bf::from(2)));
                    out.push(LeadingBehavior {
                        equation,
                        alpha: alpha.clone(),
                        a0_power: a0p.clone(),
                        m0,
                        psi0,
                        leading_exponent: -1,
                        fuchs_indices: fuchs,
                    });
                }
            }
            Ok(out)
        }
        Equation::Cgl3 => {
            if p.d_i == zero {
                return Err(Error::InvalidParameter(
                    "cubic leading balance needs d_i != 0".into(),
                ));
            }
            // (1 - i a)(2 - i a) + A0^2 (d_r + i d_i) = 0 with A0^2 = 3a/d_i
            // gives d_i a^2 - 3 d_r a - 2 d_i = 0
            let disc = (Bf::from(9) * p.d_r.sqr() + Bf::from(8) * p.d_i.sqr()).sqrt();
            let denom = Bf::from(2) * &p.d_i;
            let alpha_plus = (Bf::from(3) * &p.d_r + &disc) / &denom;
            let alpha_minus = (Bf::from(3) * &p.d_r - &disc) / &denom;
            if alpha_plus == zero || alpha_minus == zero {
                return Err(Error::DegenerateLeading);
            }
            let mut out = Vec::new();
            for alpha in [alpha_plus, alpha_minus] {
                let a0p = Bf::from(3) * &alpha / &p.d_i; // A0^2 = m0
                let m0 = BigC::from_real(a0p.clone());
                let psi0 = m0.scale_real(&(p.d_i.clone() / Bf::from(3)));
                let af = crate::bigc::bf_to_f64(&alpha);
                let s = C64::new(1.0 - 24.0 * af * af, 0.0).sqrt();
                let fuchs = [
                    C64::new(-1.0, 0.0),
                    C64::new(0.0, 0.0),
                    (C64::new(7.0, 0.0) + s) / 2.0,
                    (C64::new(7.0, 0.0) - s) / 2.0,
                ];
                out.push(LeadingBehavior {
                    equation,
                    alpha: alpha.clone(),
                    a0_power: a0p.clone(),
                    m0,
                    psi0,
                    leading_exponent: -2,
                    fuchs_indices: fuchs,
                });
            }
            Ok(out)
        }
    }
}

/// Find the lowest relative index at which two residual series differ.
fn first_changed_index(base: &Series<BigC>, probed: &Series<BigC>, rel_floor: f64) -> Option<usize> {
    let d = probed.sub(base);
    let m = d.max_mag().max(base.max_mag() * rel_floor);
    for (k, c) in d.c.iter().enumerate() {
        if c.mag() > rel_floor * m.max(1e-300) {
            // translate to an index of the base series
            let power = d.val + k as i64;
            return Some((power - base.val) as usize);
        }
    }
    None
}

struct OrderSolver<'a> {
    p: &'a CglParamsBig,
    m: Series<BigC>,
    psi: Series<BigC>,
    n_terms: usize,
}

impl<'a> OrderSolver<'a> {
    fn new(
        p: &'a CglParamsBig,
        p_m: i64,
        p_psi: i64,
        a0: BigC,
        b0: BigC,
        n_terms: usize,
    ) -> Self {
        let mut mc = vec![BigC::zero_c(); n_terms];
        let mut pc = vec![BigC::zero_c(); n_terms];
        mc[0] = a0;
        pc[0] = b0;
        OrderSolver {
            p,
            m: Series::from_coeffs(p_m, mc),
            psi: Series::from_coeffs(p_psi, pc),
            n_terms,
        }
    }

    fn residuals_truncated(&self, rel_len: usize) -> (Series<BigC>, Series<BigC>) {
        let m = self.m.clone().truncate(rel_len);
        let psi = self.psi.clone().truncate(rel_len);
        residual_series(self.p, &m, &psi)
    }

    /// Solve order n; `inject` fixes M_n and leaves psi_n to one consistent
    /// equation (used at the resonant order of the zero family).
    fn step(&mut self, n: usize, inject: Option<BigC>) -> Result<()> {
        let rel = n + 2;
        let (r1, r2) = self.residuals_truncated(rel);
        // unit probe at full working precision: exact integer constants carry
        // only their bit length as precision and corrupt derivative factors
        let one = BigC::from_f64(1.0, 0.0, self.p.bits);
        // probe M_n
        self.m.c[n] = one.clone();
        let (r1a, r2a) = self.residuals_truncated(rel);
        self.m.c[n] = BigC::zero_c();
        // probe psi_n
        self.psi.c[n] = one.clone();
        let (r1b, r2b) = self.residuals_truncated(rel);
        self.psi.c[n] = BigC::zero_c();

        let i1 = first_changed_index(&r1, &r1a, 1e-25)
            .into_iter()
            .chain(first_changed_index(&r1, &r1b, 1e-25))
            .min();
        let i2 = first_changed_index(&r2, &r2a, 1e-25)
            .into_iter()
            .chain(first_changed_index(&r2, &r2b, 1e-25))
            .min();
        let (i1, i2) = match (i1, i2) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::ResonantIndex { order: n }),
        };
        let a11 = r1a.coeff_rel(i1) - r1.coeff_rel(i1);
        let a12 = r1b.coeff_rel(i1) - r1.coeff_rel(i1);
        let a21 = r2a.coeff_rel(i2) - r2.coeff_rel(i2);
        let a22 = r2b.coeff_rel(i2) - r2.coeff_rel(i2);
        let b1 = -r1.coeff_rel(i1);
        let b2 = -r2.coeff_rel(i2);

        let det = a11.clone() * a22.clone() - a12.clone() * a21.clone();
        let norm = a11.mag_f64() * a22.mag_f64() + a12.mag_f64() * a21.mag_f64();
        let singular = det.mag_f64() <= 1e-30 * norm.max(1e-300);

        if let Some(a_n) = inject {
            // fixed M_n; pick the equation with the larger psi-coefficient
            let (c_a, c_b, rhs) = if a12.mag_f64() >= a22.mag_f64() {
                (a11.clone(), a12.clone(), b1.clone())
            } else {
                (a21.clone(), a22.clone(), b2.clone())
            };
            if c_b.mag_f64() == 0.0 {
                return Err(Error::ResonantIndex { order: n });
            }
            let b_n = (rhs - c_a * a_n.clone()) / c_b;
            // compatibility of the other equation
            let other = if a12.mag_f64() >= a22.mag_f64() {
                (b2 - a21 * a_n.clone() - a22 * b_n.clone()).mag_f64()
            } else {
                (b1 - a11 * a_n.clone() - a12 * b_n.clone()).mag_f64()
            };
            let scale = a_n.mag_f64().max(b_n.mag_f64()).max(1.0) * norm.max(1.0);
            if other > 1e-20 * scale {
                return Err(Error::ResonantIndex { order: n });
            }
            self.m.c[n] = a_n;
            self.psi.c[n] = b_n;
            return Ok(());
        }

        if singular {
            return Err(Error::ResonantIndex { order: n });
        }
        let a_n = (b1.clone() * a22.clone() - a12.clone() * b2.clone()) / det.clone();
        let b_n = (a11 * b2 - b1 * a21) / det;
        self.m.c[n] = a_n;
        self.psi.c[n] = b_n;
        Ok(())
    }
}

impl BigC {
    fn zero_c() -> BigC {
        <BigC as num_traits::Zero>::zero()
    }
    fn one_c() -> BigC {
        <BigC as num_traits::One>::one()
    }
}

/// Expand one pole family to `n_terms` relative orders.
pub fn expand_pole_family(
    p: &CglParamsBig,
    lead: &LeadingBehavior,
    n_terms: usize,
) -> Result<LaurentFamily> {
    if n_terms < 2 {
        return Err(Error::InsufficientTerms {
            have: n_terms,
            need: 2,
        });
    }
    let mut solver = OrderSolver::new(
        p,
        lead.leading_exponent,
        -1,
        lead.m0.clone(),
        lead.psi0.clone(),
        n_terms,
    );
    for n in 1..n_terms {
        solver.step(n, None)?;
    }
    Ok(LaurentFamily {
        kind: FamilyKind::PoleOfM,
        equation: lead.equation,
        m: solver.m,
        psi: solver.psi,
        m0: lead.m0.clone(),
        arbitrary: None,
        order: n_terms,
    })
}

/// Expand the zero-of-M family with free constants (arb0, arb1) and branch
/// j = +-i.
pub fn expand_zero_family(
    p: &CglParamsBig,
    equation: Equation,
    j: BigC,
    arb0: BigC,
    arb1: BigC,
    n_terms: usize,
) -> Result<LaurentFamily> {
    if arb0.mag_f64() == 0.0 {
        return Err(Error::InvalidFreeConstant("arb0 must be nonzero".into()));
    }
    if p.csi == Bf::ZERO && arb1.mag_f64() != 0.0 {
        return Err(Error::InvalidFreeConstant(
            "arb1 must vanish when csi = 0".into(),
        ));
    }
    let jj = &j * &j;
    if (jj + BigC::one_c()).mag_f64() > 1e-30 {
        return Err(Error::InvalidFreeConstant("j must satisfy j^2 = -1".into()));
    }
    let half_j = j.clone().scale_real(&(Bf::ONE / Bf::from(2)));
    let mut solver = OrderSolver::new(p, 1, -1, arb0.clone(), half_j, n_terms);
    for n in 1..n_terms {
        if n == 1 {
            // resonant order carrying the second arbitrary constant:
            // 1/M = (1/arb0) x^-1 (1 + arb1 x + ...)  =>  M_1 = -arb0*arb1
            let a1 = -(arb0.clone() * arb1.clone());
            solver.step(n, Some(a1))?;
        } else {
            solver.step(n, None)?;
        }
    }
    Ok(LaurentFamily {
        kind: FamilyKind::ZeroOfM,
        equation,
        m: solver.m,
        psi: solver.psi,
        m0: arb0.clone(),
        arbitrary: Some((arb0, arb1)),
        order: n_terms,
    })
}

/// Largest residual coefficient magnitude after substituting the family into
/// the cleared system.
pub fn series_substitute_residual(p: &CglParamsBig, fam: &LaurentFamily) -> f64 {
    let (e1, e2) = residual_series(p, &fam.m, &fam.psi);
    e1.max_mag().max(e2.max_mag())
}

/// All pole families of the given equation, expanded.
pub fn all_pole_families(
    p: &CglParamsBig,
    equation: Equation,
    n_terms: usize,
) -> Result<Vec<LaurentFamily>> {
    let leads = leading_orders(p, equation)?;
    leads
        .iter()
        .map(|l| expand_pole_family(p, l, n_terms))
        .collect()
}
