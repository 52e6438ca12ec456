//! First-order algebraic constraint fitting: build the m-th degree ansatz
//! F(u, u') = sum a_{j,k} u^j u'^k (k <= m, j <= 2m-2k, a_{0,m} = 1), impose
//! every Laurent family order by order, and solve the resulting linear
//! overdetermined system for the coefficients by a rank-revealing
//! decomposition in extended precision.
//!
//! A one-dimensional null space is the signature of a genuine first-order
//! constraint; nullity zero ("no such constraint") is a first-class outcome,
//! not an error.

use dashu::base::SquareRoot;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::bigc::{bf_to_f64, Bf, BigC};
use crate::error::{Error, Result};
use crate::laurent::{all_pole_families, CglParamsBig, Equation, LaurentFamily};
use crate::series::{Coeff, Series};

/// Ansatz index set: (j, k) with 0 <= k <= m, 0 <= j <= 2m - 2k, ordered by
/// k then j. The normalization slot is (0, m), the pure u'^m monomial.
pub fn ansatz_indices(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..=m {
        for j in 0..=(2 * m - 2 * k) {
            out.push((j, k));
        }
    }
    out
}

/// Coefficient set of one fitted (or built-in) constraint polynomial.
#[derive(Clone, Debug, Serialize)]
pub struct SubequationAnsatz {
    pub m: usize,
    /// Coefficients aligned with `ansatz_indices(m)`.
    pub coeffs: Vec<C64>,
}

impl SubequationAnsatz {
    /// Evaluate F(u, u') at a numeric jet.
    pub fn eval(&self, u: C64, du: C64) -> C64 {
        let idx = ansatz_indices(self.m);
        let mut acc = C64::new(0.0, 0.0);
        for (c, (j, k)) in self.coeffs.iter().zip(idx.iter()) {
            acc += c * u.powu(*j as u32) * du.powu(*k as u32);
        }
        acc
    }

    /// Largest monomial magnitude, for residual scaling.
    pub fn scale(&self, u: C64, du: C64) -> f64 {
        let idx = ansatz_indices(self.m);
        let mut s: f64 = 1.0;
        for (c, (j, k)) in self.coeffs.iter().zip(idx.iter()) {
            s = s.max((c * u.powu(*j as u32) * du.powu(*k as u32)).norm());
        }
        s
    }
}

/// Dense row-major extended-precision matrix.
#[derive(Clone)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<BigC>,
}

impl Matrix {
    fn at(&self, r: usize, c: usize) -> &BigC {
        &self.a[r * self.cols + c]
    }
}

/// Report of the rank-revealing solve.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub m: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub nullity: usize,
    /// Singular values as ratios sigma_i / sigma_max, descending.
    pub singular_ratios: Vec<f64>,
    pub sigma_max: f64,
    /// Normalized null vector (a_{0,m} = 1) when nullity >= 1.
    pub solution: Option<SubequationAnsatz>,
    /// ||A v|| / (||A||_F ||v||) of the returned vector.
    pub residual_of_fit: f64,
}

/// One row block per family: the coefficient of each ansatz monomial in the
/// expansion of F along that family, at relative orders 0..=j_max.
pub fn build_linear_system(
    families: &[LaurentFamily],
    m: usize,
    j_max: usize,
) -> Result<Matrix> {
    assert!(!families.is_empty(), "need at least one family");
    let idx = ansatz_indices(m);
    let cols = idx.len();
    let mut rows_data: Vec<Vec<BigC>> = Vec::new();
    for fam in families {
        let n_have = fam.m.rel_len();
        let need = j_max + 1;
        if n_have < need {
            return Err(Error::InsufficientTerms {
                have: n_have,
                need,
            });
        }
        let u = &fam.m;
        let du = u.derivative();
        // power tables
        let mut u_pows: Vec<Series<BigC>> = Vec::with_capacity(2 * m + 1);
        let one = Series::from_coeffs(0, {
            let mut v = vec![BigC::zero_big(); u.rel_len()];
            v[0] = BigC::one_big();
            v
        });
        u_pows.push(one.clone());
        for j in 1..=(2 * m) {
            let prev = &u_pows[j - 1];
            u_pows.push(prev.mul(u));
        }
        let mut du_pows: Vec<Series<BigC>> = Vec::with_capacity(m + 1);
        du_pows.push(one);
        for k in 1..=m {
            let prev = &du_pows[k - 1];
            du_pows.push(prev.mul(&du));
        }
        // base exponent: the most singular monomial over the index set
        let base = idx
            .iter()
            .map(|&(j, k)| u_pows[j].val * (j > 0) as i64 + du_pows[k].val * (k > 0) as i64)
            .min()
            .unwrap();
        // monomial series, all re-read against the common base
        let monos: Vec<Series<BigC>> = idx
            .iter()
            .map(|&(j, k)| u_pows[j].mul(&du_pows[k]))
            .collect();
        for t in 0..=j_max {
            let power = base + t as i64;
            let mut row = Vec::with_capacity(cols);
            for mono in &monos {
                row.push(mono.coeff(power));
            }
            rows_data.push(row);
        }
    }
    // scale rows to unit max magnitude; drop rows that are entirely zero
    let mut a = Vec::new();
    let mut rows = 0;
    for row in rows_data {
        let mx = row.iter().map(|c| c.mag()).fold(0.0f64, f64::max);
        if mx == 0.0 {
            continue;
        }
        let inv = BigC::from_f64(1.0 / mx, 0.0, 64);
        for c in row {
            a.push(c * inv.clone());
        }
        rows += 1;
    }
    Ok(Matrix { rows, cols, a })
}

impl BigC {
    fn zero_big() -> BigC {
        <BigC as num_traits::Zero>::zero()
    }
    fn one_big() -> BigC {
        <BigC as num_traits::One>::one()
    }
}

/// One-sided Jacobi orthogonalization of the columns; returns (singular
/// values descending, right singular vectors as columns of V).
fn jacobi_svd(mat: &Matrix, bits: usize) -> (Vec<Bf>, Vec<Vec<BigC>>) {
    let (rows, cols) = (mat.rows, mat.cols);
    // working copy of columns
    let mut a: Vec<Vec<BigC>> = (0..cols)
        .map(|c| (0..rows).map(|r| mat.at(r, c).clone()).collect())
        .collect();
    let mut v: Vec<Vec<BigC>> = (0..cols)
        .map(|c| {
            (0..cols)
                .map(|r| {
                    if r == c {
                        BigC::from_f64(1.0, 0.0, bits)
                    } else {
                        BigC::from_f64(0.0, 0.0, bits)
                    }
                })
                .collect()
        })
        .collect();
    let col_dot = |x: &[BigC], y: &[BigC]| -> BigC {
        let mut acc = BigC::from_f64(0.0, 0.0, bits);
        for (xi, yi) in x.iter().zip(y.iter()) {
            acc = acc + xi.conj() * yi.clone();
        }
        acc
    };
    let eps2 = {
        // convergence once |<p,q>|^2 <= eps^2 |p|^2 |q|^2 at ~working precision
        let e = 2.0f64.powi(-((bits as i32) - 16));
        e * e
    };
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let hpq = col_dot(&a[p], &a[q]);
                let hpp = col_dot(&a[p], &a[p]).re;
                let hqq = col_dot(&a[q], &a[q]).re;
                let hpq2 = hpq.norm_sqr();
                let bound = &hpp * &hqq;
                if bf_to_f64(&hpq2) == 0.0
                    || hpq2 <= bound.clone() * Bf::try_from(eps2).unwrap()
                {
                    continue;
                }
                rotated = true;
                // phase that makes the cross term real
                let habs = hpq2.sqrt();
                let u = BigC {
                    re: &hpq.re / &habs,
                    im: &hpq.im / &habs,
                };
                // real 2x2 rotation on (a_p, conj(u) a_q)
                let tau = (&hqq - &hpp) / (Bf::from(2) * &habs);
                let tau_f = bf_to_f64(&tau);
                let t = {
                    // sign(tau) / (|tau| + sqrt(1 + tau^2))
                    let root = (Bf::ONE + tau.sqr()).sqrt();
                    let denom = if tau_f >= 0.0 {
                        &tau + &root
                    } else {
                        -(&root - &tau)
                    };
                    Bf::ONE / denom
                };
                let c = Bf::ONE / (Bf::ONE + t.sqr()).sqrt();
                let s = &c * &t;
                let uc = u.conj();
                for r in 0..rows {
                    let ap = a[p][r].clone();
                    let aq = uc.clone() * a[q][r].clone();
                    a[p][r] = ap.clone().scale_real(&c) - aq.clone().scale_real(&s);
                    let bq = ap.scale_real(&s) + aq.scale_real(&c);
                    a[q][r] = u.clone() * bq;
                }
                for r in 0..cols {
                    let vp = v[p][r].clone();
                    let vq = uc.clone() * v[q][r].clone();
                    v[p][r] = vp.clone().scale_real(&c) - vq.clone().scale_real(&s);
                    let bq = vp.scale_real(&s) + vq.scale_real(&c);
                    v[q][r] = u.clone() * bq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigmas: Vec<Bf> = a.iter().map(|col| col_dot(col, col).re.sqrt()).collect();
    (sigmas, v)
}

/// Rank, nullity and (when nullity >= 1) the normalized null vector of the
/// overdetermined system, via singular-value thresholding at 1e-30 sigma_max.
pub fn solve_nullspace(mat: &Matrix, m: usize, bits: usize) -> FitReport {
    let (sigmas, v) = jacobi_svd(mat, bits);
    let cols = mat.cols;
    let idx = ansatz_indices(m);
    let sigma_f: Vec<f64> = sigmas.iter().map(bf_to_f64).collect();
    let sigma_max = sigma_f.iter().cloned().fold(0.0f64, f64::max);
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma_f[j].total_cmp(&sigma_f[i]));
    let ratios: Vec<f64> = order
        .iter()
        .map(|&i| {
            if sigma_max > 0.0 {
                sigma_f[i] / sigma_max
            } else {
                0.0
            }
        })
        .collect();
    let thresh = 1e-30 * sigma_max;
    let rank = sigma_f.iter().filter(|&&s| s > thresh).count();
    let nullity = cols - rank;
    let mut solution = None;
    let mut residual_of_fit = f64::NAN;
    if nullity >= 1 {
        let imin = *order.last().unwrap();
        let null_col: Vec<BigC> = (0..cols).map(|r| v[imin][r].clone()).collect();
        // normalize on the (0, m) slot
        let norm_slot = idx.iter().position(|&(j, k)| j == 0 && k == m).unwrap();
        let pivot = null_col[norm_slot].clone();
        let max_entry = null_col.iter().map(|c| c.mag()).fold(0.0f64, f64::max);
        if pivot.mag() > 1e-12 * max_entry {
            let coeffs: Vec<C64> = null_col
                .iter()
                .map(|c| (c.clone() / pivot.clone()).to_c64())
                .collect();
            // residual of A v against scales
            let mut num = Bf::ZERO;
            let mut den = Bf::ZERO;
            for r in 0..mat.rows {
                let mut acc = BigC::from_f64(0.0, 0.0, bits);
                for c in 0..cols {
                    acc = acc + mat.at(r, c).clone() * null_col[c].clone();
                }
                num += acc.norm_sqr();
                for c in 0..cols {
                    den += mat.at(r, c).norm_sqr();
                }
            }
            let vnorm: Bf = null_col.iter().map(|c| c.norm_sqr()).fold(Bf::ZERO, |a, b| a + b);
            residual_of_fit =
                bf_to_f64(&(num.sqrt() / (den.sqrt() * vnorm.sqrt())));
            solution = Some(SubequationAnsatz { m, coeffs });
        }
    }
    FitReport {
        m,
        rows: mat.rows,
        cols,
        rank,
        nullity,
        singular_ratios: ratios,
        sigma_max,
        solution,
        residual_of_fit,
    }
}

/// End-to-end fit: leading orders -> family expansion -> linear system ->
/// nullspace, over the full set of pole families (or a subset).
pub fn fit_subequation(
    params: &CglParamsBig,
    equation: Equation,
    m: usize,
) -> Result<FitReport> {
    fit_subequation_subset(params, equation, m, None)
}

/// Same, restricted to the families selected by `subset` (indices into the
/// family list in leading-order enumeration order).
pub fn fit_subequation_subset(
    params: &CglParamsBig,
    equation: Equation,
    m: usize,
    subset: Option<&[usize]>,
) -> Result<FitReport> {
    let j_max = (m + 1) * (m + 1) + 4;
    let p_lead = match equation {
        Equation::Cgl5 => -1i64,
        Equation::Cgl3 => -2i64,
    };
    let n_terms = j_max + (m as i64 * (1 - p_lead)) as usize + 2;
    let fams = all_pole_families(params, equation, n_terms)?;
    let chosen: Vec<LaurentFamily> = match subset {
        None => fams,
        Some(ids) => ids.iter().map(|&i| fams[i].clone()).collect(),
    };
    let mat = build_linear_system(&chosen, m, j_max)?;
    Ok(solve_nullspace(&mat, m, params.bits))
}

/// The quartic constraint satisfied by M on the constrained parameter slice,
/// as explicit monomial coefficients (normalized by the u'^4 slot):
///   u'^4: 1                     u u'^3: -2 csi
///   u^2 u'^2: 72 ex             u'^2:   -864 ex ey / e_i
///   u^8: -e_i^2/81              u^6:    (16/9) e_i ey
///   u^4: -648 ex^2 - (256/3) ey^2
///   u^2: 15552 ex^2 ey / e_i + (4096/3) ey^3 / e_i
///   1:   104976 ex^4 / e_i^2 + 186624 ex^2 ey^2 / e_i^2
pub fn quartic_slice_ansatz(ex: f64, ey: f64, e_i: f64, csi: f64) -> SubequationAnsatz {
    let m = 4;
    let idx = ansatz_indices(m);
    let mut coeffs = vec![C64::new(0.0, 0.0); idx.len()];
    let mut set = |j: usize, k: usize, v: f64| {
        let slot = idx.iter().position(|&(jj, kk)| jj == j && kk == k).unwrap();
        coeffs[slot] = C64::new(v, 0.0);
    };
    set(0, 4, 1.0);
    set(1, 3, -2.0 * csi);
    set(2, 2, 72.0 * ex);
    set(0, 2, -864.0 * ex * ey / e_i);
    set(8, 0, -e_i * e_i / 81.0);
    set(6, 0, 16.0 / 9.0 * e_i * ey);
    set(4, 0, -648.0 * ex * ex - 256.0 / 3.0 * ey * ey);
    set(2, 0, 15552.0 * ex * ex * ey / e_i + 4096.0 / 3.0 * ey.powi(3) / e_i);
    set(
        0,
        0,
        104976.0 * ex.powi(4) / (e_i * e_i) + 186624.0 * ex * ex * ey * ey / (e_i * e_i),
    );
    SubequationAnsatz { m, coeffs }
}

/// Residual and scale of the quartic slice constraint at a numeric jet.
pub fn quartic_slice_residual(
    ex: f64,
    ey: f64,
    e_i: f64,
    csi: f64,
    m: C64,
    m1: C64,
) -> (C64, f64) {
    let a = quartic_slice_ansatz(ex, ey, e_i, csi);
    (a.eval(m, m1), a.scale(m, m1))
}

/// Residual and scale of the quartic constraint satisfied by psi on the
/// slice (degree four in psi'; drops to degree two when csi = 0).
pub fn psi_slice_residual(ex: f64, ey: f64, csi: f64, psi: C64, dpsi: C64) -> (C64, f64) {
    let p = psi;
    let q = dpsi;
    let terms = [
        csi * q.powu(4),
        -4.0 * csi * q.powu(3) * (csi * p + 24.0 * ey),
        8.0 * q.powu(2)
            * (-csi * (27.0 * ex * ex - 324.0 * ey * ey)
                + 1440.0 * ex * ey * p
                + 27.0 * csi * ex * p.powu(2)
                + 16.0 * ey * p.powu(3)
                + csi / 3.0 * p.powu(4)),
        16.0 * (-csi / 3.0 * p.powu(8)
            - 32.0 / 3.0 * ey * p.powu(7)
            - 26.0 * csi * ex * p.powu(6)
            - 1632.0 * ex * ey * p.powu(5)
            - (477.0 * ex * ex + 552.0 * ey * ey) * p.powu(4)
            - 288.0 * (165.0 * ex * ex + 4.0 * ey * ey) * p.powu(3)
            + csi * (2106.0 * ex * ex - 31320.0 * ey * ey) * p.powu(2)
            + 93312.0 * (ex * ex - 4.0 * ey * ey) * ex * ey * p
            + 243.0
                * (-9.0 * ex.powi(4) + 56.0 * ex * ex * ey * ey - 144.0 * ey.powi(4))),
    ];
    let sum: C64 = terms.iter().sum();
    let scale = terms.iter().map(|t| t.norm()).fold(1.0f64, f64::max);
    (sum, scale)
}

/// Residual and scale of the cubic (trinomial) constraint satisfied by the
/// logarithmic derivative of the reduced amplitude on the slice.
pub fn dlog_slice_residual(ey: f64, csi: f64, d: C64, d1: C64) -> (C64, f64) {
    let i = C64::new(0.0, 1.0);
    let t1 = (2.0 * d1 + csi * d + 24.0 * i * ey) * (d1 - csi * d - 24.0 * i * ey).powu(2);
    let inner = 16.0 * (4.0 * d.powu(3) - 3.0 * csi * d.powu(2))
        - 9.0 * (csi * csi + 64.0 * i * ey) * (4.0 * d + csi);
    let t2 = inner * inner / 2048.0;
    let sum = t1 + t2;
    let scale = t1.norm().max(t2.norm()).max(1.0);
    (sum, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CglParams;

    #[test]
    fn index_set_count() {
        // m = 4: sum over k of (2m - 2k + 1) = 9 + 7 + 5 + 3 + 1 = 25
        assert_eq!(ansatz_indices(4).len(), 25);
        assert_eq!(ansatz_indices(2).len(), 9);
    }

    fn slice_params_big(ex: f64, ey: f64, e_i: f64, bits: usize) -> CglParamsBig {
        use crate::bigc::bf;
        let mut p = CglParamsBig::from_params(
            &CglParams {
                e_r: 0.0,
                e_i,
                d_r: 0.0,
                d_i: 0.0,
                g_r: 36.0 * ey,
                g_i: -9.0 * ex,
                csi: 0.0,
                s_r: 0.0,
                s_i: 0.0,
            },
            bits,
        );
        p.csi = (bf(48.0, bits) * bf(ex, bits)).sqrt();
        p
    }

    #[test]
    fn leading_row_encodes_balance() {
        // row t = 0 of the linear system: a_{j,k} weight is u0^j (p u0)^k for
        // the maximal monomials j + 2k = 2m, zero otherwise (p = -1 here)
        let bits = 192;
        let p = slice_params_big(1.0, 1.0, 2.0, bits);
        let fams = all_pole_families(&p, Equation::Cgl5, 16).unwrap();
        let fam = &fams[0];
        let mat = build_linear_system(&fams[..1], 4, 8).unwrap();
        let idx = ansatz_indices(4);
        let m0 = fam.m0.to_c64();
        // reconstruct the unscaled first row via the known scaling: compare
        // ratios of entries instead of absolute values
        let row0: Vec<C64> = (0..mat.cols).map(|c| mat.at(0, c).to_c64()).collect();
        let expect: Vec<C64> = idx
            .iter()
            .map(|&(j, k)| {
                if j + 2 * k == 8 {
                    m0.powu(j as u32) * (-m0).powu(k as u32)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        // proportionality
        let (mut num, mut den) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (a, b) in row0.iter().zip(expect.iter()) {
            num += a * b.conj();
            den += b * b.conj();
        }
        let lam = num / den;
        for (a, b) in row0.iter().zip(expect.iter()) {
            assert!((a - lam * b).norm() < 1e-12 * (1.0 + (lam * b).norm()));
        }
    }

    #[test]
    fn duplicate_row_leaves_rank_unchanged() {
        let bits = 192;
        let p = slice_params_big(1.0, 1.0, 2.0, bits);
        let fams = all_pole_families(&p, Equation::Cgl5, 16).unwrap();
        let mat = build_linear_system(&fams[..1], 2, 6).unwrap();
        let rep = solve_nullspace(&mat, 2, bits);
        let mut dup = mat.clone();
        dup.a.extend_from_slice(&mat.a[..mat.cols].to_vec());
        dup.rows += 1;
        let rep2 = solve_nullspace(&dup, 2, bits);
        assert_eq!(rep.rank, rep2.rank);
    }

    #[test]
    fn slice_fit_recovers_quartic() {
        let bits = crate::bigc::digits_to_bits(60);
        let (ex, ey, e_i) = (1.0, 1.0, 2.0);
        let p = slice_params_big(ex, ey, e_i, bits);
        let t0 = std::time::Instant::now();
        let rep = fit_subequation(&p, Equation::Cgl5, 4).unwrap();
        let dt = t0.elapsed();
        assert_eq!(rep.nullity, 1, "ratios: {:?}", &rep.singular_ratios);
        let sol = rep.solution.as_ref().unwrap();
        let csi = 48f64.sqrt();
        let target = quartic_slice_ansatz(ex, ey, e_i, csi);
        let smax = target.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (got, want) in sol.coeffs.iter().zip(target.coeffs.iter()) {
            assert!(
                (got - want).norm() <= 1e-8 * smax.max(want.norm()),
                "coefficient {got} vs {want}"
            );
        }
        assert!(rep.residual_of_fit < 1e-40);
        assert!(dt.as_secs() < 60, "fit took {dt:?}");
    }

    #[test]
    fn single_family_fit_is_underdetermined() {
        let bits = crate::bigc::digits_to_bits(50);
        let p = slice_params_big(1.0, 1.0, 2.0, bits);
        let j_max = 29;
        let fams = all_pole_families(&p, Equation::Cgl5, j_max + 11).unwrap();
        let mat = build_linear_system(&fams[..1], 4, j_max).unwrap();
        let rep = solve_nullspace(&mat, 4, bits);
        assert!(
            rep.nullity > 1,
            "single family should underdetermine, nullity = {}",
            rep.nullity
        );
    }

    #[test]
    fn generic_params_have_no_quartic_constraint() {
        let bits = crate::bigc::digits_to_bits(50);
        let p = CglParamsBig::from_params(
            &CglParams {
                e_r: 0.13,
                e_i: 1.7,
                d_r: -0.21,
                d_i: 0.4,
                g_r: 0.9,
                g_i: -0.33,
                csi: 0.77,
                s_r: 0.0,
                s_i: 0.0,
            },
            bits,
        );
        let rep = fit_subequation(&p, Equation::Cgl5, 4).unwrap();
        assert_eq!(rep.nullity, 0, "ratios: {:?}", &rep.singular_ratios);
        assert!(rep.solution.is_none());
    }

    #[test]
    fn cgl3_two_family_pipeline_runs() {
        let bits = crate::bigc::digits_to_bits(50);
        let p = CglParamsBig::from_params(
            &CglParams {
                e_r: 0.0,
                e_i: 0.0,
                d_r: 0.3,
                d_i: 1.1,
                g_r: 0.5,
                g_i: -0.2,
                csi: 0.9,
                s_r: 0.0,
                s_i: 0.0,
            },
            bits,
        );
        let rep = fit_subequation(&p, Equation::Cgl3, 2).unwrap();
        assert_eq!(rep.cols, 9);
        assert!(rep.rank <= 9);
    }
}
