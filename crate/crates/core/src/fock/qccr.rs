//! Truncated matrix model of the q²-CCR `αα* − q²α*α = 1 − q²`.
//!
//! `α*` is the weighted right shift `α* e_k = √(1 − q^{2(k+1)}) e_{k+1}` on
//! `span{e_0, ..., e_{D-1}}` and `Γ = 1 − α*α`. The relations hold exactly away
//! from the top level; everything measured here is restricted to the interior
//! block (indices `0..D-1`, excluding the last row and column) unless stated.

use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Rational};

pub type Matrix = DMatrix<f64>;

#[derive(Clone, Debug)]
pub struct QccrModel {
    pub q: Rational,
    pub depth: usize,
    pub alpha: Matrix,
    pub alpha_star: Matrix,
    pub gamma: Matrix,
}

impl QccrModel {
    pub fn q_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::NAN)
    }

    /// `√(1 − q^{2(k+1)})`, the weight of `α*` from level `k` to `k + 1`.
    pub fn shift_weight(&self, k: usize) -> f64 {
        (1.0 - self.q_f64().powi(2 * (k as i32 + 1))).sqrt()
    }

    fn interior(&self, m: &Matrix) -> Matrix {
        let d = self.depth - 1;
        m.view((0, 0), (d, d)).into_owned()
    }
}

/// Builds the canonical weighted-shift model.
pub fn qccr_build(q: &Rational, depth: usize) -> Result<QccrModel> {
    if q.abs() >= Rational::from_integer(1.into()) {
        return Err(Error::InvalidArgument(format!("|q| must be < 1, got {}", format_rational(q))));
    }
    if depth < 4 {
        return Err(Error::InvalidArgument(format!("depth must be at least 4, got {depth}")));
    }
    let qf = q.to_f64().unwrap_or(f64::NAN);
    let mut alpha_star = Matrix::zeros(depth, depth);
    for k in 0..depth - 1 {
        alpha_star[(k + 1, k)] = (1.0 - qf.powi(2 * (k as i32 + 1))).sqrt();
    }
    let alpha = alpha_star.transpose();
    let gamma = Matrix::identity(depth, depth) - &alpha_star * &alpha;
    Ok(QccrModel { q: q.clone(), depth, alpha, alpha_star, gamma })
}

/// Spectral norm (largest singular value).
pub fn operator_norm(m: &Matrix) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn max_abs_entry(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct QccrResiduals {
    /// Interior max-entry residual of `αα* − q²α*α − (1 − q²)`.
    pub ccr_interior: f64,
    /// Interior max-entry residual of `αΓ − q²Γα`.
    pub commutation_interior: f64,
    /// Residual of the CCR on the truncation boundary row/column.
    pub ccr_boundary: f64,
    /// `1 − q^{2D}`, the boundary residual the truncation predicts.
    pub expected_boundary: f64,
    pub alpha_norm: f64,
    pub gamma_norm: f64,
    /// Largest deviation of `Γ` from `diag(q^{2k})`.
    pub gamma_diagonal_error: f64,
}

pub fn qccr_check_relations(m: &QccrModel) -> QccrResiduals {
    let q2 = m.q_f64().powi(2);
    let d = m.depth;
    let id = Matrix::identity(d, d);
    let ccr = &m.alpha * &m.alpha_star - (&m.alpha_star * &m.alpha) * q2 - id * (1.0 - q2);
    let comm = &m.alpha * &m.gamma - (&m.gamma * &m.alpha) * q2;
    let boundary = (0..d)
        .map(|i| ccr[(d - 1, i)].abs().max(ccr[(i, d - 1)].abs()))
        .fold(0.0, f64::max);
    let mut diag = m.gamma.clone();
    for k in 0..d {
        diag[(k, k)] -= q2.powi(k as i32);
    }
    QccrResiduals {
        ccr_interior: max_abs_entry(&m.interior(&ccr)),
        commutation_interior: max_abs_entry(&m.interior(&comm)),
        ccr_boundary: boundary,
        expected_boundary: 1.0 - q2.powi(d as i32),
        alpha_norm: operator_norm(&m.alpha),
        gamma_norm: operator_norm(&m.gamma),
        gamma_diagonal_error: max_abs_entry(&diag),
    }
}

/// `(1 − c Γ)^{-1}` by LU solve.
fn resolvent_direct(m: &QccrModel, c: f64) -> Result<Matrix> {
    let d = m.depth;
    let a = Matrix::identity(d, d) - &m.gamma * c;
    a.lu()
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned(format!("1 - {c}·Γ is singular")))
}

/// `(1 − c Γ)^{-1} = Σ_n (cΓ)^n`, summed until the terms drop below `1e-17`.
fn resolvent_neumann(m: &QccrModel, c: f64) -> Result<Matrix> {
    let d = m.depth;
    let step = &m.gamma * c;
    let mut term = Matrix::identity(d, d);
    let mut sum = term.clone();
    for _ in 0..10_000 {
        term = &term * &step;
        let size = max_abs_entry(&term);
        sum += &term;
        if size < 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::IllConditioned(format!("Neumann series for c = {c} did not converge")))
}

#[derive(Clone, Debug)]
pub struct Projections {
    /// `P_0, ..., P_{k_max + 1}`.
    pub p: Vec<Matrix>,
    /// `E_k = P_k − P_{k+1}` for `k = 0..=k_max`.
    pub e: Vec<Matrix>,
    /// Largest entrywise gap between the direct and Neumann resolvents.
    pub neumann_gap: f64,
}

/// `P_k = α*^k (1 − q²Γ)^{-1} ⋯ (1 − q^{2k}Γ)^{-1} α^k`, `P_0 = 1`, and
/// `E_k = P_k − P_{k+1}`.
pub fn qccr_projections(m: &QccrModel, k_max: usize) -> Result<Projections> {
    if 2 * (k_max + 2) > m.depth {
        return Err(Error::InvalidArgument(format!(
            "k_max + 2 = {} exceeds depth/2 = {}",
            k_max + 2,
            m.depth / 2
        )));
    }
    let d = m.depth;
    let q2 = m.q_f64().powi(2);
    let mut p = vec![Matrix::identity(d, d)];
    let mut neumann_gap = 0.0f64;
    // chain[k] = (1 − q²Γ)^{-1} ⋯ (1 − q^{2k}Γ)^{-1}
    let mut chain = Matrix::identity(d, d);
    let mut alpha_pow = Matrix::identity(d, d);
    let mut alpha_star_pow = Matrix::identity(d, d);
    for k in 1..=k_max + 1 {
        let c = q2.powi(k as i32);
        let direct = resolvent_direct(m, c)?;
        let series = resolvent_neumann(m, c)?;
        neumann_gap = neumann_gap.max(max_abs_entry(&(&direct - &series)));
        chain = &chain * &direct;
        alpha_pow = &alpha_pow * &m.alpha;
        alpha_star_pow = &alpha_star_pow * &m.alpha_star;
        p.push(&alpha_star_pow * &chain * &alpha_pow);
    }
    let e = (0..=k_max).map(|k| &p[k] - &p[k + 1]).collect();
    Ok(Projections { p, e, neumann_gap })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    /// `max_k ‖P_k² − P_k‖`.
    pub idempotence: f64,
    /// Most negative eigenvalue of any `P_k − P_{k+1}` (clamped at 0).
    pub monotonicity: f64,
    /// `max_{k≠l} ‖E_k E_l‖`.
    pub orthogonality: f64,
    /// Largest entrywise deviation of `E_k` from `e_k e_k*`.
    pub basis_error: f64,
    pub neumann_gap: f64,
}

pub fn projection_report(proj: &Projections) -> ProjectionReport {
    let idempotence = proj
        .p
        .iter()
        .map(|p| operator_norm(&(p * p - p)))
        .fold(0.0, f64::max);
    let monotonicity = proj
        .e
        .iter()
        .map(|e| {
            let sym = (e + e.transpose()) * 0.5;
            let min = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
            (-min).max(0.0)
        })
        .fold(0.0, f64::max);
    let mut orthogonality = 0.0f64;
    for (k, ek) in proj.e.iter().enumerate() {
        for (l, el) in proj.e.iter().enumerate() {
            if k != l {
                orthogonality = orthogonality.max(operator_norm(&(ek * el)));
            }
        }
    }
    let basis_error = proj
        .e
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut diff = e.clone();
            diff[(k, k)] -= 1.0;
            max_abs_entry(&diff)
        })
        .fold(0.0, f64::max);
    ProjectionReport { idempotence, monotonicity, orthogonality, basis_error, neumann_gap: proj.neumann_gap }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// Interior operator-norm error of `Γ − Σ_{k≤K} E_k q^{2k}`.
    pub norm_error: f64,
    /// The tail estimate `q^{2(K+1)}`.
    pub tail_bound: f64,
    /// Largest deviation from the inverse-pair-of-unitaries identities between
    /// consecutive `E_k H` and `E_{k+1} H`.
    pub shift_error: f64,
}

/// Rebuilds `Γ` from the projections and checks that the normalized shifts
/// `α*/√(1 − q^{2(k+1)})` and `α/√(1 − q^{2(k+1)})` move `E_k H ↔ E_{k+1} H`
/// isometrically and invert each other.
pub fn qccr_reconstruct_gamma(m: &QccrModel, e: &[Matrix], k: usize) -> Result<Reconstruction> {
    if e.len() < k + 1 {
        return Err(Error::InvalidArgument(format!("need {} projections, got {}", k + 1, e.len())));
    }
    let q2 = m.q_f64().powi(2);
    let mut sum = Matrix::zeros(m.depth, m.depth);
    for (j, ej) in e.iter().take(k + 1).enumerate() {
        sum += ej * q2.powi(j as i32);
    }
    let norm_error = operator_norm(&m.interior(&(&m.gamma - sum)));
    let mut shift_error = 0.0f64;
    for j in 0..e.len().saturating_sub(1) {
        let w = m.shift_weight(j);
        let up = &m.alpha_star * &e[j] / w; // E_j H → E_{j+1} H
        let down = &m.alpha * &e[j + 1] / w; // E_{j+1} H → E_j H
        let checks = [
            &e[j + 1] * &up - &up,
            up.transpose() * &up - &e[j],
            &down * &up - &e[j],
            &up * &down - &e[j + 1],
        ];
        for c in &checks {
            shift_error = shift_error.max(max_abs_entry(c));
        }
    }
    Ok(Reconstruction { norm_error, tail_bound: q2.powi(k as i32 + 1), shift_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn build_rejects_bad_parameters() {
        assert!(qccr_build(&rat(1, 1), 8).is_err());
        assert!(qccr_build(&rat(-3, 2), 8).is_err());
        assert!(qccr_build(&rat(1, 2), 3).is_err());
    }

    #[test]
    fn q_zero_is_pure_shift() {
        let m = qccr_build(&rat(0, 1), 8).unwrap();
        for k in 0..7 {
            assert_eq!(m.alpha_star[(k + 1, k)], 1.0);
        }
        let r = qccr_check_relations(&m);
        assert_eq!(r.ccr_interior, 0.0);
        assert_eq!(m.gamma[(0, 0)], 1.0);
        assert_eq!(m.gamma[(1, 1)], 0.0);
    }

    #[test]
    fn gamma_is_diagonal_powers() {
        let m = qccr_build(&rat(1, 2), 16).unwrap();
        for k in 0..16 {
            assert!((m.gamma[(k, k)] - 0.25f64.powi(k as i32)).abs() <= 1e-12);
        }
        let r = qccr_check_relations(&m);
        assert!(r.gamma_diagonal_error <= 1e-12);
        assert!(r.alpha_norm <= 1.0 + 1e-12 && r.gamma_norm <= 1.0 + 1e-12);
    }

    #[test]
    fn relations_hold_in_the_interior() {
        for q in [rat(1, 4), rat(1, 2), rat(3, 4), rat(-1, 2)] {
            let m = qccr_build(&q, 20).unwrap();
            let r = qccr_check_relations(&m);
            assert!(r.ccr_interior <= 1e-12, "{r:?}");
            assert!(r.commutation_interior <= 1e-12, "{r:?}");
            assert!((r.ccr_boundary - r.expected_boundary).abs() <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn projections_are_spectral() {
        let m = qccr_build(&rat(1, 2), 32).unwrap();
        let proj = qccr_projections(&m, 6).unwrap();
        assert_eq!(proj.p[0], Matrix::identity(32, 32));
        let r = projection_report(&proj);
        assert!(r.idempotence <= 1e-9, "{r:?}");
        assert!(r.monotonicity <= 1e-9, "{r:?}");
        assert!(r.orthogonality <= 1e-9, "{r:?}");
        assert!(r.basis_error <= 1e-9, "{r:?}");
        assert!(r.neumann_gap <= 1e-10, "{r:?}");
        assert!(qccr_projections(&m, 15).is_err());
    }

    #[test]
    fn gamma_reconstruction() {
        let m = qccr_build(&rat(1, 2), 32).unwrap();
        let proj = qccr_projections(&m, 6).unwrap();
        let rec = qccr_reconstruct_gamma(&m, &proj.e, 6).unwrap();
        assert!(rec.norm_error <= 2f64.powi(-14) + 1e-9, "{rec:?}");
        assert!(rec.shift_error <= 1e-9, "{rec:?}");
        let rec0 = qccr_reconstruct_gamma(&m, &proj.e, 0).unwrap();
        assert!((rec0.norm_error - 0.25).abs() <= 1e-9, "{rec0:?}");
    }

    #[test]
    fn q_zero_projections_are_shift_differences() {
        let m = qccr_build(&rat(0, 1), 16).unwrap();
        let proj = qccr_projections(&m, 4).unwrap();
        let mut a_pow = Matrix::identity(16, 16);
        let mut s_pow = Matrix::identity(16, 16);
        for k in 0..=4 {
            let next_a = &a_pow * &m.alpha;
            let next_s = &s_pow * &m.alpha_star;
            let expect = &s_pow * &a_pow - &next_s * &next_a;
            assert!(max_abs_entry(&(&proj.e[k] - expect)) <= 1e-12);
            a_pow = next_a;
            s_pow = next_s;
        }
        assert!(max_abs_entry(&(&m.gamma - &proj.e[0])) <= 1e-12);
    }
}
