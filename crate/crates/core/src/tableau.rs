//! Explicit Runge-Kutta tableaus for multistep Frank-Wolfe.
//!
//! A `q`-stage scheme is described by a strictly lower triangular stage
//! matrix `A`, combination weights `beta` summing to one, and stage time
//! offsets `omega` with `omega[0] = 0`. At iteration `k` stage `i` uses the
//! mixing coefficient `c / (c + k + omega[i])`.
//!
//! Besides the schemes themselves this module computes the feasibility
//! certificate `z = q P β` with `P = Γ (I + AᵀΓ)⁻¹`, and the constants of the
//! `O(1/k)` upper bound that every scheme enjoys.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BETA_SUM_TOL: f64 = 1e-12;

/// Names accepted by [`Tableau::builtin`].
pub const BUILTIN_NAMES: [&str; 5] = ["euler", "midpoint", "rk4", "rk38", "rk5"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableauDoc", into = "TableauDoc")]
pub struct Tableau {
    a: DMatrix<f64>,
    beta: DVector<f64>,
    omega: DVector<f64>,
}

/// JSON layout: `{"A": [[..], ..], "beta": [..], "omega": [..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableauDoc {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    beta: Vec<f64>,
    omega: Vec<f64>,
}

impl TryFrom<TableauDoc> for Tableau {
    type Error = Error;

    fn try_from(doc: TableauDoc) -> Result<Self> {
        let q = doc.beta.len();
        if doc.a.len() != q || doc.a.iter().any(|row| row.len() != q) {
            return Err(Error::Tableau(format!("A must be {q}x{q}")));
        }
        let a = DMatrix::from_fn(q, q, |i, j| doc.a[i][j]);
        Tableau::new(a, DVector::from_vec(doc.beta), DVector::from_vec(doc.omega))
    }
}

impl From<Tableau> for TableauDoc {
    fn from(t: Tableau) -> Self {
        let q = t.stages();
        TableauDoc {
            a: (0..q).map(|i| (0..q).map(|j| t.a[(i, j)]).collect()).collect(),
            beta: t.beta.iter().copied().collect(),
            omega: t.omega.iter().copied().collect(),
        }
    }
}

/// Feasibility certificate at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub z: DVector<f64>,
    pub k: usize,
    pub c: f64,
    /// Every entry of `z` lies in `[0, 1]`.
    pub in_unit_interval: bool,
}

/// Constants of the `h(x⁽ᵏ⁾) ≤ h₀ / (k + 1)` bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateConstants {
    pub p_max: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub h0: f64,
    pub q: usize,
    pub c: f64,
    pub smoothness: f64,
    pub diameter: f64,
    pub max_abs_a: f64,
}

impl RateConstants {
    /// `h₀ / (k + 1)`.
    pub fn bound(&self, k: usize) -> f64 {
        self.h0 / (k as f64 + 1.0)
    }
}

impl Tableau {
    /// Builds and validates a tableau.
    pub fn new(a: DMatrix<f64>, beta: DVector<f64>, omega: DVector<f64>) -> Result<Self> {
        let t = Tableau { a, beta, omega };
        t.validate()?;
        Ok(t)
    }

    fn from_rows(a: &[&[f64]], beta: &[f64], omega: &[f64]) -> Self {
        let q = beta.len();
        Tableau {
            a: DMatrix::from_fn(q, q, |i, j| a[i][j]),
            beta: DVector::from_row_slice(beta),
            omega: DVector::from_row_slice(omega),
        }
    }

    /// Checks the structural invariants, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let q = self.beta.len();
        if q == 0 {
            return Err(Error::Tableau("no stages".into()));
        }
        if self.a.shape() != (q, q) || self.omega.len() != q {
            return Err(Error::Tableau(format!(
                "shape mismatch: A is {:?}, beta has {q}, omega has {}",
                self.a.shape(),
                self.omega.len()
            )));
        }
        if self.a.iter().chain(&self.beta).chain(&self.omega).any(|v| !v.is_finite()) {
            return Err(Error::Tableau("non-finite coefficient".into()));
        }
        let sum: f64 = self.beta.sum();
        if (sum - 1.0).abs() > BETA_SUM_TOL {
            return Err(Error::Tableau(format!("beta sum is {sum}, expected 1")));
        }
        for i in 0..q {
            for j in i..q {
                if self.a[(i, j)] != 0.0 {
                    return Err(Error::Tableau(format!(
                        "A is not strictly lower triangular (A[{i}][{j}] = {})",
                        self.a[(i, j)]
                    )));
                }
            }
        }
        if self.omega[0] != 0.0 {
            return Err(Error::Tableau(format!("omega[0] is {}, expected 0", self.omega[0])));
        }
        if let Some(w) = self.omega.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::Tableau(format!("omega entry {w} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let t = match name {
            "euler" => Self::from_rows(&[&[0.0]], &[1.0], &[0.0]),
            "midpoint" => Self::from_rows(&[&[0.0, 0.0], &[0.5, 0.0]], &[0.0, 1.0], &[0.0, 0.5]),
            "rk4" => Self::from_rows(
                &[
                    &[0.0, 0.0, 0.0, 0.0],
                    &[0.5, 0.0, 0.0, 0.0],
                    &[0.0, 0.5, 0.0, 0.0],
                    &[0.0, 0.0, 1.0, 0.0],
                ],
                &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
                &[0.0, 0.5, 0.5, 1.0],
            ),
            "rk38" => Self::from_rows(
                &[
                    &[0.0, 0.0, 0.0, 0.0],
                    &[1.0 / 3.0, 0.0, 0.0, 0.0],
                    &[-1.0 / 3.0, 1.0, 0.0, 0.0],
                    &[1.0, -1.0, 1.0, 0.0],
                ],
                &[1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
                &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            ),
            "rk5" => Self::from_rows(
                &[
                    &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    &[1.0 / 4.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    &[1.0 / 8.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0],
                    &[0.0, -1.0 / 2.0, 1.0, 0.0, 0.0, 0.0],
                    &[3.0 / 16.0, 0.0, 0.0, 9.0 / 16.0, 0.0, 0.0],
                    &[-3.0 / 7.0, 2.0 / 7.0, 12.0 / 7.0, -12.0 / 7.0, 8.0 / 7.0, 0.0],
                ],
                &[7.0 / 90.0, 0.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0],
                &[0.0, 0.25, 0.25, 0.5, 0.75, 1.0],
            ),
            other => {
                return Err(Error::Tableau(format!(
                    "unknown tableau {other:?} (known: {})",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Resolves a builtin name, falling back to a JSON file path.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&name_or_path) {
            Self::builtin(name_or_path)
        } else if Path::new(name_or_path).is_file() {
            Self::from_json_path(name_or_path)
        } else {
            Self::builtin(name_or_path)
        }
    }

    pub fn stages(&self) -> usize {
        self.beta.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    /// Stage mixing coefficients `c / (c + k + omega[i])`.
    pub fn stage_gammas(&self, c: f64, k: usize) -> DVector<f64> {
        self.omega.map(|w| c / (c + k as f64 + w))
    }

    /// Solves `(I + AᵀΓ) y = rhs`. The matrix is unit upper triangular
    /// because `A` is strictly lower triangular, so back substitution is exact
    /// in structure and never singular.
    fn solve_shifted(&self, gammas: &DVector<f64>, rhs: &DVector<f64>) -> DVector<f64> {
        let q = self.stages();
        let mut y = rhs.clone();
        for i in (0..q).rev() {
            let mut acc = y[i];
            for j in i + 1..q {
                // (AᵀΓ)[i][j] = A[j][i] * γ_j
                acc -= self.a[(j, i)] * gammas[j] * y[j];
            }
            y[i] = acc;
        }
        y
    }

    /// `P⁽ᵏ⁾ = Γ (I + AᵀΓ)⁻¹`.
    pub fn p_matrix(&self, c: f64, k: usize) -> DMatrix<f64> {
        let q = self.stages();
        let gammas = self.stage_gammas(c, k);
        let mut p = DMatrix::zeros(q, q);
        for col in 0..q {
            let mut e = DVector::zeros(q);
            e[col] = 1.0;
            let y = self.solve_shifted(&gammas, &e);
            for row in 0..q {
                p[(row, col)] = gammas[row] * y[row];
            }
        }
        p
    }

    pub fn certificate(&self, c: f64, k: usize) -> Result<Certificate> {
        if !(c >= 1.0 && c.is_finite()) {
            return Err(Error::invalid("schedule constant", format!("c = {c} must be >= 1")));
        }
        if k < 1 {
            return Err(Error::invalid("iteration", "certificates need k >= 1"));
        }
        let gammas = self.stage_gammas(c, k);
        let y = self.solve_shifted(&gammas, &self.beta);
        let q = self.stages() as f64;
        let z = gammas.component_mul(&y) * q;
        let in_unit_interval = z.iter().all(|v| (0.0..=1.0).contains(v));
        Ok(Certificate {
            z,
            k,
            c,
            in_unit_interval,
        })
    }

    /// `‖z⁽ᵏ⁾‖_∞` for `k = 1..=k_max`.
    pub fn certificate_decay(&self, c: f64, k_max: usize) -> Result<Vec<f64>> {
        if k_max < 2 {
            return Err(Error::invalid("k_max", format!("{k_max} must be >= 2")));
        }
        (1..=k_max)
            .map(|k| Ok(self.certificate(c, k)?.z.amax()))
            .collect()
    }

    /// Constants of the one-step descent lemma and the resulting `h₀`.
    ///
    /// `p_max` is the largest column 2-norm of `P⁽¹⁾`. The Lipschitz
    /// constant of `f` itself is taken as one.
    pub fn rate_constants(&self, c: f64, smoothness: f64, diameter: f64, h_x0: f64) -> Result<RateConstants> {
        if !(c > 1.0 && c.is_finite()) {
            return Err(Error::invalid("schedule constant", format!("c = {c} must be > 1")));
        }
        if !(smoothness > 0.0) {
            return Err(Error::invalid("smoothness", format!("L = {smoothness} must be > 0")));
        }
        if !(diameter >= 0.0) {
            return Err(Error::invalid("diameter", format!("{diameter} must be >= 0")));
        }
        let q = self.stages();
        let p = self.p_matrix(c, 1);
        let p_max = (0..q).map(|j| p.column(j).norm()).fold(0.0, f64::max);
        let max_abs_a = self.a.amax();
        let c1 = q as f64 * p_max;
        let c2 = q as f64 * max_abs_a;
        let d2 = c1 * diameter;
        let d3 = c2 * c1 * diameter;
        let d4 = (smoothness * d2 * d2 + 2.0 * smoothness * d2 * d3 + 2.0 * d3) / 2.0;
        let h0 = h_x0.max(d4 * c * c / (c - 1.0));
        Ok(RateConstants {
            p_max,
            d2,
            d3,
            d4,
            h0,
            q,
            c,
            smoothness,
            diameter,
            max_abs_a,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            Tableau::builtin(name).unwrap();
        }
        assert!(Tableau::builtin("rk7").is_err());
    }

    #[test]
    fn midpoint_layout() {
        let t = Tableau::builtin("midpoint").unwrap();
        assert_eq!(t.a(), &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.0]));
        assert_eq!(t.beta().as_slice(), &[0.0, 1.0]);
        assert_eq!(t.omega().as_slice(), &[0.0, 0.5]);
        let rk38 = Tableau::builtin("rk38").unwrap();
        assert_eq!(rk38.beta().as_slice(), &[0.125, 0.375, 0.375, 0.125]);
        let euler = Tableau::builtin("euler").unwrap();
        assert_eq!(euler.stages(), 1);
    }

    #[test]
    fn validate_reports_violation() {
        let mid = Tableau::builtin("midpoint").unwrap();
        let bad = Tableau {
            beta: DVector::from_row_slice(&[0.0, 0.5]),
            ..mid.clone()
        };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("beta sum"), "{msg}");

        let mut rk4 = Tableau::builtin("rk4").unwrap();
        rk4.a[(0, 1)] = 1.0;
        let msg = rk4.validate().unwrap_err().to_string();
        assert!(msg.contains("not strictly lower triangular"), "{msg}");

        let bad_omega = Tableau {
            omega: DVector::from_row_slice(&[0.1, 0.5]),
            ..mid
        };
        assert!(bad_omega.validate().is_err());
    }

    #[test]
    fn midpoint_certificates() {
        let t = Tableau::builtin("midpoint").unwrap();
        let z1 = t.certificate(2.0, 1).unwrap();
        assert_abs_diff_eq!(z1.z[0], -0.3810, epsilon = 5e-5);
        assert_abs_diff_eq!(z1.z[1], 1.1429, epsilon = 5e-5);
        assert!(!z1.in_unit_interval);
        let z2 = t.certificate(2.0, 2).unwrap();
        assert_abs_diff_eq!(z2.z[0], -0.2222, epsilon = 5e-5);
        assert_abs_diff_eq!(z2.z[1], 0.8889, epsilon = 5e-5);
    }

    #[test]
    fn rk4_certificate() {
        let z = Tableau::builtin("rk4").unwrap().certificate(2.0, 1).unwrap();
        for (got, want) in z.z.iter().zip([0.2449, 0.5986, 0.5714, 0.3333]) {
            assert_abs_diff_eq!(*got, want, epsilon = 5e-5);
        }
        assert!(z.in_unit_interval);
    }

    #[test]
    fn certificate_domain() {
        let t = Tableau::builtin("rk4").unwrap();
        assert!(t.certificate(0.5, 1).is_err());
        assert!(t.certificate(2.0, 0).is_err());
        assert!(t.certificate_decay(2.0, 1).is_err());
    }

    #[test]
    fn midpoint_decay_values() {
        let d = Tableau::builtin("midpoint").unwrap().certificate_decay(2.0, 2).unwrap();
        assert_abs_diff_eq!(d[0], 1.1429, epsilon = 5e-5);
        assert_abs_diff_eq!(d[1], 0.8889, epsilon = 5e-5);
    }

    #[test]
    fn decay_is_monotone_for_builtins() {
        for name in BUILTIN_NAMES {
            let d = Tableau::builtin(name).unwrap().certificate_decay(2.0, 200).unwrap();
            assert!(d.windows(2).all(|w| w[1] <= w[0]), "{name}");
        }
    }

    #[test]
    fn euler_rate_constants() {
        let r = Tableau::builtin("euler").unwrap().rate_constants(2.0, 1.0, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(r.p_max, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.d2, 4.0 / 3.0, epsilon = 1e-15);
        assert_eq!(r.d3, 0.0);
        assert_abs_diff_eq!(r.d4, 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.h0, 32.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_diameter_gives_zero_constants() {
        for name in BUILTIN_NAMES {
            let r = Tableau::builtin(name).unwrap().rate_constants(2.0, 1.0, 0.0, 0.0).unwrap();
            assert_eq!((r.d2, r.d3, r.d4), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn midpoint_rate_constants_match_direct_inverse() {
        let t = Tableau::builtin("midpoint").unwrap();
        let r = t.rate_constants(2.0, 1.0, 2.0, 0.0).unwrap();
        // direct 2x2 inverse of M = I + AᵀΓ = [[1, a], [0, 1]] with a = A21 γ2
        let (g1, g2): (f64, f64) = (2.0 / 3.0, 2.0 / 3.5);
        let a: f64 = 0.5 * g2;
        let det: f64 = 1.0;
        let inv = [[1.0 / det, -a / det], [0.0, 1.0 / det]];
        let p = [[g1 * inv[0][0], g1 * inv[0][1]], [g2 * inv[1][0], g2 * inv[1][1]]];
        let col0 = (p[0][0] * p[0][0] + p[1][0] * p[1][0]).sqrt();
        let col1 = (p[0][1] * p[0][1] + p[1][1] * p[1][1]).sqrt();
        let p_max = col0.max(col1);
        assert_abs_diff_eq!(r.p_max, p_max, epsilon = 1e-14);
        let d2 = 2.0 * p_max * 2.0;
        let d3 = 2.0 * 0.5 * d2;
        assert_abs_diff_eq!(r.d2, d2, epsilon = 1e-14);
        assert_abs_diff_eq!(r.d3, d3, epsilon = 1e-14);
        assert_abs_diff_eq!(r.d4, (d2 * d2 + 2.0 * d2 * d3 + 2.0 * d3) / 2.0, epsilon = 1e-13);
        assert!(r.d2 > 0.0 && r.d3 > 0.0 && r.d4 > 0.0);
    }

    #[test]
    fn rate_constants_reject_c_at_most_one() {
        let t = Tableau::builtin("euler").unwrap();
        assert!(t.rate_constants(1.0, 1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn p_matrix_matches_general_inverse() {
        for name in BUILTIN_NAMES {
            let t = Tableau::builtin(name).unwrap();
            for k in [1, 3, 10] {
                let g = DMatrix::from_diagonal(&t.stage_gammas(2.0, k));
                let m = DMatrix::identity(t.stages(), t.stages()) + t.a().transpose() * &g;
                let direct = &g * m.try_inverse().unwrap();
                assert!((direct - t.p_matrix(2.0, k)).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let t = Tableau::builtin("rk38").unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.contains("\"A\""));
        assert_eq!(Tableau::from_json_str(&text).unwrap(), t);
        let bad = r#"{"A": [[0, 1], [0, 0]], "beta": [0.5, 0.5], "omega": [0, 1]}"#;
        assert!(Tableau::from_json_str(bad).is_err());
    }

    proptest! {
        #[test]
        fn euler_certificate_closed_form(c in 1.0f64..50.0, k in 1usize..10_000) {
            let z = Tableau::builtin("euler").unwrap().certificate(c, k).unwrap();
            prop_assert_eq!(z.z[0], c / (c + k as f64));
        }

        #[test]
        fn d4_dominates_smoothness_term(
            idx in 0usize..5,
            c in 1.01f64..20.0,
            l in 0.01f64..100.0,
            diam in 0.0f64..10.0,
        ) {
            let r = Tableau::builtin(BUILTIN_NAMES[idx]).unwrap().rate_constants(c, l, diam, 0.0).unwrap();
            prop_assert!(r.d4 >= l * r.d2 * r.d2 / 2.0);
            prop_assert!(r.h0 >= r.d4 * c * c / (c - 1.0));
            prop_assert!(r.p_max >= 0.0 && r.d2 >= 0.0 && r.d3 >= 0.0);
        }
    }
}
