//! Radial generator `L g = D[g″ + ((d−1)/r + σ(r)/r^{d−1}) g′]` and its
//! adjoint `L* u = D[u″ + ((d−1)/r − σ(r)/r^{d−1}) u′]` (adjoint with respect
//! to the weight `r^{d−1}` for constant `σ`).

use serde::{Deserialize, Serialize};

use super::{Field, RadialGrid};
use crate::model::{GridSpec, ProcessSpec};

/// Signed reduced drift strength `σ(r)`, constant for the processes studied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum SigmaProfile {
    Constant {
        sigma: f64,
    },
    /// `σ(r) = intercept + slope·r`
    Linear {
        intercept: f64,
        slope: f64,
    },
}

impl SigmaProfile {
    pub fn constant(sigma: f64) -> Self {
        SigmaProfile::Constant { sigma }
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            SigmaProfile::Constant { sigma } => sigma,
            SigmaProfile::Linear { intercept, slope } => intercept + slope * r,
        }
    }

    pub fn derivative(&self, _r: f64) -> f64 {
        match *self {
            SigmaProfile::Constant { .. } => 0.0,
            SigmaProfile::Linear { slope, .. } => slope,
        }
    }

    pub fn negated(&self) -> Self {
        match *self {
            SigmaProfile::Constant { sigma } => SigmaProfile::Constant { sigma: -sigma },
            SigmaProfile::Linear { intercept, slope } => SigmaProfile::Linear {
                intercept: -intercept,
                slope: -slope,
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SigmaProfile::Constant { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `L*`, drives the occupation density.
    Forward,
    /// `L`, drives survival and hitting probabilities.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Generator {
    pub dimension: u32,
    pub diffusion: f64,
    pub sigma: SigmaProfile,
}

impl Generator {
    pub fn from_spec(spec: &ProcessSpec) -> Self {
        Generator {
            dimension: spec.dimension,
            diffusion: spec.diffusion,
            sigma: SigmaProfile::constant(spec.signed_sigma()),
        }
    }

    /// Same generator with the drift reversed.
    pub fn mirrored(&self) -> Self {
        Generator {
            sigma: self.sigma.negated(),
            ..*self
        }
    }

    /// First-order coefficient `c(r)` in `D g″ + c(r) g′`.
    pub fn first_order(&self, r: f64, kind: OperatorKind) -> f64 {
        let radial = self.sigma.value(r) / r.powi(self.dimension as i32 - 1);
        let drift = match kind {
            OperatorKind::Backward => radial,
            OperatorKind::Forward => -radial,
        };
        let curvature = if self.dimension == 1 {
            0.0
        } else {
            (self.dimension - 1) as f64 / r
        };
        self.diffusion * (curvature + drift)
    }

    /// `exp(−∫_a^r σ(ρ)ρ^{1−d} dρ)`: satisfies `K′ = −σ r^{1−d} K`, `K(a) = 1`.
    pub fn conversion_factor(&self, a: f64, r: f64) -> f64 {
        let d = self.dimension as i32;
        let integral = match self.sigma {
            SigmaProfile::Constant { sigma } => sigma * power_integral(1 - d, a, r),
            SigmaProfile::Linear { intercept, slope } => {
                intercept * power_integral(1 - d, a, r) + slope * power_integral(2 - d, a, r)
            }
        };
        (-integral).exp()
    }
}

/// `∫_a^r ρ^p dρ`.
fn power_integral(p: i32, a: f64, r: f64) -> f64 {
    if p == -1 {
        (r / a).ln()
    } else {
        let q = (p + 1) as f64;
        (r.powi(p + 1) - a.powi(p + 1)) / q
    }
}

/// Central-difference operator on every node; boundary rows are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(g.len(), n);
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * g[i];
                if i > 0 {
                    s += self.lower[i] * g[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * g[i + 1];
                }
                s
            })
            .collect()
    }

    /// Entry `(i, j)`; zero off the band.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.lower[i]
        } else if i + 1 == j {
            self.upper[i]
        } else {
            0.0
        }
    }
}

pub fn operator_matrix(generator: &Generator, grid: &RadialGrid, kind: OperatorKind) -> TridiagonalOperator {
    let n = grid.len();
    let h = grid.spacing();
    let dd = generator.diffusion / (h * h);
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let c = generator.first_order(grid.node(i), kind) / (2.0 * h);
        lower[i] = dd - c;
        diag[i] = -2.0 * dd;
        upper[i] = dd + c;
    }
    TridiagonalOperator { lower, diag, upper }
}

/// `L g` or `L* g` at interior nodes; boundary entries are zero.
pub fn operator_apply(spec: &ProcessSpec, grid: &GridSpec, g: &Field, kind: OperatorKind) -> Field {
    let generator = Generator::from_spec(spec);
    let radial = RadialGrid::from_spec(spec, grid);
    let values = operator_matrix(&generator, &radial, kind).apply(&g.values);
    Field::new(radial, values, g.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::model::DriftSign;

    fn grid(n: usize) -> GridSpec {
        GridSpec {
            r_max: 6.0,
            n_cells: n,
            dt: 0.01,
            t_end: 1.0,
        }
    }

    #[test]
    fn constant_is_in_backward_kernel() {
        let spec = ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0);
        let rg = RadialGrid::from_spec(&spec, &grid(64));
        let ones = Field::from_fn(rg, 0.0, |_| 1.0);
        let out = operator_apply(&spec, &grid(64), &ones, OperatorKind::Backward);
        assert!(out.values.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn hitting_factor_residual_is_second_order() {
        let spec = ProcessSpec::radial(3, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0);
        let norms: Vec<f64> = [200, 400, 800]
            .iter()
            .map(|&n| {
                let rg = RadialGrid::from_spec(&spec, &grid(n));
                let h = Field::from_fn(rg, 0.0, |r| analytic::hitting_probability_at(&spec, r));
                let out = operator_apply(&spec, &grid(n), &h, OperatorKind::Backward);
                out.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .collect();
        for w in norms.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn conversion_factor_matches_closed_form() {
        for d in [1, 2, 3, 5] {
            let spec = ProcessSpec::radial(d, 1.0, 0.7, DriftSign::Outward, 1.0, 2.0);
            let k = Generator::from_spec(&spec).conversion_factor(1.0, 2.5);
            assert!(
                (k - analytic::hitting_probability_at(&spec, 2.5)).abs() < 1e-12,
                "d={d}"
            );
        }
    }

    /// Weighted pairing ⟨L*u, g⟩ − ⟨u, Lg⟩ with weight ρ^{d−1}, trapezoid.
    fn pairing_gap(d: u32, n: usize) -> f64 {
        let spec = ProcessSpec::radial(d, 0.8, 1.3, DriftSign::Outward, 1.0, 2.0);
        let gs = grid(n);
        let rg = RadialGrid::from_spec(&spec, &gs);
        let bump = |c: f64, w: f64| move |r: f64| (-(r - c).powi(2) / (w * w)).exp();
        let u = Field::from_fn(rg, 0.0, bump(3.0, 0.5));
        let g = Field::from_fn(rg, 0.0, bump(3.4, 0.6));
        let lu = operator_apply(&spec, &gs, &u, OperatorKind::Forward);
        let lg = operator_apply(&spec, &gs, &g, OperatorKind::Backward);
        let prod = |a: &Field, b: &Field| {
            Field::new(rg, a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect(), 0.0).radial_mass(d)
        };
        (prod(&lu, &g) - prod(&u, &lg)).abs()
    }

    #[test]
    fn adjoint_pairing_holds() {
        // up to d = 3 the stencils are exact weighted transposes
        for d in [1, 2, 3] {
            for n in [100, 200, 400] {
                let gap = pairing_gap(d, n);
                assert!(gap < 1e-10, "d={d} n={n} {gap}");
            }
        }
        let gaps = [100, 200, 400].map(|n| pairing_gap(4, n));
        for w in gaps.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "{gaps:?}");
        }
    }

    #[test]
    fn weighted_transpose_relation() {
        for d in [1, 2, 3, 4] {
            let spec = ProcessSpec::radial(d, 1.0, 1.0, DriftSign::Outward, 1.0, 2.0);
            let g = Generator::from_spec(&spec);
            let errs: Vec<f64> = [50, 100, 200]
                .iter()
                .map(|&n| {
                    let rg = RadialGrid::new(1.0, 6.0, n);
                    let fwd = operator_matrix(&g, &rg, OperatorKind::Forward);
                    let bwd = operator_matrix(&g, &rg, OperatorKind::Backward);
                    let w = |i: usize| rg.node(i).powi(d as i32 - 1);
                    let mut worst = 0.0f64;
                    for i in 1..n - 1 {
                        for j in [i - 1, i, i + 1] {
                            if j == 0 || j == n {
                                continue;
                            }
                            let lhs = w(i) * fwd.entry(i, j);
                            let rhs = bwd.entry(j, i) * w(j);
                            worst = worst.max((lhs - rhs).abs());
                        }
                    }
                    worst
                })
                .collect();
            if d <= 3 {
                assert!(errs.iter().all(|e| *e < 1e-8), "d={d} {errs:?}");
            } else {
                // O(h) against entries of size 1/h²
                for w in errs.windows(2) {
                    let ratio = w[0] / w[1];
                    assert!((1.8..=2.2).contains(&ratio), "{errs:?}");
                }
            }
        }
    }
}
